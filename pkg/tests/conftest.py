import pytest

from conewave.degmat import DegreeMatrix


@pytest.fixture(scope="session")
def d3():
    return DegreeMatrix([[3]])


@pytest.fixture(scope="session")
def d32():
    return DegreeMatrix([[0, 3], [2, 0]])


@pytest.fixture(scope="session")
def d33():
    return DegreeMatrix([[0, 3], [3, 0]])


def pytest_terminal_summary(terminalreporter):
    lines = []
    for key in ("passed", "failed"):
        for rep in terminalreporter.stats.get(key, []):
            lines += [v for k, v in getattr(rep, "user_properties", []) if k == "acceptance"]
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: s.split('] ', 1)[1]):
            terminalreporter.write_line(line)
