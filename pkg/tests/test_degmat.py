from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conewave.degmat import (
    DegreeMatrix,
    InvalidDegreeMatrix,
    feasible_counts,
    load_degree_matrix,
    parse_degree_matrix,
    type_fractions,
    validate,
)


def test_regular_is_valid():
    assert validate([[3]]).valid
    assert type_fractions(DegreeMatrix([[3]])) == (Fraction(1),)


def test_biregular_fractions():
    d = DegreeMatrix([[0, 3], [2, 0]])
    assert d.q == (Fraction(2, 5), Fraction(3, 5))


def test_three_type_fractions():
    # q_i d_ij = q_j d_ji by hand: q = (1, 2, 2) / 5
    d = DegreeMatrix([[1, 2, 2], [1, 1, 1], [1, 1, 1]])
    assert d.q == (Fraction(1, 5), Fraction(2, 5), Fraction(2, 5))


@pytest.mark.parametrize(
    "m, cond",
    [
        ([[0, 3], [0, 3]], 1),
        ([[2, 0], [0, 3]], 3),
        ([[2]], 4),
        ([[0, 1], [1, 0]], 4),
    ],
)
def test_violations(m, cond):
    rep = validate(m)
    assert not rep.valid
    assert cond in {v.condition for v in rep.violations}
    with pytest.raises(InvalidDegreeMatrix):
        DegreeMatrix(m)


def test_ratio_inconsistency_witness():
    m = [[0, 1, 2], [1, 0, 1], [1, 2, 0]]
    rep = validate(m)
    v = [x for x in rep.violations if x.condition == 2]
    assert v and len(v[0].witness) == 3


def test_non_integer_rejected():
    assert not validate([[2.5]]).valid
    assert not validate([[1, 2]]).valid


def test_feasible_counts():
    fc = feasible_counts(DegreeMatrix([[0, 3], [2, 0]]), 10)
    assert fc.counts == (4, 6)
    bad = feasible_counts(DegreeMatrix([[0, 3], [2, 0]]), 7)
    assert not bad.feasible and bad.next_feasible == 10
    odd = feasible_counts(DegreeMatrix([[3]]), 5)
    assert not odd.feasible and odd.next_feasible == 6


def test_json_roundtrip(tmp_path):
    d = DegreeMatrix([[0, 3], [2, 0]])
    p = tmp_path / "d.json"
    p.write_text(d.to_json())
    assert load_degree_matrix(p) == d
    with pytest.raises(InvalidDegreeMatrix):
        parse_degree_matrix({"k": 3, "d": [[3]]})


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 4), st.integers(1, 4), st.integers(1, 3), st.integers(1, 3))
def test_biregular_balance(a, b, s, t):
    # [[s, a], [b, t]]: q_0 a = q_1 b whenever the matrix is valid
    m = [[s, a], [b, t]]
    rep = validate(m)
    if rep.valid:
        d = DegreeMatrix(m)
        assert d.q[0] * a == d.q[1] * b
        assert sum(d.q) == 1
