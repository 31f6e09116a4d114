"""Expanding degree matrices: validation, type fractions and vertex counts."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from math import lcm
from pathlib import Path

import numpy as np


class InvalidDegreeMatrix(ValueError):
    pass


@dataclass(frozen=True)
class Violation:
    condition: int
    message: str
    witness: tuple[int, ...] = ()


@dataclass(frozen=True)
class ValidationReport:
    valid: bool
    violations: tuple[Violation, ...] = ()

    def to_dict(self) -> dict:
        return {
            "valid": self.valid,
            "violations": [
                {"condition": v.condition, "message": v.message, "witness": list(v.witness)}
                for v in self.violations
            ],
        }


def _as_int_matrix(d) -> tuple[tuple[int, ...], ...]:
    arr = np.asarray(d)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise InvalidDegreeMatrix(f"degree matrix must be square, got shape {arr.shape}")
    rows = []
    for row in arr.tolist():
        out = []
        for x in row:
            if int(x) != x or x < 0:
                raise InvalidDegreeMatrix(f"entries must be nonnegative integers, got {x!r}")
            out.append(int(x))
        rows.append(tuple(out))
    return tuple(rows)


def _reachable(adj: list[list[int]], start: int) -> set[int]:
    seen = {start}
    stack = [start]
    while stack:
        u = stack.pop()
        for v in adj[u]:
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return seen


def validate(d) -> ValidationReport:
    """Check the four expanding-degree-matrix conditions.

    Every violated condition is listed with a witness: ``(i, j)`` for
    support asymmetry, ``(i, j, l)`` for ratio inconsistency, ``(i, j)`` for
    an unreachable pair and the offending row for the growth condition.
    Indices are 0-based.
    """
    try:
        m = _as_int_matrix(d)
    except InvalidDegreeMatrix as exc:
        return ValidationReport(False, (Violation(0, str(exc)),))
    k = len(m)
    if k == 0:
        return ValidationReport(False, (Violation(0, "empty matrix"),))
    out: list[Violation] = []

    for i, j in product(range(k), repeat=2):
        if m[i][j] > 0 and m[j][i] == 0:
            out.append(Violation(1, f"d[{i}][{j}] > 0 but d[{j}][{i}] = 0", (i, j)))

    for i, j, l in product(range(k), repeat=3):
        if m[j][i] and m[l][j] and m[l][i]:
            lhs = Fraction(m[i][j], m[j][i]) * Fraction(m[j][l], m[l][j])
            rhs = Fraction(m[i][l], m[l][i])
            if lhs != rhs:
                out.append(Violation(2, f"ratio inconsistency {lhs} != {rhs}", (i, j, l)))

    adj = [[j for j in range(k) if m[i][j] > 0] for i in range(k)]
    for i in range(k):
        reach = _reachable(adj, i)
        missing = [j for j in range(k) if j not in reach]
        if missing:
            out.append(Violation(3, f"type {missing[0]} unreachable from type {i}", (i, missing[0])))
            break

    sums = [sum(r) for r in m]
    if max(sums) < 3:
        row = int(np.argmax(sums))
        out.append(Violation(4, f"max row sum {max(sums)} < 3", (row,)))
    if min(sums) < 2:
        row = int(np.argmin(sums))
        out.append(Violation(4, f"min row sum {min(sums)} < 2", (row,)))

    return ValidationReport(not out, tuple(out))


@dataclass(frozen=True)
class DegreeMatrix:
    """A validated expanding degree matrix ``d[i][j]`` (type-i vertices send
    ``d[i][j]`` edges to type-j vertices)."""

    entries: tuple[tuple[int, ...], ...]
    q: tuple[Fraction, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        entries = _as_int_matrix(self.entries)
        object.__setattr__(self, "entries", entries)
        report = validate(entries)
        if not report.valid:
            msg = "; ".join(f"condition {v.condition}: {v.message}" for v in report.violations)
            raise InvalidDegreeMatrix(msg)
        object.__setattr__(self, "q", _type_fractions(entries))

    @classmethod
    def from_array(cls, d) -> "DegreeMatrix":
        return cls(_as_int_matrix(d))

    @property
    def k(self) -> int:
        return len(self.entries)

    @property
    def array(self) -> np.ndarray:
        return np.array(self.entries, dtype=np.int64)

    @property
    def degrees(self) -> tuple[int, ...]:
        return tuple(sum(r) for r in self.entries)

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        return self.entries[i][j]

    def to_json(self) -> str:
        return json.dumps({"k": self.k, "d": [list(r) for r in self.entries]})


def _type_fractions(m) -> tuple[Fraction, ...]:
    k = len(m)
    q: list[Fraction | None] = [None] * k
    q[0] = Fraction(1)
    stack = [0]
    while stack:
        i = stack.pop()
        for j in range(k):
            if m[i][j] and q[j] is None:
                # q_i d_ij = q_j d_ji
                q[j] = q[i] * Fraction(m[i][j], m[j][i])
                stack.append(j)
    total = sum(q)
    q = [x / total for x in q]
    for i, j in product(range(k), repeat=2):
        if m[i][j]:
            assert q[i] * m[i][j] == q[j] * m[j][i], "inconsistent degree ratios"
    return tuple(q)


def type_fractions(d: DegreeMatrix) -> tuple[Fraction, ...]:
    """Exact fractions ``q_i = |V_i| / N``."""
    return d.q


@dataclass(frozen=True)
class FeasibleCounts:
    N: int
    counts: tuple[int, ...] | None
    reason: str = ""
    next_feasible: int | None = None

    @property
    def feasible(self) -> bool:
        return self.counts is not None


def _counts_if_feasible(d: DegreeMatrix, N: int) -> tuple[tuple[int, ...] | None, str]:
    counts = []
    for i, qi in enumerate(d.q):
        n_i = qi * N
        if n_i.denominator != 1:
            return None, f"q_{i} N = {n_i} is not an integer"
        counts.append(int(n_i))
    for i in range(d.k):
        if (d[i, i] * counts[i]) % 2:
            return None, f"odd number of type-{i} self half-edges ({d[i, i] * counts[i]})"
    return tuple(counts), ""


def feasible_counts(d: DegreeMatrix, N: int) -> FeasibleCounts:
    """Per-type vertex counts for ``G(N, d)``, or the reason it is empty and
    the smallest feasible ``N' >= N``."""
    if N < 1:
        raise ValueError("N must be positive")
    counts, reason = _counts_if_feasible(d, N)
    if counts is not None:
        return FeasibleCounts(N, counts)
    period = 2 * lcm(*(qi.denominator for qi in d.q))
    for n2 in range(N + 1, N + period + 1):
        if _counts_if_feasible(d, n2)[0] is not None:
            return FeasibleCounts(N, None, reason, n2)
    raise AssertionError("no feasible size within one period")  # pragma: no cover


def load_degree_matrix(path: str | Path) -> DegreeMatrix:
    """Read ``{"k": int, "d": [[...], ...]}``."""
    data = json.loads(Path(path).read_text())
    return parse_degree_matrix(data)


def parse_degree_matrix(data: dict) -> DegreeMatrix:
    if "d" not in data:
        raise InvalidDegreeMatrix("missing field 'd'")
    m = _as_int_matrix(data["d"])
    if "k" in data and int(data["k"]) != len(m):
        raise InvalidDegreeMatrix(f"k = {data['k']} does not match a {len(m)}x{len(m)} matrix")
    return DegreeMatrix(m)
