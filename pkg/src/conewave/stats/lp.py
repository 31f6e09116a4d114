"""Exact Lévy–Prokhorov distance between atomic measures, and the distance
of an empirical eigenvector process to scaled Gaussian waves."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_flow
from scipy.spatial import cKDTree

INT32_MAX = 2**31 - 1


@dataclass(frozen=True)
class AtomicMeasure:
    """Finitely many weighted atoms; atoms in different groups are at
    infinite distance (a disjoint union of spaces)."""

    points: np.ndarray
    weights: tuple[Fraction, ...]
    groups: np.ndarray

    @classmethod
    def empirical(cls, points, groups=None, weights=None) -> "AtomicMeasure":
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        n = len(pts)
        if weights is None:
            weights = [Fraction(1, n)] * n
        else:
            weights = [w if isinstance(w, Fraction) else Fraction(w).limit_denominator(10**9) for w in weights]
        grp = np.zeros(n, dtype=int) if groups is None else np.asarray(groups, dtype=int)
        return cls(pts, tuple(weights), grp).merged()

    @classmethod
    def union(cls, parts: dict, mass: dict) -> "AtomicMeasure":
        """Disjoint union of empirical measures ``parts[g]`` scaled by ``mass[g]``."""
        pts, wts, grp = [], [], []
        width = max(np.atleast_2d(np.asarray(p)).shape[-1] for p in parts.values() if len(p))
        for g, p in parts.items():
            p = np.asarray(p, dtype=float)
            if len(p) == 0:
                continue
            p = p.reshape(len(p), -1)
            pad = np.full((len(p), width), np.nan)
            pad[:, : p.shape[1]] = p
            pts.append(pad)
            wts += [Fraction(mass[g]) / len(p)] * len(p)
            grp += [g] * len(p)
        return cls(np.vstack(pts), tuple(wts), np.array(grp)).merged()

    def merged(self) -> "AtomicMeasure":
        key = np.column_stack([self.groups[:, None], np.nan_to_num(self.points, nan=np.inf)])
        uniq, inv = np.unique(key, axis=0, return_inverse=True)
        if len(uniq) == len(key):
            return self
        inv = inv.ravel()
        w = [Fraction(0)] * len(uniq)
        for n, u in enumerate(inv):
            w[u] += self.weights[n]
        first = np.array([np.flatnonzero(inv == u)[0] for u in range(len(uniq))])
        return AtomicMeasure(self.points[first], tuple(w), self.groups[first])

    @property
    def total(self) -> Fraction:
        return sum(self.weights, Fraction(0))

    def scaled(self, s: float) -> "AtomicMeasure":
        return AtomicMeasure(self.points * s, self.weights, self.groups).merged()


@dataclass(frozen=True)
class LPResult:
    value: float
    bracket: tuple[float, float]
    flows: int
    exact: bool

    def to_dict(self) -> dict:
        return {"value": self.value, "bracket": list(self.bracket), "flows": self.flows, "exact": self.exact}


def _pairs(P: AtomicMeasure, Q: AtomicMeasure, cap: float):
    """(i, j, dist) for same-group atom pairs with dist < cap."""
    out_i, out_j, out_d = [], [], []
    for g in np.intersect1d(np.unique(P.groups), np.unique(Q.groups)):
        ip = np.flatnonzero(P.groups == g)
        iq = np.flatnonzero(Q.groups == g)
        cols = ~np.all(np.isnan(P.points[ip]), axis=0)
        tp = cKDTree(P.points[ip][:, cols])
        tq = cKDTree(Q.points[iq][:, cols])
        sdm = tp.sparse_distance_matrix(tq, np.nextafter(cap, 0), output_type="coo_matrix")
        out_i.append(ip[sdm.row])
        out_j.append(iq[sdm.col])
        out_d.append(sdm.data)
        # sparse_distance_matrix drops exact zeros; recover coincident atoms
        zp = {tuple(x): a for a, x in zip(ip, P.points[ip][:, cols])}
        for b, x in zip(iq, Q.points[iq][:, cols]):
            a = zp.get(tuple(x))
            if a is not None:
                out_i.append(np.array([a]))
                out_j.append(np.array([b]))
                out_d.append(np.array([0.0]))
    if not out_i:
        return np.zeros(0, int), np.zeros(0, int), np.zeros(0)
    i, j, dd = np.concatenate(out_i), np.concatenate(out_j), np.concatenate(out_d)
    key = np.unique(np.column_stack([i, j, dd]), axis=0)
    return key[:, 0].astype(int), key[:, 1].astype(int), key[:, 2]


class _Flow:
    def __init__(self, P: AtomicMeasure, Q: AtomicMeasure):
        self.nP, self.nQ = len(P.weights), len(Q.weights)
        den = lcm(*(w.denominator for w in P.weights + Q.weights))
        if den <= INT32_MAX // 4:
            self.L = den
            self.exact = True
            cp = [int(w * den) for w in P.weights]
            cq = [int(w * den) for w in Q.weights]
        else:
            self.L = INT32_MAX // 4
            self.exact = False
            cp = [int(w * self.L) for w in P.weights]
            cq = [int(w * self.L) for w in Q.weights]
        self.cp, self.cq = np.array(cp), np.array(cq)
        self.mass = min(self.cp.sum(), self.cq.sum())
        self.calls = 0

    def deficiency(self, i: np.ndarray, j: np.ndarray) -> float:
        """``1 - maxflow / L``: the worst ``P(A) - Q(A^eps)`` over all A."""
        self.calls += 1
        nP, nQ = self.nP, self.nQ
        s, t = nP + nQ, nP + nQ + 1
        rows = np.concatenate([np.full(nP, s), i, nP + np.arange(nQ)])
        cols = np.concatenate([np.arange(nP), nP + j, np.full(nQ, t)])
        caps = np.concatenate([self.cp, np.full(len(i), self.L), self.cq]).astype(np.int32)
        G = csr_matrix((caps, (rows, cols)), shape=(nP + nQ + 2, nP + nQ + 2))
        flow = maximum_flow(G, s, t).flow_value
        return (self.L - flow) / self.L


def levy_prokhorov(P, Q, start_cap: float = 0.05) -> LPResult:
    """``inf{eps > 0 : P(A) <= Q(A^eps) + eps for all Borel A}``.

    ``A^eps`` is the open eps-blow-up. For atomic measures the worst A is a
    union of P-atoms and the worst-case excess equals the flow deficiency of
    the bipartite atom graph with edges at distance < eps. That deficiency
    is symmetric in P and Q, so the one-sided definition is already the
    symmetric one. The deficiency is a step function of eps that changes
    only at atom distances, so the infimum is found exactly by binary search
    over the sorted distinct distances.
    """
    P = P if isinstance(P, AtomicMeasure) else AtomicMeasure.empirical(P)
    Q = Q if isinstance(Q, AtomicMeasure) else AtomicMeasure.empirical(Q)
    if np.sum(~np.all(np.isnan(P.points), axis=0)) != np.sum(~np.all(np.isnan(Q.points), axis=0)):
        raise ValueError("dimension mismatch")
    fl = _Flow(P, Q)
    cap = start_cap
    while True:
        i, j, dist = _pairs(P, Q, cap)
        if fl.deficiency(i, j) <= cap or cap >= 1.0:
            break
        cap *= 2
    u = np.unique(np.concatenate([[0.0], dist]))
    bounds = np.append(u[1:], cap)

    def D(k: int) -> float:
        keep = dist <= u[k]
        return fl.deficiency(i[keep], j[keep])

    lo, hi = 0, len(u) - 1
    cache = {}
    while lo < hi:
        mid = (lo + hi) // 2
        cache[mid] = D(mid)
        if cache[mid] <= bounds[mid]:
            hi = mid
        else:
            lo = mid + 1
    Dk = cache.get(lo, None)
    if Dk is None:
        Dk = D(lo)
    value = float(max(u[lo], Dk))
    err = 0.0 if fl.exact else (fl.nP + fl.nQ) / fl.L
    return LPResult(value, (value - err, value + err), fl.calls, fl.exact)


# ---------------------------------------------------------------------------


@dataclass
class DistanceReport:
    value: float
    sigma: float
    bracket: tuple[float, float]
    n: int
    grid: list[tuple[float, float]] = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)
    method: str = "levy-prokhorov"

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "bracket": list(self.bracket),
            "n": self.n,
            "method": self.method,
            "sigma": self.sigma,
            "diagnostics": {**self.diagnostics, "sigma_grid": [list(p) for p in self.grid]},
        }


def _golden(f, a: float, b: float, tol: float, seen: dict):
    phi = (np.sqrt(5) - 1) / 2
    c, d = b - phi * (b - a), a + phi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - phi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + phi * (b - a)
            fd = f(d)
    return (c, fc) if fc <= fd else (d, fd)


def xi_k(process_parts: dict, wave_parts: dict, mass: dict, variance: float, sigma_grid=None, tol: float = 1e-3) -> DistanceReport:
    """``min_sigma d_LP(process, sigma * wave)`` over ``[0, variance^{-1/2}]``.

    ``process_parts`` and ``wave_parts`` map a root type to sample rows;
    ``mass`` holds the root-type weights. The wave rows are reused across
    sigma by scaling. A grid search is refined by golden section.
    """
    if not any(len(x) for x in process_parts.values()):
        raise ValueError("empty process")
    P = AtomicMeasure.union(process_parts, mass)
    W = AtomicMeasure.union(wave_parts, mass)
    smax = float(variance) ** -0.5
    grid = np.linspace(0.0, smax, 9) if sigma_grid is None else np.asarray(sigma_grid, float)
    if grid.min() < 0 or grid.max() > smax * (1 + 1e-12):
        raise ValueError("sigma grid must lie in [0, Var^{-1/2}]")
    seen: dict[float, float] = {}

    def f(s):
        s = float(np.clip(s, 0.0, smax))
        if s not in seen:
            seen[s] = levy_prokhorov(P, W.scaled(s)).value
        return seen[s]

    vals = [f(s) for s in grid]
    b = int(np.argmin(vals))
    a_, b_ = grid[max(b - 1, 0)], grid[min(b + 1, len(grid) - 1)]
    s_best, v_best = _golden(f, a_, b_, tol, seen)
    if vals[b] < v_best:
        s_best, v_best = grid[b], vals[b]
    n = sum(len(x) for x in process_parts.values())
    return DistanceReport(
        value=float(v_best),
        sigma=float(s_best),
        bracket=(float(v_best), float(v_best)),
        n=n,
        grid=sorted(seen.items()),
        diagnostics={"sigma_max": smax, "evaluations": len(seen)},
    )
