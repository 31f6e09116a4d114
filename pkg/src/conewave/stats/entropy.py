"""Entropy estimators and the star-minus-half-edges functional Delta_k."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree
from scipy.special import digamma, gammaln

from ..cover import Shape, build_ball
from ..degmat import DegreeMatrix
from ..greens import ball_greens, continue_to_real_axis, solve_fixed_point
from .projection import ProjectionBasis, pi_basis


@dataclass
class EntropyEstimate:
    value: float
    se: float
    n: int
    dim: int
    method: str
    diagnostics: dict = field(default_factory=dict)


def discretized_entropy(samples: np.ndarray, basis: ProjectionBasis | None, a: float) -> EntropyEstimate:
    """Shannon entropy of ``floor(a <x, chi_j>) / a`` with the Miller–Madow
    correction. ``diagnostics`` carries the plug-in value, the ``dim log a``
    reference and the implied differential entropy."""
    if a <= 0:
        raise ValueError("a must be positive")
    X = np.asarray(samples, dtype=float)
    Y = basis.project(X) if basis is not None else X
    n, m = Y.shape
    cells = np.floor(a * Y).astype(np.int64)
    _, inv, counts = np.unique(cells, axis=0, return_inverse=True, return_counts=True)
    p = counts / n
    plugin = float(-np.sum(p * np.log(p)))
    K = len(counts)
    value = plugin + (K - 1) / (2 * n)
    info = -np.log(p[inv.ravel()])
    se = float(np.std(info, ddof=1) / np.sqrt(n)) if n > 1 else 0.0
    diag = {"plugin": plugin, "cells": K, "log_a_term": m * np.log(a), "differential": value - m * np.log(a)}
    if n / K < 10:
        diag["warning"] = f"only {n / K:.1f} samples per occupied cell"
    return EntropyEstimate(value, se, n, m, f"discretized(a={a:g})", diag)


def _knn_raw(Y: np.ndarray, k: int) -> float:
    n, m = Y.shape
    dist, _ = cKDTree(Y).query(Y, k=k + 1)
    eps = dist[:, -1]
    if np.any(eps <= 0):
        raise ValueError("degenerate samples: repeated points")
    log_vol = (m / 2) * np.log(np.pi) - gammaln(m / 2 + 1)
    return float(digamma(n) - digamma(k) + log_vol + m * np.mean(np.log(eps)))


def differential_entropy_knn(samples: np.ndarray, k: int = 4, n_sub: int = 10, rng=None) -> EntropyEstimate:
    """Kozachenko–Leonenko estimate; the SE comes from ``n_sub`` disjoint
    random subsamples."""
    Y = np.asarray(samples, dtype=float)
    if Y.ndim == 1:
        Y = Y[:, None]
    n, m = Y.shape
    if n < 100:
        raise ValueError("need at least 100 samples")
    cov = np.atleast_2d(np.cov(Y.T))
    w = np.linalg.eigvalsh(cov)
    if w.min() <= 1e-12 * max(w.max(), 1e-300):
        raise ValueError("degenerate samples: singular covariance")
    value = _knn_raw(Y, k)
    rng = np.random.default_rng(rng)
    parts = np.array_split(rng.permutation(n), n_sub)
    subs = np.array([_knn_raw(Y[p], k) for p in parts])
    se = float(np.std(subs, ddof=1) / np.sqrt(n_sub))
    return EntropyEstimate(value, se, n, m, f"knn(k={k})", {"subsample_values": subs.tolist()})


def gaussian_entropy(cov: np.ndarray) -> float:
    m = cov.shape[0]
    sign, logdet = np.linalg.slogdet(cov)
    if sign <= 0:
        raise np.linalg.LinAlgError("covariance is not positive definite")
    return 0.5 * (m * np.log(2 * np.pi * np.e) + logdet)


# ---------------------------------------------------------------------------


@dataclass
class EntropyReport:
    value: float
    se: float
    raw: float
    reference: float | None
    method: str
    k: int
    star: dict
    edges: dict
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "se": self.se,
            "raw": self.raw,
            "reference": self.reference,
            "method": self.method,
            "k": self.k,
            "star": {str(t): v for t, v in self.star.items()},
            "edges": {f"{t},{j}": v for (t, j), v in self.edges.items()},
            "diagnostics": self.diagnostics,
        }


def _shapes(d: DegreeMatrix, k: int):
    star = {t: Shape.star(k) for t in range(d.k)}
    edges = {(t, j): Shape.edge(j, k) for t in range(d.k) for j in range(d.k) if d[t, j]}
    return star, edges


def _combine(d: DegreeMatrix, star_vals: dict, edge_vals: dict) -> float:
    q = [float(x) for x in d.q]
    total = 0.0
    for t in range(d.k):
        total += q[t] * star_vals[t]
        for j in range(d.k):
            if d[t, j]:
                total -= q[t] * 0.5 * d[t, j] * edge_vals[(t, j)]
    return total


def _combine_se(d: DegreeMatrix, star_se: dict, edge_se: dict) -> float:
    q = [float(x) for x in d.q]
    var = 0.0
    for t in range(d.k):
        var += (q[t] * star_se[t]) ** 2
        for j in range(d.k):
            if d[t, j]:
                var += (q[t] * 0.5 * d[t, j] * edge_se[(t, j)]) ** 2
    return float(np.sqrt(var))


def wave_delta_k(d: DegreeMatrix, lam: float, k: int) -> float:
    """Delta_k of the Gaussian wave itself, from exact projected covariances."""
    cg = continue_to_real_axis(d, lam)
    star_s, edge_s = _shapes(d, k)

    def H(t, shape):
        ball = build_ball(d, t, shape)
        cov = ball_greens(cg, ball).im_part
        return gaussian_entropy(pi_basis(ball, lam).restrict(cov))

    return _combine(d, {t: H(t, s) for t, s in star_s.items()}, {e: H(e[0], s) for e, s in edge_s.items()})


def delta_k_estimate(
    d: DegreeMatrix,
    lam: float,
    k: int,
    star: dict,
    edges: dict,
    method: str = "knn",
    a: float = 4.0,
    bases: str = "pi",
    reference: bool = True,
    rng=None,
) -> EntropyReport:
    """Sampled ``E_o[H(star) - 1/2 sum_{i~o} H(edge)]`` with exact q weights.

    ``star[t]`` holds sample rows on ``B_k(C_o)`` for a type-t root and
    ``edges[(t, j)]`` rows on ``B_k(e_oi)`` with i of type j, all in the
    canonical coordinates of :func:`build_ball`. Samples are projected on
    ``pi_basis`` (``bases="pi"``) or used as they are (``bases="identity"``).

    ``raw`` is the functional of the samples. Even the Gaussian wave has a
    nonzero raw value at fixed ``lam``, so with ``reference=True`` the
    reported ``value`` is ``raw`` minus the wave's own value computed from
    exact covariances in the same bases; a Gaussian wave sample then gives
    about 0 and a less random process gives a negative value.
    """
    if reference and bases != "pi":
        raise ValueError("the wave reference is defined in pi bases only")
    star_s, edge_s = _shapes(d, k)
    missing = [t for t in star_s if t not in star] + [e for e in edge_s if e not in edges]
    if missing:
        raise ValueError(f"missing samples for shapes {missing}")

    def basis(t, shape):
        ball = build_ball(d, t, shape)
        return pi_basis(ball, lam) if bases == "pi" else None

    def est(rows, B):
        rows = np.asarray(rows, dtype=float)
        if B is not None and rows.shape[1] != B.ball.n:
            raise ValueError(f"sample width {rows.shape[1]} does not match shape size {B.ball.n}")
        if method == "discretized":
            return discretized_entropy(rows, B, a)
        if method == "knn":
            Y = B.project(rows) if B is not None else rows
            return differential_entropy_knn(Y, rng=rng)
        raise ValueError(f"unknown method {method!r}")

    s_est = {t: est(star[t], basis(t, s)) for t, s in star_s.items()}
    e_est = {e: est(edges[e], basis(e[0], s)) for e, s in edge_s.items()}
    raw = _combine(d, {t: v.value for t, v in s_est.items()}, {e: v.value for e, v in e_est.items()})
    se = _combine_se(d, {t: v.se for t, v in s_est.items()}, {e: v.se for e, v in e_est.items()})
    ref = wave_delta_k(d, lam, k) if reference else None
    value = raw - ref if ref is not None else raw
    dims = _combine(d, {t: v.dim for t, v in s_est.items()}, {e: v.dim for e, v in e_est.items()})
    diag = {"log_a_coefficient": dims}
    warn = [v.diagnostics["warning"] for v in list(s_est.values()) + list(e_est.values()) if "warning" in v.diagnostics]
    if warn:
        diag["warnings"] = warn
    return EntropyReport(
        value=float(value),
        se=se,
        raw=float(raw),
        reference=ref,
        method=s_est[0].method,
        k=k,
        star={t: {"value": v.value, "se": v.se, "dim": v.dim} for t, v in s_est.items()},
        edges={e: {"value": v.value, "se": v.se, "dim": v.dim} for e, v in e_est.items()},
        diagnostics=diag,
    )


def gaussian_delta_k(d: DegreeMatrix, lam: float, eta: float, k: int, rng=None) -> EntropyReport:
    """Delta_k of the wave seen through ``-i eta G(lam + i eta)``, from
    log-determinants: for each shape ``L = logdet S0 - logdet M`` with
    ``S0 = Im G(lam + i0)`` and ``M = Im G(lam + i eta)``, both projected on
    ``pi_basis``, and ``Delta = E_o[L_star / 2 - sum_{i~o} L_edge / 4]``.
    """
    if not 0 < eta <= 1:
        raise ValueError("eta must lie in (0, 1]")
    c0 = continue_to_real_axis(d, lam)
    if c0.suspect:
        raise ValueError(f"lambda = {lam} is a suspected exceptional point: {c0.reason}")
    ce = solve_fixed_point(d, complex(lam, eta))
    star_s, edge_s = _shapes(d, k)

    def L(t, shape):
        ball = build_ball(d, t, shape)
        B = pi_basis(ball, lam, rng)
        s0 = np.linalg.slogdet(B.restrict(ball_greens(c0, ball).im_part))
        me = np.linalg.slogdet(B.restrict(ball_greens(ce, ball).im_part))
        if s0[0] <= 0 or me[0] <= 0:
            raise np.linalg.LinAlgError(f"singular projected covariance on {shape} (type {t})")
        return s0[1] - me[1]

    Ls = {t: L(t, s) for t, s in star_s.items()}
    Le = {e: L(e[0], s) for e, s in edge_s.items()}
    value = _combine(d, {t: 0.5 * v for t, v in Ls.items()}, {e: 0.5 * v for e, v in Le.items()})
    return EntropyReport(
        value=float(value),
        se=0.0,
        raw=float(value),
        reference=None,
        method=f"gaussian-logdet(eta={eta:g})",
        k=k,
        star={t: {"logdet_ratio": v} for t, v in Ls.items()},
        edges={e: {"logdet_ratio": v} for e, v in Le.items()},
    )
