"""The Gaussian wave on finite tree balls.

Two samplers are provided: a direct one through a square root of the limiting
covariance ``Im G(lam + i0)``, and the resolvent pushforward
``sqrt(eta) * sum_x xi_x G(lam + i eta)_{. x}`` of white noise.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .cover import TreeBall, build_ball
from .degmat import DegreeMatrix
from .greens import (
    SpectrumError,
    ball_greens,
    cone_ward_sums,
    continue_to_real_axis,
    solve_fixed_point,
)

EIG_FLOOR = 1e-10


class TruncationError(ValueError):
    pass


@dataclass(frozen=True)
class WaveModel:
    ball: TreeBall
    lam: float
    cov: np.ndarray
    variance: float  # Im m(lam)
    factor: np.ndarray  # cov = factor @ factor.T

    @property
    def rank(self) -> int:
        return self.factor.shape[1]

    @property
    def dim(self) -> int:
        return self.ball.n


def psd_factor(cov: np.ndarray, floor: float = EIG_FLOOR) -> np.ndarray:
    """Rank-revealing square root: eigenvalues below ``floor * max`` dropped."""
    w, V = np.linalg.eigh(0.5 * (cov + cov.T))
    keep = w > floor * max(w.max(), 0.0)
    return V[:, keep] * np.sqrt(w[keep])


def wave_covariance(d: DegreeMatrix, lam: float, ball: TreeBall) -> WaveModel:
    """Covariance ``Im G_Gamma(lam + i0)`` of the wave on ``ball``."""
    cg = continue_to_real_axis(d, lam)
    if cg.suspect:
        raise SpectrumError(f"lambda = {lam} is a suspected exceptional point: {cg.reason}")
    if cg.m.imag <= 1e-9:
        raise SpectrumError(f"lambda = {lam} lies outside the spectrum")
    cov = ball_greens(cg, ball).im_part
    return WaveModel(ball, float(lam), cov, float(cg.m.imag), psd_factor(cov))


def sample_wave_factor(wm: WaveModel, rng, n: int) -> np.ndarray:
    """``n`` rows of the wave on the ball, in the ball's vertex order."""
    z = rng.standard_normal((n, wm.rank))
    return z @ wm.factor.T


def pushforward_covariance(d: DegreeMatrix, lam: float, eta: float, ball: TreeBall) -> np.ndarray:
    return ball_greens(solve_fixed_point(d, complex(lam, eta)), ball).im_part


def _circular(rng, shape) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def sample_wave_pushforward(
    d: DegreeMatrix,
    lam: float,
    eta: float,
    R: int,
    ball: TreeBall,
    rng,
    n: int,
    tail: str = "cones",
    tol: float = 1e-3,
) -> np.ndarray:
    """Samples of ``sqrt(2) Re(sqrt(eta) sum_x xi_x G_{u x})`` for u in ``ball``.

    ``xi`` is circular complex white noise, which makes the covariance
    exactly ``Im G(lam + i eta)`` on the ball. The sum runs explicitly over
    the ball widened by ``R``. With ``tail="cones"`` every cone hanging off
    that region contributes ``G_{u b} Z`` with ``Z`` circular Gaussian of
    variance equal to the cone's Ward sum, which is exact in law. With
    ``tail="truncate"`` the cones are dropped, and the call fails unless
    their Ward mass is below ``tol`` of every row's total ``Im G_uu / eta``.
    """
    if eta <= 0:
        raise ValueError("pushforward needs eta > 0")
    if ball.shape is None:
        raise ValueError("ball must carry its shape")
    cg = solve_fixed_point(d, complex(lam, eta))
    region = build_ball(d, ball.root_type, ball.shape.widened(R))
    idx = ball.embed_into(region)
    Gu = ball_greens(cg, region).matrix[idx]
    T = cone_ward_sums(cg)
    cs = cg.system
    hang = np.zeros(region.n)
    for b, out in enumerate(region.outside):
        for t, cnt in enumerate(out):
            if cnt:
                hang[b] += cnt * T[cs.index(region.types[b], t)]
    if tail == "truncate":
        tail_mass = (np.abs(Gu) ** 2) @ hang
        total = np.diag(Gu[:, idx]).imag / eta
        worst = float(np.max(tail_mass / total))
        if worst >= tol:
            raise TruncationError(
                f"Ward tail fraction {worst:.3g} >= {tol:g} at R={R}; increase R"
            )
        cols = Gu
    elif tail == "cones":
        cols = np.hstack([Gu, Gu * np.sqrt(hang)])
    else:
        raise ValueError(f"unknown tail mode {tail!r}")
    xi = _circular(rng, (n, cols.shape[1]))
    Y = np.sqrt(eta) * (xi @ cols.T)
    return np.sqrt(2.0) * Y.real


def interior_residual(samples: np.ndarray, ball: TreeBall, lam: float) -> float:
    """``max |lam phi_u - sum_{v~u} phi_v|`` over interior vertices."""
    inner = list(ball.interior)
    if not inner:
        return 0.0
    A = ball.adjacency()
    r = samples @ (lam * np.eye(ball.n) - A)[:, inner]
    return float(np.max(np.abs(r)))


def dump_samples(path: str | Path, samples: np.ndarray) -> None:
    """Rows are samples, columns the ball's canonical coordinates."""
    path = Path(path)
    if path.suffix == ".npy":
        np.save(path, samples)
    else:
        np.savetxt(path, samples, delimiter=",")
