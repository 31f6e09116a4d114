"""Orthonormal bases of the intrinsic subspace of an eigenvector process on a
ball: vectors orthogonal to ``lam delta_u - sum_{v~u} delta_v`` for every
interior vertex u."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
from scipy.stats import ortho_group

from ..cover import TreeBall


@dataclass(frozen=True)
class ProjectionBasis:
    ball: TreeBall
    lam: float
    chi: np.ndarray  # (|ball|, |boundary|), orthonormal columns

    @property
    def dim(self) -> int:
        return self.chi.shape[1]

    def project(self, samples: np.ndarray) -> np.ndarray:
        return np.asarray(samples) @ self.chi

    def restrict(self, cov: np.ndarray) -> np.ndarray:
        return self.chi.T @ cov @ self.chi


def constraint_vectors(ball: TreeBall, lam: float) -> np.ndarray:
    """Rows ``lam e_u - A e_u`` for interior u."""
    inner = list(ball.interior)
    A = ball.adjacency()
    return (lam * np.eye(ball.n) - A)[inner]


def pi_basis(ball: TreeBall, lam: float, rng=None) -> ProjectionBasis:
    """Orthonormal complement of the interior constraint vectors.

    With ``rng`` the basis is rotated by a uniform random orthogonal matrix,
    which must leave every entropy computed from it unchanged.
    """
    C = constraint_vectors(ball, lam)
    chi = np.eye(ball.n) if len(C) == 0 else sla.null_space(C)
    if rng is not None and chi.shape[1] > 1:
        chi = chi @ ortho_group.rvs(chi.shape[1], random_state=rng)
    return ProjectionBasis(ball, float(lam), chi)
