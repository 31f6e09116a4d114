from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import multivariate_normal

from conewave.cover import Shape, build_ball
from conewave.stats import (
    AtomicMeasure,
    delta_k_estimate,
    differential_entropy_knn,
    discretized_entropy,
    gaussian_delta_k,
    gaussian_entropy,
    levy_prokhorov,
    pi_basis,
    wave_delta_k,
    xi_k,
)
from conewave.stats.entropy import _shapes
from conewave.wave import sample_wave_factor, wave_covariance

import oracles


# --- Levy-Prokhorov ---------------------------------------------------------


def test_lp_point_masses():
    assert levy_prokhorov([[0.0]], [[0.3]]).value == 0.3
    assert levy_prokhorov([[0.0]], [[5.0]]).value == 1.0


def test_lp_self_distance_zero():
    x = np.random.default_rng(0).standard_normal((50, 2))
    assert levy_prokhorov(x, x).value == 0.0


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(0, 6), min_size=1, max_size=5), st.lists(st.integers(0, 6), min_size=1, max_size=5))
def test_lp_matches_bruteforce_grid(a, b):
    P = [[x / 4] for x in a]
    Q = [[y / 4] for y in b]
    Pw = [Fraction(1, len(a))] * len(a)
    Qw = [Fraction(1, len(b))] * len(b)
    # merge duplicates the same way for the oracle
    mP = AtomicMeasure.empirical(P)
    mQ = AtomicMeasure.empirical(Q)
    want = oracles.lp_bruteforce(mP.points, list(mP.weights), mQ.points, list(mQ.weights))
    assert levy_prokhorov(mP, mQ).value == want
    assert want == oracles.lp_bruteforce(P, Pw, Q, Qw)


def test_lp_groups_are_disjoint():
    P = AtomicMeasure.empirical([[0.0], [0.0]], groups=[0, 1])
    Q = AtomicMeasure.empirical([[0.0], [0.0]], groups=[1, 1])
    # half of P sits in group 0, where Q has nothing
    assert levy_prokhorov(P, Q).value == 0.5


def test_xi_of_scaled_wave_is_small(d3):
    wm = wave_covariance(d3, 1.0, build_ball(d3, 0, Shape.ball(0)))
    rng = np.random.default_rng(4)
    proc = {0: sample_wave_factor(wm, rng, 400) / np.sqrt(wm.variance)}
    wave = {0: sample_wave_factor(wm, rng, 400)}
    rep = xi_k(proc, wave, {0: Fraction(1)}, wm.variance)
    assert rep.value <= 0.1
    assert abs(rep.sigma - wm.variance**-0.5) < 0.2 * wm.variance**-0.5
    with pytest.raises(ValueError):
        xi_k(proc, wave, {0: 1}, wm.variance, sigma_grid=[0, 10])


# --- projection and entropy ----------------------------------------------------


def test_pi_basis_dimension(d3, d32):
    for d in (d3, d32):
        for t in range(d.k):
            ball = build_ball(d, t, Shape.star(1))
            B = pi_basis(ball, 1.0)
            assert B.dim == len(ball.boundary)
            assert np.allclose(B.chi.T @ B.chi, np.eye(B.dim))


def test_gaussian_entropy_closed_form():
    rng = np.random.default_rng(5)
    M = rng.standard_normal((4, 4))
    S = M @ M.T + np.eye(4)
    assert abs(gaussian_entropy(S) - multivariate_normal(cov=S).entropy()) < 1e-12


def test_knn_entropy_gaussian():
    rng = np.random.default_rng(6)
    S = np.array([[2.0, 0.5], [0.5, 1.0]])
    X = rng.multivariate_normal([0, 0], S, 20000)
    est = differential_entropy_knn(X, rng=rng)
    assert abs(est.value - gaussian_entropy(S)) < 5 * est.se + 0.02
    with pytest.raises(ValueError):
        differential_entropy_knn(np.ones((200, 2)))


def test_discretized_entropy_uniform():
    # uniform on a 3x3 grid of cells: plug-in entropy log 9
    pts = np.array([[i + 0.5, j + 0.5] for i in range(3) for j in range(3)] * 100)
    est = discretized_entropy(pts, None, 1.0)
    assert abs(est.diagnostics["plugin"] - np.log(9)) < 1e-12
    assert abs(est.value - np.log(9) - 8 / 1800) < 1e-12


def test_delta_rotation_invariant(d32):
    a = gaussian_delta_k(d32, 1.0, 0.1, 1).value
    b = gaussian_delta_k(d32, 1.0, 0.1, 1, rng=np.random.default_rng(7)).value
    assert abs(a - b) < 1e-9


def test_delta_limit_small(d3):
    assert abs(gaussian_delta_k(d3, 1.0, 1e-6, 1).value) < 1e-5


def test_wave_samples_delta_near_zero(d3):
    rng = np.random.default_rng(8)
    star_s, edge_s = _shapes(d3, 0)
    draw = lambda t, s: sample_wave_factor(wave_covariance(d3, 1.0, build_ball(d3, t, s)), rng, 20000)
    star = {t: draw(t, s) for t, s in star_s.items()}
    edges = {e: draw(e[0], s) for e, s in edge_s.items()}
    rep = delta_k_estimate(d3, 1.0, 0, star, edges, rng=rng)
    assert abs(rep.reference - wave_delta_k(d3, 1.0, 0)) < 1e-12
    assert abs(rep.value) < 0.05
    with pytest.raises(ValueError):
        delta_k_estimate(d3, 1.0, 0, star, edges, bases="identity")


def test_lp_self_distance_root_marginal(d3):
    wm = wave_covariance(d3, 1.0, build_ball(d3, 0, Shape.ball(0)))
    rng = np.random.default_rng(9)
    r = levy_prokhorov(sample_wave_factor(wm, rng, 10_000), sample_wave_factor(wm, rng, 10_000))
    assert r.exact and r.value <= 0.05


@pytest.mark.parametrize(
    "draw, want",
    [
        (lambda rng: rng.standard_normal((100_000, 2)), np.log(2 * np.pi * np.e)),
        (lambda rng: rng.random((100_000, 1)), 0.0),
    ],
)
def test_knn_examples(draw, want):
    rng = np.random.default_rng(10)
    assert abs(differential_entropy_knn(draw(rng), rng=rng).value - want) < 0.05
