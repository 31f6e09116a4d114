import numpy as np
import pytest

from conewave.cover import Shape, build_ball
from conewave.greens import SpectrumError, ball_greens, solve_fixed_point
from conewave.wave import (
    TruncationError,
    dump_samples,
    interior_residual,
    psd_factor,
    pushforward_covariance,
    sample_wave_factor,
    sample_wave_pushforward,
    wave_covariance,
)


def test_rank_deficient_factor():
    rng = np.random.default_rng(0)
    B = rng.standard_normal((5, 2))
    F = psd_factor(B @ B.T)
    assert F.shape == (5, 2)
    assert np.allclose(F @ F.T, B @ B.T)


def test_wave_rank_is_boundary(d3):
    wm = wave_covariance(d3, 1.0, build_ball(d3, 0, Shape.star(1)))
    assert wm.dim == 10 and wm.rank == 6
    assert abs(wm.variance - wm.cov[0, 0]) < 1e-12


def test_wave_refuses_bad_energies(d32):
    ball = build_ball(d32, 0, Shape.ball(1))
    with pytest.raises(SpectrumError):
        wave_covariance(d32, 0.0, ball)
    with pytest.raises(SpectrumError):
        wave_covariance(d32, 3.0, ball)


def test_factor_samples_solve_interior(d32):
    wm = wave_covariance(d32, 1.0, build_ball(d32, 1, Shape.ball(2)))
    X = sample_wave_factor(wm, np.random.default_rng(1), 1000)
    assert interior_residual(X, wm.ball, 1.0) < 1e-10


def test_pushforward_covariance(d3):
    ball = build_ball(d3, 0, Shape.ball(1))
    eta = 0.2
    X = sample_wave_pushforward(d3, 1.0, eta, 2, ball, np.random.default_rng(2), 40000)
    target = pushforward_covariance(d3, 1.0, eta, ball)
    emp = X.T @ X / len(X)
    se = np.sqrt((target**2 + np.outer(np.diag(target), np.diag(target))) / len(X))
    assert np.all(np.abs(emp - target) < 5 * se)


def test_pushforward_truncation_guard(d3):
    ball = build_ball(d3, 0, Shape.ball(1))
    with pytest.raises(TruncationError):
        sample_wave_pushforward(d3, 1.0, 0.05, 1, ball, np.random.default_rng(3), 10, tail="truncate")
    # the Ward tail halves per generation at eta = 1
    X = sample_wave_pushforward(d3, 1.0, 1.0, 6, ball, np.random.default_rng(3), 10, tail="truncate", tol=1e-2)
    assert X.shape == (10, 4)


def test_pushforward_limit(d3):
    ball = build_ball(d3, 0, Shape.ball(1))
    S0 = wave_covariance(d3, 1.0, ball).cov
    assert np.abs(pushforward_covariance(d3, 1.0, 1e-4, ball) - S0).max() < 1e-3


def test_dump(tmp_path):
    X = np.arange(6.0).reshape(3, 2)
    dump_samples(tmp_path / "x.csv", X)
    dump_samples(tmp_path / "x.npy", X)
    assert np.array_equal(np.loadtxt(tmp_path / "x.csv", delimiter=","), X)
    assert np.array_equal(np.load(tmp_path / "x.npy"), X)
