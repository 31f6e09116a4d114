import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conewave.cover import Shape, build_ball
from conewave.greens import (
    ConeSystem,
    SpectrumError,
    ball_greens,
    biregular_transfer_ratio,
    continue_to_real_axis,
    cone_ward_sums,
    dense_tree_resolvent,
    identity_suite,
    path_coefficient_check,
    solve_fixed_point,
    spectral_scan,
    stieltjes,
    truncated_ball_greens,
    truncated_root_greens,
    ward_row_sums,
)

import oracles


def test_regular_hand_value(d3):
    cg = continue_to_real_axis(d3, 0.0)
    assert not cg.suspect and cg.eta == 0.0
    assert abs(cg.m - 1j * np.sqrt(2) / 3) < 1e-12


@settings(max_examples=40, deadline=None)
@given(st.floats(-4, 4), st.floats(1e-3, 3))
def test_regular_closed_form_off_axis(x, y):
    from conewave.degmat import DegreeMatrix

    z = complex(x, y)
    assert abs(stieltjes(DegreeMatrix([[3]]), z) - oracles.regular_root_greens(3, z)) < 1e-10


def test_kesten_mckay_on_axis(d3):
    xs = np.linspace(-2.7, 2.7, 31)
    got = np.array([continue_to_real_axis(d3, x).m.imag / np.pi for x in xs])
    assert np.max(np.abs(got - oracles.kesten_mckay(3, xs))) < 1e-10


def test_outside_spectrum_is_real(d3):
    cg = continue_to_real_axis(d3, 3.5)
    assert not cg.suspect and abs(cg.m.imag) < 1e-12


def test_system_matrix(d32):
    cs = ConeSystem.of(d32)
    # edge (0,1) enters a type-1 cone with one type-0 child, and vice versa
    e01, e10 = cs.index(0, 1), cs.index(1, 0)
    assert cs.C[e01, e10] == 1 and cs.C[e10, e01] == 2


def test_level_recursion_matches_literal_inverse(d32):
    z = 0.7 + 0.2j
    for t in range(2):
        A, types, _ = oracles.literal_tree([[0, 3], [2, 0]], t, 7)
        G = np.linalg.inv(A - z * np.eye(len(A)))
        assert abs(truncated_root_greens(d32, z, 7)[t] - G[0, 0]) < 1e-13
        assert abs(dense_tree_resolvent(d32, z, t, 7, [0])[0, 0] - G[0, 0]) < 1e-13


def test_ball_greens_matches_truncation_off_axis(d32):
    # at Im z = 0.5 the truncation error decays like 0.7^depth
    z = 1.0 + 0.5j
    cg = solve_fixed_point(d32, z)
    ball = build_ball(d32, 0, Shape.star(1))
    err = np.abs(ball_greens(cg, ball).matrix - truncated_ball_greens(d32, z, ball, 80)).max()
    assert err < 1e-10


def test_ward_identity(d32):
    cg = solve_fixed_point(d32, 0.9 + 0.05j)
    assert np.allclose(0.05 * ward_row_sums(cg), cg.root_values.imag, atol=1e-12)
    assert np.all(cone_ward_sums(cg) > 0)


def test_json(d32):
    cg = continue_to_real_axis(d32, 1.0)
    data = json.loads(cg.to_json())
    assert data["d"] == [[0, 3], [2, 0]] and len(data["g"]) == 2


def test_scan_biregular(d32):
    grid = np.round(np.arange(-3, 3.0005, 0.01), 10)
    scan = spectral_scan(d32, grid)
    assert scan.suspects == [0.0]
    assert abs(scan.atoms[0.0] - 0.2) < 1e-4
    lo, hi = oracles.biregular_support(3, 2)
    iv = scan.support_intervals()
    assert len(iv) == 2
    assert abs(iv[1][0] - lo) < 0.02 and abs(iv[1][1] - hi) < 0.02
    assert abs(scan.integral + 0.2 - 1) < 5e-3
    assert "lambda,re_m,im_m,rho,flag" in scan.to_csv().splitlines()[0]


def test_identity_suite_dense(d3):
    cg = continue_to_real_axis(d3, 1.0)
    res = identity_suite(cg, build_ball(d3, 0, Shape.ball(1)), eta=1e-2)
    for key in ("dense_schur", "dense_walk", "dense_factor", "dense_ward", "dense_reexpansion"):
        assert res[key] < 1e-10, key
    assert res["cone_ward"] < 1e-10


def test_path_products(d3, d32):
    assert path_coefficient_check(continue_to_real_axis(d32, 1.0), (0, 1, 0)).product == pytest.approx(2**-0.5, abs=1e-9)
    assert path_coefficient_check(continue_to_real_axis(d3, 1.0), (0, 0, 0)).product == pytest.approx(0.5, abs=1e-9)
    with pytest.raises(SpectrumError):
        path_coefficient_check(continue_to_real_axis(d3, 3.5), (0, 0, 0))
    with pytest.raises(ValueError):
        path_coefficient_check(continue_to_real_axis(d32, 1.0), (0, 1))


@pytest.mark.parametrize("k", [1, 2, 3, 4])
@pytest.mark.parametrize("root", [0, 1])
def test_transfer_matches_greens_ratio(d32, k, root):
    lam = 1.3
    cg = continue_to_real_axis(d32, lam)
    ball = build_ball(d32, root, Shape.ball(k))
    S = ball_greens(cg, ball).im_part
    v = int(np.flatnonzero(ball.depths() == k)[0])
    degs = (3, 2) if root == 0 else (2, 3)
    assert abs(biregular_transfer_ratio(*degs, lam, k) - S[0, v] / S[0, 0]) < 1e-10


def test_transfer_outside_band():
    with pytest.raises(SpectrumError):
        biregular_transfer_ratio(3, 2, 3.0, 1)
