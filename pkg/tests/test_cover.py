import numpy as np
import pytest

from conewave.cover import (
    Shape,
    TreeBall,
    boundary_balance,
    build_ball,
    cone_types,
    local_ball_from_graph,
    sphere_sizes,
)
from conewave.graphgen import sample_graph

import oracles


def test_cone_types(d32):
    ct = {c.entry: c.child_counts for c in cone_types(d32)}
    assert ct == {(0, 1): (1, 0), (1, 0): (0, 2)}


def test_regular_ball_sizes(d3):
    assert build_ball(d3, 0, Shape.ball(1)).n == 4
    b = build_ball(d3, 0, Shape.star(1))
    assert b.n == 10 and len(b.boundary) == 6
    e = build_ball(d3, 0, Shape.edge(0))
    assert e.n == 2 and len(e.boundary) == 2
    assert len(build_ball(d3, 0, Shape.edge(0, 1)).boundary) == 4


def test_sphere_sizes_match_literal_tree(d32):
    for t in range(2):
        _, _, level = oracles.literal_tree([[0, 3], [2, 0]], t, 6)
        assert sphere_sizes(d32, t, 6) == np.bincount(level).tolist()


def test_ball_matches_literal_tree(d32):
    ball = build_ball(d32, 1, Shape.ball(4))
    A, types, _ = oracles.literal_tree([[0, 3], [2, 0]], 1, 4)
    assert ball.n == len(types)
    # same spectrum certifies the same tree
    assert np.allclose(np.linalg.eigvalsh(ball.adjacency()), np.linalg.eigvalsh(A))
    assert sorted(ball.types) == sorted(types.tolist())


def test_edge_shape_requires_neighbor(d32):
    with pytest.raises(ValueError):
        build_ball(d32, 0, Shape.edge(0))


def test_nesting_and_path(d3):
    small = build_ball(d3, 0, Shape.star(0))
    big = build_ball(d3, 0, Shape.star(2))
    idx = small.embed_into(big)
    assert idx[0] == 0
    leaf = big.n - 1
    p = big.path(leaf, 1)
    assert p[0] == leaf and p[-1] == 1
    assert all(big.adjacency()[a, b] == 1 for a, b in zip(p, p[1:]))


def test_json_roundtrip(d32):
    b = build_ball(d32, 0, Shape.edge(1, 1))
    assert TreeBall.from_json(b.to_json()) == b


@pytest.mark.parametrize("k", [0, 1, 2])
def test_boundary_balance(k, d3, d32):
    for d in (d3, d32):
        star, edges = boundary_balance(d, k)
        assert star == edges


def test_local_ball_from_graph(d3):
    g = sample_graph(d3, 200, seed=1)
    adj = g.adj
    rng = np.random.default_rng(0)
    got = 0
    for root in range(50):
        res = local_ball_from_graph(adj, g.types, root, Shape.ball(2), rng)
        if res is None:
            continue
        ball, vmap = res
        got += 1
        assert ball.types == build_ball(d3, 0, Shape.ball(2)).types
        A = g.adjacency()[np.ix_(vmap, vmap)]
        assert np.array_equal(A, ball.adjacency())
    assert got > 30


def test_local_ball_rejects_cycles():
    # triangle with pendant structure: every radius-1 ball around 0 sees an extra edge
    adj = [[1, 2, 3], [0, 2, 3], [0, 1, 3], [0, 1, 2]]
    assert local_ball_from_graph(adj, [0] * 4, 0, Shape.ball(1)) is None
