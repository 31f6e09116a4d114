"""Finite pieces of the universal cover: cone types, tree balls and the
canonical coordinates used to compare labelings across roots.

Vertices of a :class:`TreeBall` are stored in BFS order from the root; each
vertex's children are listed with the designated edge neighbor (if any)
first, then by type, so two balls with the same typed shape index their
vertices identically up to permutations of equal-type siblings.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .degmat import DegreeMatrix


@dataclass(frozen=True)
class ConeType:
    entry: tuple[int, int]
    child_counts: tuple[int, ...]

    @property
    def n_children(self) -> int:
        return sum(self.child_counts)


def child_counts(d: DegreeMatrix, t: int, parent_type: int | None) -> tuple[int, ...]:
    row = list(d.entries[t])
    if parent_type is not None:
        row[parent_type] -= 1
    return tuple(row)


def cone_types(d: DegreeMatrix) -> list[ConeType]:
    """One cone per ordered pair ``(i, j)`` with ``d[i][j] > 0``; the cone is
    rooted at a type-j vertex whose parent has type i."""
    return [
        ConeType((i, j), child_counts(d, j, i))
        for i in range(d.k)
        for j in range(d.k)
        if d[i, j] > 0
    ]


@dataclass(frozen=True)
class Shape:
    """``ball``: B_k(o).  ``star``: B_k(C_o) = B_{k+1}(o).  ``edge``: B_k(e_oi)
    with i the first neighbor of type ``neighbor_type``."""

    kind: str
    k: int = 0
    neighbor_type: int | None = None

    def __post_init__(self):
        if self.kind not in ("ball", "star", "edge"):
            raise ValueError(f"unknown shape kind {self.kind!r}")
        if self.k < 0:
            raise ValueError("shape radius must be nonnegative")
        if (self.kind == "edge") != (self.neighbor_type is not None):
            raise ValueError("edge shapes (and only edge shapes) need a neighbor type")

    @classmethod
    def ball(cls, k: int) -> "Shape":
        return cls("ball", k)

    @classmethod
    def star(cls, k: int = 0) -> "Shape":
        return cls("star", k)

    @classmethod
    def edge(cls, neighbor_type: int, k: int = 0) -> "Shape":
        return cls("edge", k, neighbor_type)

    def widened(self, r: int) -> "Shape":
        return Shape(self.kind, self.k + r, self.neighbor_type)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "k": self.k, "neighbor_type": self.neighbor_type}

    def __str__(self) -> str:
        if self.kind == "ball":
            return f"B_{self.k}(o)"
        if self.kind == "star":
            return f"B_{self.k}(C_o)"
        return f"B_{self.k}(e_o[{self.neighbor_type}])"


def _root_child_budget(shape: Shape, designated: bool) -> int:
    if shape.kind == "star" or designated:
        return shape.k
    return shape.k - 1


@dataclass(frozen=True)
class TreeBall:
    root_type: int
    shape: Shape | None
    types: tuple[int, ...]
    parents: tuple[int, ...]
    boundary: tuple[int, ...]
    # outside[v][t]: number of type-t neighbors of v not in the ball
    outside: tuple[tuple[int, ...], ...] | None = field(default=None, compare=False)

    @property
    def n(self) -> int:
        return len(self.types)

    @property
    def children(self) -> list[list[int]]:
        ch: list[list[int]] = [[] for _ in range(self.n)]
        for v, p in enumerate(self.parents):
            if p >= 0:
                ch[p].append(v)
        return ch

    @property
    def edges(self) -> list[tuple[int, int]]:
        return [(p, v) for v, p in enumerate(self.parents) if p >= 0]

    @property
    def interior(self) -> tuple[int, ...]:
        b = set(self.boundary)
        return tuple(v for v in range(self.n) if v not in b)

    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.n, self.n))
        for p, v in self.edges:
            a[p, v] = a[v, p] = 1.0
        return a

    def depths(self) -> np.ndarray:
        dep = np.zeros(self.n, dtype=int)
        for v, p in enumerate(self.parents):
            if p >= 0:
                dep[v] = dep[p] + 1
        return dep

    def addresses(self) -> list[tuple[int, ...]]:
        """Child-rank path from the root to every vertex."""
        ch = self.children
        addr: list[tuple[int, ...]] = [()] * self.n
        for p in range(self.n):
            for r, v in enumerate(ch[p]):
                addr[v] = addr[p] + (r,)
        return addr

    def embed_into(self, bigger: "TreeBall") -> np.ndarray:
        """Indices of this ball's vertices inside a ball grown from the same root."""
        where = {a: i for i, a in enumerate(bigger.addresses())}
        idx = np.array([where[a] for a in self.addresses()])
        if tuple(bigger.types[i] for i in idx) != self.types:
            raise ValueError("balls are not nested")
        return idx

    def path(self, x: int, y: int) -> list[int]:
        """Vertices on the tree path from x to y (inclusive)."""
        up_x = [x]
        while self.parents[up_x[-1]] >= 0:
            up_x.append(self.parents[up_x[-1]])
        pos = {v: i for i, v in enumerate(up_x)}
        up_y = [y]
        while up_y[-1] not in pos:
            up_y.append(self.parents[up_y[-1]])
        meet = up_y[-1]
        return up_x[: pos[meet] + 1] + up_y[-2::-1]

    def to_json(self) -> str:
        return json.dumps(
            {
                "root_type": self.root_type,
                "shape": None if self.shape is None else self.shape.to_dict(),
                "types": list(self.types),
                "parents": list(self.parents),
                "boundary": list(self.boundary),
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "TreeBall":
        data = json.loads(text)
        shape = data.get("shape")
        return cls(
            root_type=data["root_type"],
            shape=None if shape is None else Shape(**shape),
            types=tuple(data["types"]),
            parents=tuple(data["parents"]),
            boundary=tuple(data["boundary"]),
        )


def build_ball(d: DegreeMatrix, root_type: int, shape: Shape) -> TreeBall:
    """Truncation of the universal cover around a root of ``root_type``."""
    if not 0 <= root_type < d.k:
        raise ValueError(f"root type {root_type} out of range")
    if shape.kind == "edge" and not (
        0 <= shape.neighbor_type < d.k and d[root_type, shape.neighbor_type] > 0
    ):
        raise ValueError(
            f"type {root_type} has no neighbor of type {shape.neighbor_type}: invalid edge shape"
        )
    types = [root_type]
    parents = [-1]
    budgets = [None]
    outside: list[list[int]] = []
    queue = deque([0])
    while queue:
        v = queue.popleft()
        t = types[v]
        p = parents[v]
        counts = child_counts(d, t, None if p < 0 else types[p])
        kids = [c for c in range(d.k) for _ in range(counts[c])]
        if p < 0 and shape.kind == "edge":
            kids.remove(shape.neighbor_type)
            kids.insert(0, shape.neighbor_type)
        out = [0] * d.k
        for r, c in enumerate(kids):
            if p < 0:
                b = _root_child_budget(shape, designated=(shape.kind == "edge" and r == 0))
            else:
                b = budgets[v] - 1
            if b < 0:
                out[c] += 1
                continue
            types.append(c)
            parents.append(v)
            budgets.append(b)
            queue.append(len(types) - 1)
        outside.append(out)
    boundary = tuple(v for v in range(len(types)) if any(outside[v]))
    return TreeBall(
        root_type=root_type,
        shape=shape,
        types=tuple(types),
        parents=tuple(parents),
        boundary=boundary,
        outside=tuple(tuple(o) for o in outside),
    )


def sphere_sizes(d: DegreeMatrix, root_type: int, radius: int) -> list[int]:
    """|S_o(r)| for r = 0..radius via the cone-growth recursion."""
    level = {(root_type, None): 1}
    sizes = [1]
    for _ in range(radius):
        nxt: dict = {}
        for (t, p), cnt in level.items():
            for c, m in enumerate(child_counts(d, t, p)):
                if m:
                    nxt[(c, t)] = nxt.get((c, t), 0) + cnt * m
        level = nxt
        sizes.append(sum(level.values()))
    return sizes


def boundary_balance(d: DegreeMatrix, k: int) -> tuple[Fraction, Fraction]:
    """``(E_o |∂B_k(C_o)|, ½ E_o Σ_{i~o} |∂B_k(e_oi)|)`` with exact q weights.

    The two agree, which is what makes the per-shape dimension terms cancel
    in the star-minus-half-edges entropy balance. The equality holds in
    expectation over the root type, not root by root.
    """
    star = Fraction(0)
    edges = Fraction(0)
    for t in range(d.k):
        star += d.q[t] * len(build_ball(d, t, Shape.star(k)).boundary)
        for j in range(d.k):
            if d[t, j]:
                nb = len(build_ball(d, t, Shape.edge(j, k)).boundary)
                edges += d.q[t] * Fraction(d[t, j] * nb, 2)
    return star, edges


def local_ball_from_graph(
    adj: list[list[int]],
    types,
    root: int,
    shape: Shape,
    rng: np.random.Generator | None = None,
    neighbor: int | None = None,
) -> tuple[TreeBall, np.ndarray] | None:
    """Canonically indexed neighborhood of ``root`` in a finite graph.

    ``adj`` lists neighbors with multiplicity. Returns ``(ball, vertex_map)``
    where ``vertex_map[i]`` is the graph vertex at ball index i, or ``None``
    when the induced neighborhood is not a tree. Equal-type siblings are
    ordered by ``rng`` (deterministic order when ``rng`` is None).
    """
    if shape.kind == "edge":
        if neighbor is None or neighbor not in adj[root]:
            raise ValueError("edge shapes need a neighbor of the root")
    types = np.asarray(types)
    order = [root]
    parents = [-1]
    budgets = [None]
    seen = {root: 0}
    queue = deque([0])
    while queue:
        v = queue.popleft()
        gv = order[v]
        nbrs = list(adj[gv])
        if parents[v] >= 0:
            gp = order[parents[v]]
            if nbrs.count(gp) != 1:
                return None
            nbrs.remove(gp)
        if gv in nbrs:
            return None
        if rng is not None:
            nbrs = [nbrs[i] for i in rng.permutation(len(nbrs))]
        nbrs.sort(key=lambda u: types[u])
        if parents[v] < 0 and shape.kind == "edge":
            nbrs.remove(neighbor)
            nbrs.insert(0, neighbor)
        for r, u in enumerate(nbrs):
            if parents[v] < 0:
                b = _root_child_budget(shape, designated=(shape.kind == "edge" and r == 0))
            else:
                b = budgets[v] - 1
            if b < 0:
                continue
            if u in seen:
                return None
            seen[u] = len(order)
            order.append(u)
            parents.append(v)
            budgets.append(b)
            queue.append(len(order) - 1)
    # induced subgraph must have no extra edges between ball vertices
    boundary = []
    for i, gv in enumerate(order):
        inside = [u for u in adj[gv] if u in seen]
        expected = (1 if parents[i] >= 0 else 0) + sum(1 for p in parents if p == i)
        if len(inside) != expected:
            return None
        if len(adj[gv]) > expected:
            boundary.append(i)
    vmap = np.array(order)
    ball = TreeBall(
        root_type=int(types[root]),
        shape=shape,
        types=tuple(int(types[u]) for u in order),
        parents=tuple(parents),
        boundary=tuple(boundary),
    )
    return ball, vmap
