"""Green's functions of trees of finite cone type.

The cone values ``g_e`` for directed edge types ``e = (i, j)`` solve

    g_ij = 1 / (-z - sum_l c_ijl g_jl),   c_ijl = d_jl - [l == i],

and every entry of ``(A - z)^{-1}`` on the universal cover follows from them:
diagonal entries through the root recursion, off-diagonal entries through
products of ``-g`` along the tree path.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .cover import Shape, TreeBall, build_ball
from .degmat import DegreeMatrix

DEFAULT_SCHEDULE = np.geomspace(1.0, 1e-7, 57)
POLE_SCALE = 1e-4  # eta * |g| above this means g ~ 1/eta
POLE_ABS = 1e6


class ConvergenceError(RuntimeError):
    pass


class SpectrumError(ValueError):
    """Raised when an operation's spectral precondition fails."""


# ---------------------------------------------------------------------------
# cone system


@dataclass(frozen=True)
class ConeSystem:
    d: DegreeMatrix
    edges: tuple[tuple[int, int], ...]
    C: np.ndarray  # C[e, f] = c_{e f} for f starting where e ends
    root_rows: np.ndarray  # root_rows[t, e] = d_tj when e = (t, j)

    @classmethod
    def of(cls, d: DegreeMatrix) -> "ConeSystem":
        edges = tuple((i, j) for i in range(d.k) for j in range(d.k) if d[i, j] > 0)
        idx = {e: n for n, e in enumerate(edges)}
        C = np.zeros((len(edges), len(edges)))
        R = np.zeros((d.k, len(edges)))
        for (i, j), a in idx.items():
            for l in range(d.k):
                c = d[j, l] - (l == i)
                if c > 0:
                    C[a, idx[(j, l)]] = c
            R[i, a] = d[i, j]
        return cls(d, edges, C, R)

    def index(self, i: int, j: int) -> int:
        return self.edges.index((i, j))

    def step(self, g: np.ndarray, z: complex) -> np.ndarray:
        return 1.0 / (-z - self.C @ g)

    def residual(self, g: np.ndarray, z: complex) -> float:
        with np.errstate(all="ignore"):
            r = np.max(np.abs(g - self.step(g, z)))
        return float(r) if np.isfinite(r) else np.inf

    def roots(self, g: np.ndarray, z: complex) -> np.ndarray:
        return 1.0 / (-z - self.root_rows @ g)


def _newton(cs: ConeSystem, g: np.ndarray, z: complex, tol: float, max_iter: int):
    """Newton on R(g) = g (-z - C g) - 1, which has the fixed points as roots
    and stays well conditioned where plain iteration is neutral."""
    g = g.astype(complex)
    n = len(g)
    for it in range(1, max_iter + 1):
        s = -z - cs.C @ g
        R = g * s - 1.0
        J = np.diag(s) - g[:, None] * cs.C
        try:
            dg = np.linalg.solve(J, R)
        except np.linalg.LinAlgError:
            return g, it, False
        g = g - dg
        if not np.all(np.isfinite(g)):
            return g, it, False
        scale = max(1.0, float(np.max(np.abs(g))))
        if np.max(np.abs(dg)) <= tol * scale:
            return g, it, cs.residual(g, z) <= 100 * tol * scale * scale or n == 0
    return g, max_iter, False


def _on_branch(g: np.ndarray) -> bool:
    return bool(np.all(g.imag >= -1e-12 * np.maximum(1.0, np.abs(g))))


@dataclass
class ConeGreens:
    d: DegreeMatrix
    z: complex
    g: np.ndarray
    eta: float  # imaginary part at which g was last solved (0 after polishing)
    residual: float
    iterations: int
    converged: bool = True
    suspect: bool = False
    reason: str = ""
    system: ConeSystem = field(default=None, repr=False)

    def __post_init__(self):
        if self.system is None:
            self.system = ConeSystem.of(self.d)

    @property
    def edges(self):
        return self.system.edges

    def value(self, i: int, j: int) -> complex:
        return complex(self.g[self.system.index(i, j)])

    @property
    def root_values(self) -> np.ndarray:
        return self.system.roots(self.g, self.z)

    @property
    def m(self) -> complex:
        q = np.array([float(x) for x in self.d.q])
        return complex(q @ self.root_values)

    def to_dict(self) -> dict:
        return {
            "d": [list(r) for r in self.d.entries],
            "z": [self.z.real, self.z.imag],
            "eta": self.eta,
            "edges": [list(e) for e in self.edges],
            "g": [[c.real, c.imag] for c in self.g],
            "root_values": [[c.real, c.imag] for c in self.root_values],
            "residual": self.residual,
            "iterations": self.iterations,
            "converged": self.converged,
            "suspect": self.suspect,
            "reason": self.reason,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def solve_fixed_point(
    d: DegreeMatrix,
    z: complex,
    g0: np.ndarray | None = None,
    tol: float = 1e-13,
    damping: float = 0.5,
    max_iter: int = 20000,
) -> ConeGreens:
    """Cone values at ``z``.

    For ``Im z > 0`` runs damped iteration (contracting there) and finishes
    with Newton. Real ``z`` is delegated to :func:`continue_to_real_axis`.
    """
    z = complex(z)
    if z.imag < 0:
        raise ValueError("need Im z >= 0")
    if z.imag == 0 and g0 is None:
        return continue_to_real_axis(d, z.real)
    cs = ConeSystem.of(d)
    g = np.full(len(cs.edges), -1.0 / z if z != 0 else 1j, dtype=complex) if g0 is None else np.array(g0, complex)
    its = 0
    if g0 is None:
        for its in range(1, max_iter + 1):
            new = (1 - damping) * g + damping * cs.step(g, z)
            delta = np.max(np.abs(new - g))
            g = new
            if delta < 1e-6:
                break
    g, nits, ok = _newton(cs, g, z, tol, 60)
    res = cs.residual(g, z)
    ok = ok and (z.imag == 0 or _on_branch(g))
    return ConeGreens(d, z, g, z.imag, res, its + nits, converged=ok, system=cs)


def continue_to_real_axis(
    d: DegreeMatrix,
    lam: float,
    schedule=None,
    max_subdiv: int = 12,
    polish: bool = True,
) -> ConeGreens:
    """Follow the physical branch from ``lam + i`` down to ``lam + i*eta_min``
    with warm starts, extrapolate the last three points to ``eta = 0`` and
    polish the limit with Newton on the real axis.

    The result is flagged ``suspect`` when the branch is lost, when
    continuation stalls, or when the cone values grow like ``1/eta``.
    """
    lam = float(lam)
    etas = list(DEFAULT_SCHEDULE if schedule is None else schedule)
    cs = ConeSystem.of(d)
    first = solve_fixed_point(d, lam + 1j * etas[0])
    g = first.g
    its = first.iterations
    hist: list[tuple[float, np.ndarray]] = [(etas[0], g)]
    reasons = []
    eta_prev = etas[0]
    for eta in etas[1:]:
        targets = [eta]
        depth = 0
        while targets:
            e = targets[0]
            gn, nits, ok = _newton(cs, g, lam + 1j * e, 1e-14, 40)
            its += nits
            if ok and _on_branch(gn):
                g = gn
                hist.append((e, g))
                eta_prev = e
                targets.pop(0)
                continue
            depth += 1
            if depth > max_subdiv:
                reasons.append(f"continuation failed near eta={e:.3g}")
                break
            targets.insert(0, float(np.sqrt(eta_prev * e)))
        if reasons:
            break

    eta_min, g_min = hist[-1]
    gmax = float(np.max(np.abs(g_min)))
    if gmax > POLE_ABS or eta_min * gmax > POLE_SCALE:
        reasons.append(f"cone values grow like 1/eta (eta*|g| = {eta_min * gmax:.3g})")

    out = ConeGreens(d, complex(lam + 1j * eta_min), g_min, eta_min, cs.residual(g_min, lam + 1j * eta_min), its, system=cs)
    if reasons or not polish or len(hist) < 3:
        out.suspect = bool(reasons)
        out.reason = "; ".join(reasons)
        return out

    (e1, g1), (e2, g2), (e3, g3) = hist[-3:]
    # Lagrange interpolation through the last three etas, evaluated at 0
    l1 = e2 * e3 / ((e1 - e2) * (e1 - e3))
    l2 = e1 * e3 / ((e2 - e1) * (e2 - e3))
    l3 = e1 * e2 / ((e3 - e1) * (e3 - e2))
    g_ext = l1 * g1 + l2 * g2 + l3 * g3
    gp, nits, ok = _newton(cs, g_ext, complex(lam), 1e-15, 40)
    its += nits
    if ok and _on_branch(gp) and np.max(np.abs(gp - g_min)) < 1e-3 * max(1.0, gmax):
        gp = gp.real + 1j * np.maximum(gp.imag, 0.0)
        out = ConeGreens(d, complex(lam), gp, 0.0, cs.residual(gp, complex(lam)), its, system=cs)
    elif cs.residual(g_ext, complex(lam)) < 1e-9 and _on_branch(g_ext):
        # singular Jacobian on the real axis (e.g. a bipartite symmetry
        # point); the extrapolated limit already solves the recursion
        out = ConeGreens(d, complex(lam), g_ext, 0.0, cs.residual(g_ext, complex(lam)), its, system=cs)
    else:
        out = ConeGreens(d, complex(lam), g_ext, eta_min, cs.residual(g_ext, complex(lam)), its, converged=False, system=cs)
        reasons.append("real-axis limit did not polish")
    m = out.m
    if m.imag > 1e-8 and np.min(out.g.imag) < 1e-10 * max(1.0, float(np.max(np.abs(out.g)))):
        reasons.append("Im g vanishes inside the spectrum")
    out.suspect = bool(reasons)
    out.reason = "; ".join(reasons)
    return out


def stieltjes(d: DegreeMatrix, z: complex) -> complex:
    """``m(z) = sum_i q_i G_oo(z; type i)``; real ``z`` means ``z + i0``."""
    z = complex(z)
    cg = solve_fixed_point(d, z) if z.imag > 0 else continue_to_real_axis(d, z.real)
    return cg.m


# ---------------------------------------------------------------------------
# ball-restricted Green's matrices


@dataclass
class BallGreens:
    ball: TreeBall
    z: complex
    matrix: np.ndarray

    @property
    def im_part(self) -> np.ndarray:
        im = self.matrix.imag
        return 0.5 * (im + im.T)


def _path_factors(cg: ConeGreens, ball: TreeBall) -> np.ndarray:
    """``-g`` for the edge from each vertex's parent into it (1 at the root)."""
    cs = cg.system
    f = np.ones(ball.n, dtype=complex)
    for v, p in enumerate(ball.parents):
        if p >= 0:
            f[v] = -cg.g[cs.index(ball.types[p], ball.types[v])]
    return f


def ball_greens(cg: ConeGreens, ball: TreeBall) -> BallGreens:
    """Entries ``G_xy`` of the cover's resolvent for x, y in the ball.

    ``G_xy = G_xx * prod(-g)`` along the directed path x -> y, where each
    factor is the cone value of the edge type traversed.
    """
    cs = cg.system
    roots = cg.root_values
    n = ball.n
    G = np.zeros((n, n), dtype=complex)
    children = ball.children
    for x in range(n):
        # BFS from x over the ball, treating it as an undirected tree
        row = G[x]
        row[x] = roots[ball.types[x]]
        stack = [x]
        seen = {x}
        while stack:
            u = stack.pop()
            nbrs = list(children[u])
            if ball.parents[u] >= 0:
                nbrs.append(ball.parents[u])
            for w in nbrs:
                if w in seen:
                    continue
                seen.add(w)
                row[w] = -row[u] * cg.g[cs.index(ball.types[u], ball.types[w])]
                stack.append(w)
    return BallGreens(ball, cg.z, G)


def cone_ward_sums(cg: ConeGreens) -> np.ndarray:
    """``T_e = sum over the cone of |prod g|^2`` along paths entering via e.

    Solves ``(I - diag|g|^2 C) T = |g|^2``; finite only for ``Im z > 0``.
    """
    a = np.abs(cg.g) ** 2
    M = np.eye(len(a)) - a[:, None] * cg.system.C
    return np.linalg.solve(M, a)


def ward_row_sums(cg: ConeGreens) -> np.ndarray:
    """``sum_y |G_xy|^2`` over the whole tree for a root of each type."""
    T = cone_ward_sums(cg)
    rv = cg.root_values
    return np.abs(rv) ** 2 * (1.0 + cg.system.root_rows @ T)


# ---------------------------------------------------------------------------
# truncated-tree oracles


def truncated_cone_values(d: DegreeMatrix, z: complex, height: int) -> np.ndarray:
    """Cone values on cones cut off after ``height`` generations.

    Row h holds the values for cones of height h (h = 0: childless vertex).
    This is exact Schur elimination of a finite tree, level by level.
    """
    cs = ConeSystem.of(d)
    out = np.empty((height + 1, len(cs.edges)), dtype=complex)
    out[0] = 1.0 / (-complex(z))
    for h in range(1, height + 1):
        out[h] = cs.step(out[h - 1], z)
    return out


def truncated_root_greens(d: DegreeMatrix, z, depth: int) -> np.ndarray:
    """``G_oo`` on the depth-``depth`` truncation for a root of each type.

    ``z`` may be an array; the result then has shape ``z.shape + (k,)``.
    """
    cs = ConeSystem.of(d)
    z = np.asarray(z, dtype=complex)[..., None]
    if depth == 0:
        return np.broadcast_to(-1.0 / z, z.shape[:-1] + (d.k,)).copy()
    g = np.broadcast_to(-1.0 / z, z.shape[:-1] + (len(cs.edges),))
    CT = cs.C.T
    for _ in range(depth - 1):
        g = 1.0 / (-z - g @ CT)
    return 1.0 / (-z - g @ cs.root_rows.T)


def truncated_stieltjes(d: DegreeMatrix, z, depth: int):
    q = np.array([float(x) for x in d.q])
    out = truncated_root_greens(d, z, depth) @ q
    return complex(out) if np.ndim(out) == 0 else out


def richardson_stieltjes(d: DegreeMatrix, lam, eta: float, depth: int):
    """Truncated-tree ``m`` at ``eta``, ``2 eta``, ``4 eta`` extrapolated
    quadratically to ``eta = 0``."""
    lam = np.asarray(lam, dtype=float)
    m1, m2, m4 = (truncated_stieltjes(d, lam + 1j * s * eta, depth) for s in (1, 2, 4))
    return (8 * m1 - 6 * m2 + m4) / 3


def truncated_ball_greens(d: DegreeMatrix, z: complex, ball: TreeBall, depth: int) -> np.ndarray:
    """Resolvent of the radius-``depth`` truncation around the ball's root,
    restricted to the ball, by Schur complement onto the ball."""
    if ball.outside is None:
        raise ValueError("ball must come from build_ball")
    dep = ball.depths()
    if depth <= dep.max():
        raise ValueError("truncation depth must exceed the ball's depth")
    cs = ConeSystem.of(d)
    tcv = truncated_cone_values(d, z, depth)
    H = ball.adjacency().astype(complex) - complex(z) * np.eye(ball.n)
    for u in range(ball.n):
        h = depth - dep[u] - 1
        for t, cnt in enumerate(ball.outside[u]):
            if cnt:
                H[u, u] -= cnt * tcv[h, cs.index(ball.types[u], t)]
    return np.linalg.inv(H)


def tree_matrix(d: DegreeMatrix, root_type: int, depth: int) -> tuple[TreeBall, sp.csr_matrix]:
    ball = build_ball(d, root_type, Shape.ball(depth))
    rows, cols = zip(*ball.edges) if ball.edges else ((), ())
    A = sp.coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(ball.n, ball.n))
    return ball, (A + A.T).tocsr()


def dense_tree_resolvent(d: DegreeMatrix, z: complex, root_type: int, depth: int, columns=None) -> np.ndarray:
    """Literal inversion of ``A - z`` on a truncated tree (sparse LU).

    Returns the requested columns (all columns by default). Intended for
    small depths, as an independent check of the level recursion.
    """
    ball, A = tree_matrix(d, root_type, depth)
    M = (A - complex(z) * sp.identity(ball.n)).tocsc().astype(complex)
    cols = range(ball.n) if columns is None else columns
    lu = spla.splu(M)
    rhs = np.zeros((ball.n, len(cols)), dtype=complex)
    for n, c in enumerate(cols):
        rhs[c, n] = 1.0
    return lu.solve(rhs)


# ---------------------------------------------------------------------------
# spectral scan


@dataclass
class SpectralScan:
    lam: np.ndarray
    m: np.ndarray
    flags: list[str]
    reasons: list[str]
    suspects: list[float]
    atoms: dict[float, float]

    @property
    def rho(self) -> np.ndarray:
        return self.m.imag / np.pi

    @property
    def integral(self) -> float:
        """Trapezoid integral of the density over non-suspect grid points
        (atoms are reported separately in ``atoms``)."""
        keep = np.array([f != "suspect" for f in self.flags])
        return float(np.trapezoid(self.rho[keep], self.lam[keep]))

    def support_intervals(self) -> list[tuple[float, float]]:
        """Maximal runs of grid points carrying density."""
        out = []
        start = None
        for n, f in enumerate(self.flags):
            if f == "regular":
                if start is None:
                    start = n
            elif start is not None:
                out.append((float(self.lam[start]), float(self.lam[n - 1])))
                start = None
        if start is not None:
            out.append((float(self.lam[start]), float(self.lam[-1])))
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["lambda", "re_m", "im_m", "rho", "flag"])
        for lam, m, f in zip(self.lam, self.m, self.flags):
            w.writerow([f"{lam:.10g}", f"{m.real:.12g}", f"{m.imag:.12g}", f"{m.imag / np.pi:.12g}", f])
        return buf.getvalue()


def _locate_pole(d: DegreeMatrix, a: float, b: float, ga: np.ndarray, gb: np.ndarray, tol: float = 1e-10) -> float:
    """Bisect for a pole of a real Herglotz function between a and b.

    Real cone values increase on gaps, so a drop between two points means a
    pole lies between them.
    """
    cs = ConeSystem.of(d)
    while b - a > tol:
        c = 0.5 * (a + b)
        cg = continue_to_real_axis(d, c)
        if cg.suspect:
            return c
        gc = cg.g.real
        if np.any(gc < ga - 1e-12):
            b, gb = c, gc
        else:
            a, ga = c, gc
    return 0.5 * (a + b)


def atom_mass(d: DegreeMatrix, lam: float, eta: float = 1e-7) -> float:
    """``eta * Im m(lam + i eta)``, the spectral mass sitting at ``lam``."""
    cg = continue_to_real_axis(d, lam, schedule=np.geomspace(1.0, eta, 57), polish=False)
    return float(cg.eta * cg.m.imag)


def spectral_scan(d: DegreeMatrix, lam_grid, im_threshold: float = 1e-9) -> SpectralScan:
    """Classify each grid point as ``outside``, ``regular`` or ``suspect``.

    Suspects are points where continuation flags a degeneracy, plus poles
    found between consecutive outside points by monotonicity of the real
    cone values.
    """
    lam = np.asarray(lam_grid, dtype=float)
    ms = np.empty(len(lam), dtype=complex)
    flags, reasons = [], []
    gs = []
    for n, x in enumerate(lam):
        cg = continue_to_real_axis(d, x)
        ms[n] = cg.m
        gs.append(cg.g)
        if cg.suspect:
            flags.append("suspect")
            reasons.append(cg.reason)
        elif cg.m.imag > im_threshold:
            flags.append("regular")
            reasons.append("")
        else:
            flags.append("outside")
            reasons.append("")
    suspects = [float(x) + 0.0 for x, f in zip(lam, flags) if f == "suspect"]
    for n in range(len(lam) - 1):
        if flags[n] == flags[n + 1] == "outside":
            ga, gb = gs[n].real, gs[n + 1].real
            if np.any(gb < ga - 1e-12):
                suspects.append(float(_locate_pole(d, lam[n], lam[n + 1], ga, gb)) + 0.0)
    suspects.sort()
    atoms = {s: atom_mass(d, s) for s in suspects}
    return SpectralScan(lam, ms, flags, reasons, suspects, atoms)


# ---------------------------------------------------------------------------
# identities


def _delete(G_inv_input: np.ndarray, keep: np.ndarray) -> np.ndarray:
    return np.linalg.inv(G_inv_input[np.ix_(keep, keep)])


def identity_suite(cg: ConeGreens, ball: TreeBall, eta: float, margin: int = 2, depth: int = 24) -> dict:
    """Residuals of the resolvent identities.

    ``dense_*`` entries are evaluated on the literal resolvent of the finite
    tree ``ball`` widened by ``margin``, where they hold exactly. The
    ``cone_vs_truncated`` entry compares cone-derived ball entries with the
    depth-``depth`` truncated tree at the same ``z``.
    """
    d = cg.d
    lam = cg.z.real
    z = complex(lam, eta)
    big = build_ball(d, ball.root_type, ball.shape.widened(margin))
    n = big.n
    H = big.adjacency()
    Hz = H - z * np.eye(n)
    G = np.linalg.inv(Hz)
    inner = ball.embed_into(big)
    x = int(inner[0])
    # a root neighbor inside the ball
    nb = int(inner[1]) if ball.n > 1 else None
    out = {}

    # Schur complement onto the embedded ball
    S = inner
    Sc = np.setdiff1d(np.arange(n), S)
    schur = Hz[np.ix_(S, S)] - Hz[np.ix_(S, Sc)] @ np.linalg.solve(Hz[np.ix_(Sc, Sc)], Hz[np.ix_(Sc, S)])
    out["dense_schur"] = float(np.max(np.abs(np.linalg.inv(schur) - G[np.ix_(S, S)])))

    # walk decomposition: G^{(x)}_yw = G_yw - G_yx G_xw / G_xx
    keep = np.array([v for v in range(n) if v != x])
    Gx = _delete(Hz, keep)
    pred = G[np.ix_(keep, keep)] - np.outer(G[keep, x], G[x, keep]) / G[x, x]
    out["dense_walk"] = float(np.max(np.abs(Gx - pred)))

    # factor formula: G_xy = -G_xx sum_w H_xw G^{(x)}_wy for y != x
    Gx_full = np.zeros((n, n), dtype=complex)
    Gx_full[np.ix_(keep, keep)] = Gx
    pred = -G[x, x] * (H[x] @ Gx_full)
    out["dense_factor"] = float(np.max(np.abs(np.delete(pred - G[x], x))))

    # Ward: eta sum_y |G_xy|^2 = Im G_xx for every x
    out["dense_ward"] = float(np.max(np.abs(eta * np.sum(np.abs(G) ** 2, axis=1) - G.diagonal().imag)))

    # re-expansion: G^{(i)}_ov = -sum_{x~o, x != i} G^{(i)}_oo G^{(o)}_xv
    if nb is not None:
        keep_i = np.array([v for v in range(n) if v != nb])
        Gi = np.zeros((n, n), dtype=complex)
        Gi[np.ix_(keep_i, keep_i)] = _delete(Hz, keep_i)
        nbrs = [w for w in np.flatnonzero(H[x]) if w != nb]
        vs = [v for v in range(n) if v not in (x, nb)]
        pred = np.array([-Gi[x, x] * sum(Gx_full[w, v] for w in nbrs) for v in vs])
        out["dense_reexpansion"] = float(np.max(np.abs(Gi[x, vs] - pred)))

    # cone-derived values against the truncated tree at the same z
    cz = solve_fixed_point(d, z) if eta > 0 else cg
    cone = ball_greens(cz, ball).matrix
    trunc = truncated_ball_greens(d, z, build_ball(d, ball.root_type, ball.shape), depth)
    out["cone_vs_truncated"] = float(np.max(np.abs(cone - trunc)))
    # Ward identity on the cone values themselves
    if eta > 0:
        out["cone_ward"] = float(np.max(np.abs(eta * ward_row_sums(cz) - cz.root_values.imag)))
    return out


# ---------------------------------------------------------------------------
# path products and the biregular recurrence


@dataclass(frozen=True)
class PathCheck:
    path: tuple[int, ...]
    product: float
    margin: float

    @property
    def ok(self) -> bool:
        return self.product < 1.0


def path_coefficient_check(cg: ConeGreens, path) -> PathCheck:
    """``prod |g|`` around a closed non-backtracking walk of vertex types.

    ``path = (t0, t1, ..., tn)`` with ``tn == t0`` describes a walk whose last
    directed edge has the same type as the edge preceding its first one, so
    the walk maps a directed edge to an automorphic copy of itself.
    """
    path = tuple(int(t) for t in path)
    d = cg.d
    if len(path) < 3 or path[0] != path[-1]:
        raise ValueError("path must return to its starting type and have length >= 2")
    n = len(path) - 1
    for m in range(n):
        prev, cur, nxt = path[m - 1 if m else n - 1], path[m], path[m + 1]
        if d[cur, nxt] == 0:
            raise ValueError(f"no edge of type ({cur}, {nxt})")
        if d[cur, nxt] - (nxt == prev) <= 0:
            raise ValueError(f"walk must backtrack at step {m}")
    if max(d.degrees[t] for t in path) < 3:
        raise ValueError("path needs a vertex of degree >= 3")
    if cg.m.imag <= 1e-9 or cg.suspect:
        raise SpectrumError(f"lambda = {cg.z.real} is not in the regular spectrum")
    prod = 1.0
    for m in range(n):
        prod *= abs(cg.value(path[m], path[m + 1]))
    return PathCheck(path, prod, 1.0 - prod)


def biregular_band(d1: int, d2: int) -> tuple[float, float]:
    a, b = np.sqrt(d1 - 1), np.sqrt(d2 - 1)
    return abs(a - b), a + b


def biregular_transfer_ratio(d1: int, d2: int, lam: float, k: int) -> float:
    """Predicted ``E[psi_o psi_v] / E[psi_o^2]`` for ``|v - o| = k`` in the
    (d1, d2)-biregular tree, root of degree d1.

    Summing the eigenvector equation over spheres gives
    ``S_{j+1} = lam S_j - c_{j-1} S_{j-1}`` with ``c`` the number of children
    per vertex of the earlier sphere; the ratio is ``S_k / (|S_k| psi_o)``.
    """
    if min(d1, d2) < 2 or max(d1, d2) < 3:
        raise ValueError("need degrees >= 2 with one of them >= 3")
    lo, hi = biregular_band(d1, d2)
    if not lo <= abs(lam) <= hi:
        raise SpectrumError(f"lambda = {lam} outside the spectrum [{lo:.6g}, {hi:.6g}]")
    if d1 != d2 and lam == 0:
        raise SpectrumError("lambda = 0 is singular for d1 != d2")

    def children(j):
        if j == 0:
            return d1
        return (d2 - 1) if j % 2 else (d1 - 1)

    s_prev, s = 0.0, 1.0
    size = 1
    for j in range(k):
        s_prev, s = s, lam * s - (children(j - 1) * s_prev if j else 0.0)
        size *= children(j)
    return s / size
