"""Configuration-model graphs G(N, d), their spectra and local eigenvector
statistics."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial, prod
from pathlib import Path

import numpy as np

from .cover import Shape, TreeBall, local_ball_from_graph
from .degmat import DegreeMatrix, feasible_counts


class InfeasibleSize(ValueError):
    pass


class RejectionBudgetExceeded(RuntimeError):
    def __init__(self, tries: int):
        super().__init__(f"no simple graph after {tries} attempts")
        self.tries = tries


class EmptyWindow(ValueError):
    pass


@dataclass(frozen=True)
class TypedGraph:
    types: np.ndarray
    edges: tuple[tuple[int, int], ...]  # sorted, u <= v, with multiplicity
    tries: int = 1

    @property
    def N(self) -> int:
        return len(self.types)

    @property
    def simple(self) -> bool:
        return all(u != v for u, v in self.edges) and len(set(self.edges)) == len(self.edges)

    @property
    def adj(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.N)]
        for u, v in self.edges:
            out[u].append(v)
            out[v].append(u)
        return out

    def adjacency(self) -> np.ndarray:
        """Dense adjacency; a loop adds 2 to the diagonal."""
        A = np.zeros((self.N, self.N))
        for u, v in self.edges:
            A[u, v] += 1
            A[v, u] += 1
        return A

    def type_degrees(self, k: int) -> np.ndarray:
        """``out[v, j]``: number of type-j neighbors of v."""
        out = np.zeros((self.N, k), dtype=int)
        for u, v in self.edges:
            out[u, self.types[v]] += 1
            out[v, self.types[u]] += 1
        return out

    def save(self, path: str | Path) -> None:
        lines = ["# types " + " ".join(map(str, self.types.tolist()))]
        lines += [f"{u} {v}" for u, v in self.edges]
        Path(path).write_text("\n".join(lines) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "TypedGraph":
        text = Path(path).read_text().splitlines()
        if not text or not text[0].startswith("# types"):
            raise ValueError("graph file must start with a '# types' header")
        types = np.array([int(t) for t in text[0].split()[2:]], dtype=int)
        edges = []
        for line in text[1:]:
            if line.strip():
                u, v = map(int, line.split())
                edges.append((min(u, v), max(u, v)))
        return cls(types, tuple(sorted(edges)))


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _block_types(counts) -> np.ndarray:
    return np.repeat(np.arange(len(counts)), counts)


def _match_once(d: DegreeMatrix, types: np.ndarray, rng: np.random.Generator) -> list[tuple[int, int]]:
    by_type = [np.flatnonzero(types == t) for t in range(d.k)]
    edges = []
    for i in range(d.k):
        stubs_ii = np.repeat(by_type[i], d[i, i])
        if len(stubs_ii):
            perm = rng.permutation(stubs_ii)
            edges += list(zip(perm[0::2], perm[1::2]))
        for j in range(i + 1, d.k):
            if d[i, j] == 0:
                continue
            left = np.repeat(by_type[i], d[i, j])
            right = rng.permutation(np.repeat(by_type[j], d[j, i]))
            edges += list(zip(left, right))
    return sorted((int(min(u, v)), int(max(u, v))) for u, v in edges)


def sample_graph(d: DegreeMatrix, N: int, seed=None, mode: str = "simple-reject", max_tries: int = 10000) -> TypedGraph:
    """Uniform half-edge matching; ``simple-reject`` resamples until simple."""
    fc = feasible_counts(d, N)
    if not fc.feasible:
        raise InfeasibleSize(f"N={N} infeasible ({fc.reason}); next feasible N is {fc.next_feasible}")
    if mode not in ("simple-reject", "allow-multi"):
        raise ValueError(f"unknown mode {mode!r}")
    rng = _as_rng(seed)
    types = _block_types(fc.counts)
    for tries in range(1, max_tries + 1):
        g = TypedGraph(types, tuple(_match_once(d, types, rng)), tries)
        if mode == "allow-multi" or g.simple:
            return g
    raise RejectionBudgetExceeded(max_tries)


def _double_factorial_odd(m: int) -> int:
    """Number of perfect matchings of m points."""
    if m % 2:
        return 0
    return prod(range(m - 1, 0, -2)) if m else 1


@dataclass(frozen=True)
class ConfigurationCount:
    matchings: int  # raw half-edge matchings
    formula: Fraction  # matchings divided by the within-vertex stub symmetries


def count_configurations(d: DegreeMatrix, N: int) -> ConfigurationCount:
    fc = feasible_counts(d, N)
    if not fc.feasible:
        raise InfeasibleSize(f"N={N} infeasible ({fc.reason})")
    n = fc.counts
    raw = 1
    sym = 1
    for i in range(d.k):
        raw *= _double_factorial_odd(d[i, i] * n[i])
        sym *= factorial(d[i, i]) ** n[i]
        for j in range(i + 1, d.k):
            raw *= factorial(d[i, j] * n[i])
            sym *= factorial(d[i, j]) ** n[i] * factorial(d[j, i]) ** n[j]
    return ConfigurationCount(raw, Fraction(raw, sym))


# ---------------------------------------------------------------------------
# spectra


@dataclass(frozen=True)
class SpectralData:
    values: np.ndarray
    vectors: np.ndarray  # columns

    @property
    def N(self) -> int:
        return len(self.values)

    def window(self, lam: float, eps: float) -> np.ndarray:
        return np.flatnonzero(np.abs(self.values - lam) <= eps)


def eigendecompose(g: TypedGraph, max_n: int = 4000, check: bool = True) -> SpectralData:
    if g.N > max_n:
        raise ValueError(f"N={g.N} exceeds the dense-solver bound {max_n}")
    A = g.adjacency()
    w, V = np.linalg.eigh(A)
    if check:
        norm = max(1.0, np.abs(w).max())
        res = np.abs(A @ V - V * w).max()
        orth = np.abs(V.T @ V - np.eye(g.N)).max()
        if res > 1e-8 * norm or orth > 1e-8:
            raise np.linalg.LinAlgError(f"eigensolver residual {res:.2e}, orthogonality {orth:.2e}")
    return SpectralData(w, V)


def window_eigenvector(sd: SpectralData, lam: float, eps: float, rng) -> tuple[np.ndarray, int]:
    """``sqrt(N) psi_i`` with i uniform among eigenvalues in ``[lam-eps, lam+eps]``."""
    idx = sd.window(lam, eps)
    if len(idx) == 0:
        raise EmptyWindow(f"no eigenvalue in [{lam - eps}, {lam + eps}]")
    i = int(rng.choice(idx))
    return np.sqrt(sd.N) * sd.vectors[:, i], i


def noisy_almost_eigenvector(sd: SpectralData, lam: float, eps: float, rng, v: np.ndarray | None = None) -> np.ndarray:
    """``sqrt(N) (psi + v)`` where ``psi`` is a normalized Gaussian
    combination of the window's eigenvectors."""
    idx = sd.window(lam, eps)
    if len(idx) == 0:
        raise EmptyWindow(f"no eigenvalue in [{lam - eps}, {lam + eps}]")
    c = rng.standard_normal(len(idx))
    psi = sd.vectors[:, idx] @ (c / np.linalg.norm(c))
    if v is not None:
        psi = psi + v
    return np.sqrt(sd.N) * psi


def random_perturbation(N: int, delta: float, rng) -> np.ndarray:
    v = rng.standard_normal(N)
    return delta * v / np.linalg.norm(v)


# ---------------------------------------------------------------------------
# local statistics


@dataclass
class EmpiricalProcess:
    shape: Shape
    samples: dict[int, np.ndarray]  # root type -> (n_t, dim_t)
    balls: dict[int, TreeBall]
    attempted: dict[int, int]
    skipped: dict[int, int]
    warnings: list[str] = field(default_factory=list)

    @property
    def skip_rate(self) -> float:
        a = sum(self.attempted.values())
        return sum(self.skipped.values()) / a if a else 0.0

    def weights(self, t: int) -> np.ndarray:
        n = len(self.samples[t])
        return np.full(n, 1.0 / n)

    @property
    def types(self) -> list[int]:
        return sorted(t for t, x in self.samples.items() if len(x))


def _allocate(q, n_roots: int) -> list[int]:
    return [max(1, int(round(float(qt) * n_roots))) for qt in q]


def local_statistics(
    g: TypedGraph,
    f: np.ndarray,
    shape: Shape,
    n_roots: int,
    rng,
    d: DegreeMatrix | None = None,
    roots: dict[int, np.ndarray] | None = None,
) -> EmpiricalProcess:
    """Sample ``f`` on canonical neighborhoods of random roots.

    Roots are drawn per type (``round(q_t n_roots)`` each when ``d`` is given,
    else ``n_roots`` each). Edge shapes pick a uniform neighbor of the
    requested type. Cyclic neighborhoods are skipped and counted.
    """
    rng = _as_rng(rng)
    adj = g.adj
    k = int(g.types.max()) + 1
    if shape.kind == "edge":
        td = g.type_degrees(k)
        types_present = [t for t in range(k) if np.any(td[g.types == t, shape.neighbor_type] > 0)]
    else:
        types_present = list(range(k))
    alloc = _allocate(d.q, n_roots) if d is not None else [n_roots] * k
    samples, balls, attempted, skipped = {}, {}, {}, {}
    for t in types_present:
        pool = np.flatnonzero(g.types == t)
        chosen = roots[t] if roots is not None else rng.choice(pool, size=alloc[t], replace=alloc[t] > len(pool))
        rows = []
        attempted[t] = len(chosen)
        skipped[t] = 0
        for o in chosen:
            nb = None
            if shape.kind == "edge":
                cands = [u for u in adj[o] if g.types[u] == shape.neighbor_type]
                nb = int(rng.choice(cands))
            res = local_ball_from_graph(adj, g.types, int(o), shape, rng, nb)
            if res is None:
                skipped[t] += 1
                continue
            ball, vmap = res
            balls.setdefault(t, ball)
            rows.append(f[vmap])
        samples[t] = np.array(rows) if rows else np.empty((0, 0))
    ep = EmpiricalProcess(shape, samples, balls, attempted, skipped)
    if ep.skip_rate > 0.5:
        msg = f"skip rate {ep.skip_rate:.2f} exceeds 50%"
        ep.warnings.append(msg)
        warnings.warn(msg)
    return ep


# ---------------------------------------------------------------------------
# quotient and K4


def quotient_spectrum(d: DegreeMatrix) -> list[tuple[float, np.ndarray]]:
    """Eigenpairs of the type matrix; lifting a right eigenvector x to
    ``f_v = x[type(v)]`` gives an eigenvector of every G(N, d)."""
    q = np.array([float(x) for x in d.q])
    s = np.sqrt(q)
    sym = (s[:, None] * d.array) / s[None, :]  # symmetric since q_i d_ij = q_j d_ji
    w, U = np.linalg.eigh(0.5 * (sym + sym.T))
    X = U / s[:, None]
    return [(float(w[n]), X[:, n] / np.linalg.norm(X[:, n])) for n in range(d.k)]


def lift(g: TypedGraph, x: np.ndarray) -> np.ndarray:
    return np.asarray(x)[g.types]


K4 = DegreeMatrix(((0, 1, 1, 1), (1, 0, 1, 1), (1, 1, 0, 1), (1, 1, 1, 0)))


@dataclass(frozen=True)
class PlantedCheck:
    vector: np.ndarray
    eigenvalue: int
    residual: float


def k4_planted_check(g: TypedGraph, fiber: int = 0) -> PlantedCheck:
    """Verify that 3 on one fiber and -1 elsewhere is a (-1)-eigenvector."""
    if g.types.min() < 0 or g.types.max() > 3:
        raise ValueError("types must be K4 vertices 0..3")
    td = g.type_degrees(4)
    want = 1 - np.eye(4, dtype=int)[g.types]
    if not np.array_equal(td, want):
        raise ValueError("graph is not a lift of K4")
    v = np.where(g.types == fiber, 3, -1).astype(np.int64)
    Av = np.zeros_like(v)
    for a, b in g.edges:
        Av[a] += v[b]
        Av[b] += v[a]
    return PlantedCheck(v, -1, float(np.abs(Av + v).max()))


def planted_labeling(g: TypedGraph, fiber: int = 0) -> np.ndarray:
    """The planted vector scaled to ``||f||^2 = N``."""
    v = np.where(g.types == fiber, 3.0, -1.0)
    return v * np.sqrt(g.N) / np.linalg.norm(v)
