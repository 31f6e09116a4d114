"""Command-line front end: validate, density, compare, entropy."""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import zlib
from pathlib import Path

import numpy as np

from .cover import Shape, build_ball
from .degmat import InvalidDegreeMatrix, parse_degree_matrix, validate
from .graphgen import (
    K4,
    EmptyWindow,
    InfeasibleSize,
    RejectionBudgetExceeded,
    eigendecompose,
    local_statistics,
    noisy_almost_eigenvector,
    planted_labeling,
    random_perturbation,
    sample_graph,
    window_eigenvector,
)
from .greens import (
    ConvergenceError,
    SpectrumError,
    ball_greens,
    biregular_transfer_ratio,
    continue_to_real_axis,
    spectral_scan,
)
from .stats import delta_k_estimate, gaussian_delta_k, xi_k
from .stats.entropy import _shapes
from .wave import sample_wave_factor, wave_covariance

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3


def child_rng(master: int, label: str) -> np.random.Generator:
    """Independent stream for a named stage, fixed by the master seed."""
    ss = np.random.SeedSequence(entropy=int(master), spawn_key=(zlib.crc32(label.encode()),))
    return np.random.default_rng(ss)


def _load(path):
    data = json.loads(Path(path).read_text())
    return data, parse_degree_matrix(data)


def _emit(payload, out, fmt):
    if fmt == "json":
        text = json.dumps(payload, indent=2, default=float)
    else:
        text = payload
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


# ---------------------------------------------------------------------------
# pipelines (also used by the tests)


def covariance_ratios(d, lam, process) -> list[dict]:
    """Empirical ``E[f_o f_i] / E[f_o^2]`` on B_1 samples, per root type and
    neighbor type, next to the wave prediction ``Im G_oi / Im G_oo``."""
    cg = continue_to_real_axis(d, lam)
    out = []
    for t in process.types:
        X = process.samples[t]
        ball = build_ball(d, t, Shape.ball(1))
        S = ball_greens(cg, ball).im_part
        for j in range(d.k):
            cols = [v for v in range(1, ball.n) if ball.types[v] == j]
            if not cols:
                continue
            emp = float(np.mean(X[:, [0]] * X[:, cols]) / np.mean(X[:, 0] ** 2))
            row = {"root_type": t, "neighbor_type": j, "empirical": emp, "predicted": float(S[0, cols[0]] / S[0, 0])}
            if d.k == 2 and d[0, 0] == d[1, 1] == 0:
                row["transfer"] = biregular_transfer_ratio(d[t, 1 - t], d[1 - t, t], lam, 1)
            out.append(row)
    return out


def compare(d, lam, eps, k, N, n_roots, seed, mode="window", delta=0.0, n_wave=None) -> dict:
    """Sample a graph, pick a labeling, and measure its distance to the wave."""
    g = sample_graph(d, N, child_rng(seed, "graph"))
    rng = child_rng(seed, "labeling")
    if mode == "planted":
        if d != K4:
            raise ValueError("planted mode needs the K4 type matrix")
        f, info = planted_labeling(g), {"window": 0}
    else:
        sd = eigendecompose(g)
        info = {"window": int(len(sd.window(lam, eps)))}
        if mode == "window":
            f, i = window_eigenvector(sd, lam, eps, rng)
            info["eigenvalue"] = float(sd.values[i])
        elif mode == "noisy":
            v = random_perturbation(N, delta, rng) if delta > 0 else None
            f = noisy_almost_eigenvector(sd, lam, eps, rng, v)
        else:
            raise ValueError(f"unknown mode {mode!r}")
    shape = Shape.ball(k)
    proc = local_statistics(g, f, shape, n_roots, child_rng(seed, "roots"), d=d)
    models = {t: wave_covariance(d, lam, build_ball(d, t, shape)) for t in proc.types}
    mass = {t: d.q[t] for t in proc.types}
    norm = sum(mass.values())
    mass = {t: m / norm for t, m in mass.items()}
    variance = continue_to_real_axis(d, lam).m.imag
    wrng = child_rng(seed, "wave")
    counts = {t: len(proc.samples[t]) if n_wave is None else max(1, round(float(mass[t]) * n_wave)) for t in proc.types}
    wave = {t: sample_wave_factor(models[t], wrng, counts[t]) for t in proc.types}
    # a wave at the labeling's own normalization (||f||^2 = N, unit variance)
    surrogate = {t: sample_wave_factor(models[t], wrng, len(proc.samples[t])) / np.sqrt(variance) for t in proc.types}
    rep = xi_k(proc.samples, wave, mass, variance)
    cal = xi_k(surrogate, wave, mass, variance)
    out = {
        "xi": rep.to_dict(),
        "calibration": cal.to_dict(),
        "threshold": cal.value,
        "skip_rate": proc.skip_rate,
        "simple_tries": g.tries,
        "labeling": {"mode": mode, **info},
        "variance": variance,
    }
    if k >= 1:
        out["covariance_ratios"] = covariance_ratios(d, lam, local_statistics(g, f, Shape.ball(1), n_roots, child_rng(seed, "roots"), d=d))
    out["_process"] = proc
    out["_labeling"] = f
    out["_graph"] = g
    return out


def sampled_delta(d, lam, k, g, f, n_roots, seed, method="knn", a=4.0) -> dict:
    """Sampled Delta_k of a labeling on star and edge neighborhoods."""
    star_s, edge_s = _shapes(d, k)
    star = {t: local_statistics(g, f, s, n_roots, child_rng(seed, f"star{t}"), d=d).samples[t] for t, s in star_s.items()}
    edges = {e: local_statistics(g, f, s, n_roots, child_rng(seed, f"edge{e}"), d=d).samples[e[0]] for e, s in edge_s.items()}
    return delta_k_estimate(d, lam, k, star, edges, method=method, a=a).to_dict()


def entropy_sweep(d, lam, ks, etas) -> list[tuple[float, int, float]]:
    return [(float(eta), int(k), gaussian_delta_k(d, lam, eta, k).value) for eta in etas for k in ks]


# ---------------------------------------------------------------------------
# commands


def cmd_validate(args) -> int:
    try:
        data = json.loads(Path(args.degree_matrix).read_text())
        rep = validate(data["d"])
    except (OSError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    _emit(rep.to_dict(), args.out, "json")
    return EXIT_OK if rep.valid else EXIT_INPUT


def cmd_density(args) -> int:
    _, d = _load(args.degree_matrix)
    grid = np.round(np.arange(args.lambda_min, args.lambda_max + args.step / 2, args.step), 12)
    scan = spectral_scan(d, grid)
    summary = {
        "support": scan.support_intervals(),
        "suspects": scan.suspects,
        "atoms": {str(k): v for k, v in scan.atoms.items()},
        "integral": scan.integral,
    }
    if args.format == "json":
        payload = {**summary, "lambda": scan.lam.tolist(), "im_m": scan.m.imag.tolist(), "flags": scan.flags}
        _emit(payload, args.out, "json")
    else:
        _emit(scan.to_csv(), args.out, "csv")
        print(json.dumps(summary), file=sys.stderr)
    return EXIT_OK


def cmd_compare(args) -> int:
    _, d = _load(args.degree_matrix)
    res = compare(d, args.lam, args.eps, args.k, args.n, args.roots, args.seed, args.mode, args.delta, args.n_wave)
    proc, f = res.pop("_process"), res.pop("_labeling")
    res.pop("_graph")
    if args.dump:
        base = Path(args.dump)
        base.mkdir(parents=True, exist_ok=True)
        for t, X in proc.samples.items():
            np.savetxt(base / f"process_type{t}.csv", X, delimiter=",")
        np.savetxt(base / "labeling.csv", f, delimiter=",")
    _emit(res, args.out, "json")
    return EXIT_OK


def cmd_entropy(args) -> int:
    _, d = _load(args.degree_matrix)
    etas = args.eta or list(np.geomspace(1.0, 1e-6, 13))
    rows = entropy_sweep(d, args.lam, range(args.k + 1), etas)
    payload = {"sweep": [{"eta": e, "k": k, "delta": v} for e, k, v in rows]}
    if args.n:
        g = sample_graph(d, args.n, child_rng(args.seed, "graph"))
        sd = eigendecompose(g)
        f, _ = window_eigenvector(sd, args.lam, args.eps, child_rng(args.seed, "labeling"))
        payload["sampled"] = [sampled_delta(d, args.lam, k, g, f, args.roots, args.seed) for k in range(args.k + 1)]
    if args.format == "json":
        _emit(payload, args.out, "json")
    else:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["eta", "k", "delta"])
        for e, k, v in rows:
            w.writerow([f"{e:.6g}", k, f"{v:.12g}"])
        _emit(buf.getvalue(), args.out, "csv")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="conewave", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, fmt="json"):
        sp.add_argument("--degree-matrix", required=True, metavar="PATH")
        sp.add_argument("--out", metavar="PATH")
        sp.add_argument("--format", choices=["csv", "json"], default=fmt)
        sp.add_argument("--seed", type=int, default=0)

    sp = sub.add_parser("validate", help="check the expanding degree matrix conditions")
    common(sp)
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("density", help="spectral density scan of the cover")
    common(sp, "csv")
    sp.add_argument("--lambda-min", type=float, default=-3.0)
    sp.add_argument("--lambda-max", type=float, default=3.0)
    sp.add_argument("--step", type=float, default=0.01)
    sp.set_defaults(func=cmd_density)

    sp = sub.add_parser("compare", help="eigenvector statistics against the Gaussian wave")
    common(sp)
    sp.add_argument("--lambda", dest="lam", type=float, required=True)
    sp.add_argument("--eps", type=float, default=0.05)
    sp.add_argument("--k", type=int, default=1)
    sp.add_argument("--n", type=int, default=2000)
    sp.add_argument("--roots", type=int, default=500)
    sp.add_argument("--n-wave", type=int)
    sp.add_argument("--mode", choices=["window", "noisy", "planted"], default="window")
    sp.add_argument("--delta", type=float, default=0.0)
    sp.add_argument("--dump", metavar="DIR", help="write sample matrices here")
    sp.set_defaults(func=cmd_compare)

    sp = sub.add_parser("entropy", help="Gaussian Delta_k sweep and sampled estimates")
    common(sp, "csv")
    sp.add_argument("--lambda", dest="lam", type=float, required=True)
    sp.add_argument("--k", type=int, default=2)
    sp.add_argument("--eta", type=float, action="append")
    sp.add_argument("--n", type=int, help="also estimate Delta_k on a sampled graph of this size")
    sp.add_argument("--eps", type=float, default=0.05)
    sp.add_argument("--roots", type=int, default=2000)
    sp.set_defaults(func=cmd_entropy)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InvalidDegreeMatrix, InfeasibleSize, EmptyWindow, SpectrumError, OSError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ConvergenceError, RejectionBudgetExceeded, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
