"""``pdlocal`` command line.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 inconclusive verdict. Values in a ``--config`` JSON file override flags.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import catalog, extension, gp, io, measures, mercer, rkhs
from .errors import ConstructionError, ConvergenceError, DomainError, PdError, ResolutionError

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_INCONCLUSIVE = 0, 2, 3, 4


class ConfigError(PdError):
    pass


# -- argument helpers --------------------------------------------------------------

def load_function(spec: str):
    """Catalog id, ``E``/``L``/``K+``/``F3ext`` or a JSON function description."""
    if spec.endswith(".json"):
        return catalog.from_spec(json.loads(Path(spec).read_text()))
    if spec == "F3ext":
        return extension.polya_spline("F3", 2.0)
    if spec == "F2ext":
        return extension.polya_spline("F2", 2.0)
    try:
        return catalog.get(spec)
    except KeyError as exc:
        raise ConfigError(str(exc)) from None


def load_kernel(spec: str, a: float):
    kernels = {"E": catalog.min_kernel, "L": catalog.affine_kernel, "K+": catalog.k_plus_kernel}
    if spec in kernels:
        return kernels[spec](a)
    return load_function(spec)


def load_measure(spec: str):
    if spec.endswith(".json"):
        return measures.measure_from_json(json.loads(Path(spec).read_text()))
    try:
        return measures.get_measure(spec)
    except KeyError as exc:
        raise ConfigError(str(exc)) from None


def expand_ids(spec: str) -> list:
    """``F1..F6`` or a comma list."""
    out = []
    for part in spec.split(","):
        if ".." in part:
            lo, hi = part.split("..")
            pre = lo.rstrip("0123456789")
            out += [f"{pre}{k}" for k in range(int(lo[len(pre):]), int(hi[len(pre):]) + 1)]
        elif part:
            out.append(part)
    return out


def parse_points(spec: str, a: float, seed: int = 0) -> np.ndarray:
    """``0,0.3,0.6`` or ``N@uniform`` / ``N@random`` inside ``[0, a)``."""
    if "@" in spec:
        n, kind = spec.split("@")
        n = int(n)
        if kind == "uniform":
            return a * np.arange(n) / n
        if kind == "random":
            return np.sort(np.random.default_rng(seed).uniform(0, a, n))
        raise ConfigError(f"unknown grid kind {kind!r}")
    return np.array([float(v) for v in spec.split(",") if v.strip()])


def parse_floats(spec: str) -> np.ndarray:
    return np.array([float(v) for v in spec.split(",") if v.strip()])


# -- commands ------------------------------------------------------------------------

def cmd_analyze(cfg, out: Path) -> int:
    F = load_function(cfg["fn"])
    pts = parse_points(cfg.get("points") or "8@uniform", F.half_width, cfg.get("seed", 0))
    G = catalog.gram(F, pts)
    rep = catalog.psd_check(G, cfg.get("tol", catalog.PSD_TOL), cfg.get("rank_tol", catalog.RANK_TOL))
    doc = {"fn": F.id, "points": G.points, "is_psd": rep.is_psd, "rank": rep.numerical_rank,
           "min_eigenvalue": rep.min_eigenvalue, "eigenvalues": rep.eigenvalues}
    if not F.is_real:
        split = catalog.real_imag_split(F)
        doc["real_part_psd"] = catalog.psd_check(catalog.gram(split.re, pts)).is_psd
    io.write_json(out / "analyze.json", doc)
    io.write_csv(out / "gram_eigenvalues.csv", ["index", "eigenvalue"], enumerate(rep.eigenvalues))
    print(io.dumps({k: doc[k] for k in ("fn", "is_psd", "rank", "min_eigenvalue")}))
    return EXIT_OK


def cmd_spectrum(cfg, out: Path) -> int:
    a = cfg.get("a")
    F = load_kernel(cfg["fn"], a if a is not None else 0.5)
    if a is None:
        a = getattr(F, "half_width", None) or getattr(F, "c", None) or F.hi - F.lo
    S = mercer.mercer_spectrum(F, a, cfg.get("N", 256), cfg.get("rule", "gauss"))
    top = S.eigenvalues[:10]
    doc = {"fn": cfg["fn"], "a": a, "N": cfg.get("N", 256), "rule": S.rule, "trace": S.trace,
           "top_eigenvalues": top}
    io.write_json(out / "spectrum.json", doc)
    io.write_csv(out / "eigenvalues.csv", ["index", "eigenvalue"], enumerate(S.eigenvalues, 1))
    x = np.linspace(0, a, 201)
    io.write_svg(out / "eigenfunctions.svg",
                 {f"xi_{n + 1}": (x, S.eigenfunction(n, x).real) for n in range(min(3, top.size))},
                 title=f"Mercer eigenfunctions of {cfg['fn']}", xlabel="x")
    print(io.dumps({"trace": S.trace, "top_eigenvalues": top}))
    return EXIT_OK


def cmd_extend(cfg, out: Path) -> int:
    E = extension.polya_spline(cfg["fn"], cfg.get("c", 2.0), cfg.get("mode", "to_zero"))
    convex, viol = extension.convexity_check(E)
    D = extension.extension_density(E)
    ok = extension.pd_verify(D, cfg.get("tol", 1e-9))
    doc = {"extension": E.to_json(), "convex": convex, "n_violations": len(viol),
           "density_min": D.min_value, "analytic": D.analytic, "pd": ok}
    io.write_json(out / "extension.json", doc)
    io.write_csv(out / "density.csv", ["lambda", "phi"], zip(D.grid, D.values))
    x = np.linspace(-E.c - 0.5, E.c + 0.5, 401)
    io.write_svg(out / "extension.svg", {"F_ex": (x, E(x))}, title=f"Polya extension of {E.base}")
    io.write_svg(out / "density.svg", {"Phi_ex": (D.grid, D.values)}, title="Extension density",
                 xlabel="lambda")
    print(io.dumps({k: doc[k] for k in ("convex", "density_min", "pd")}))
    return EXIT_OK


def cmd_check_ext(cfg, out: Path) -> int:
    mu = load_measure(cfg["measure"])
    F = load_function(cfg["fn"])
    xs = parse_floats(cfg.get("x") or "0,0.25,-0.25,0.5,-0.5,0.9,-0.9")
    r = extension.shannon_ext_check(mu, F, xs, cfg.get("n_cut", 8192), cfg.get("tol", 1e-3))
    doc = {"measure": mu.id, "fn": F.id, "n_cut": r.n_cut, "max_residual": r.max_residual,
           "in_ext": r.in_ext, "tail_bound": r.tail_bound,
           "truncation_dominated": r.truncation_dominated, "x": xs, "residuals": r.residuals}
    io.write_json(out / "check_ext.json", doc)
    print(io.dumps({k: doc[k] for k in ("in_ext", "max_residual", "tail_bound")}))
    if r.truncation_dominated and not r.in_ext:
        return EXIT_INCONCLUSIVE
    return EXIT_OK


def cmd_deficiency(cfg, out: Path) -> int:
    rows, reports = [], []
    for fid in expand_ids(cfg["fn"]):
        rep = rkhs.deficiency_classify(load_function(fid), with_ladders=cfg.get("ladders", False))
        reports.append(rep.to_json())
        rows.append([fid, str(rep.indices), rep.verdict_basis])
    io.write_json(out / "deficiency.json", reports)
    io.write_csv(out / "deficiency.csv", ["fn", "indices", "basis"], rows)
    for r in rows:
        print(f"{r[0]}: {r[1]}  ({r[2]})")
    return EXIT_INCONCLUSIVE if any(r["indices"] is None for r in reports) else EXIT_OK


def cmd_order(cfg, out: Path) -> int:
    a = cfg.get("a", 0.5)
    K, F = load_kernel(cfg["K"], a), load_kernel(cfg["F"], a)
    r = rkhs.ordering_ladder(K, F, a)
    doc = {"K": cfg["K"], "F": cfg["F"], "a": a, "A": r.A_min, "verdict": r.dominated,
           "infinite": r.infinite, "ladder": r.ladder}
    io.write_json(out / "order.json", doc)
    io.write_csv(out / "order_ladder.csv", ["grid_size", "A0"],
                 [(d["grid_size"], d["A0"]) for d in r.ladder])
    print(io.dumps({k: doc[k] for k in ("A", "verdict")}))
    return {"yes": EXIT_OK, "no": EXIT_OK}.get(r.dominated, EXIT_INCONCLUSIVE)


def cmd_simulate(cfg, out: Path) -> int:
    proc, n, seed = cfg["process"], cfg.get("paths", 10000), cfg.get("seed", 0)
    if proc == "bm":
        P = gp.simulate_bm(gp.uniform_grid(cfg.get("T", 1.0), cfg.get("dt", 0.05)), n, seed)
        pairs, theory = [(0.2, 0.4), (0.5, 1.0)], gp.bm_cov
    elif proc == "bridge":
        P = gp.simulate_bridge(gp.uniform_grid(1.0, cfg.get("dt", 0.05)), n, seed,
                               cfg.get("scheme", "exact_increment"))
        pairs, theory = [(0.25, 0.5), (0.3, 0.7)], gp.bridge_cov
    elif proc == "ou":
        g, b = cfg.get("gamma", 1.0), cfg.get("beta", 1.0)
        P = gp.simulate_ou(g, b, cfg.get("v0", 1.0), gp.uniform_grid(cfg.get("T", 5.0), cfg.get("dt", 0.05)),
                           n, seed)
        pairs, theory = [(4.0, 4.5), (4.5, 5.0)], gp.ou_cov(g, b)
    else:
        raise ConfigError(f"unknown process {proc!r}")
    rep = gp.empirical_cov(P, pairs, theory)
    doc = dict(rep.to_json(), process=proc, seed=seed, scheme=P.scheme)
    io.write_json(out / "covariance.json", doc)
    k = min(16, P.n_paths)
    io.write_csv(out / "paths.csv", ["t"] + [f"path_{i}" for i in range(k)],
                 np.column_stack([P.times, P.values[:k].T]))
    io.write_svg(out / "paths.svg", {f"path_{i}": (P.times, P.values[i]) for i in range(min(5, k))},
                 title=f"{proc} sample paths", xlabel="t")
    print(io.dumps({"passed": rep.passed, "empirical": rep.empirical, "theoretical": rep.theoretical,
                    "std_error": rep.std_error}))
    return EXIT_OK


COMMANDS = {"analyze": cmd_analyze, "spectrum": cmd_spectrum, "extend": cmd_extend,
            "check-ext": cmd_check_ext, "deficiency": cmd_deficiency, "order": cmd_order,
            "simulate": cmd_simulate}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pdlocal", description=__doc__.splitlines()[0])
    p.add_argument("--config", help="JSON file whose keys override flags")
    p.add_argument("--output", help=f"output directory (default ${io.ENV_OUT} or {io.DEFAULT_OUT})")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("analyze", help="Gram matrix, PSD verdict and rank")
    s.add_argument("--fn", required=True)
    s.add_argument("--points")
    s.add_argument("--tol", type=float)
    s.add_argument("--rank-tol", type=float, dest="rank_tol")
    s.add_argument("--seed", type=int)

    s = sub.add_parser("spectrum", help="Mercer spectrum and trace")
    s.add_argument("--fn", required=True)
    s.add_argument("--a", type=float)
    s.add_argument("--N", type=int)
    s.add_argument("--rule", choices=["gauss", "midpoint", "trapezoid"])

    s = sub.add_parser("extend", help="Polya extension and its density")
    s.add_argument("--fn", required=True)
    s.add_argument("--c", type=float)
    s.add_argument("--mode", choices=["to_zero", "single_segment"])
    s.add_argument("--tol", type=float)

    s = sub.add_parser("check-ext", help="Shannon sampling test for Ext(F)")
    s.add_argument("--measure", required=True)
    s.add_argument("--fn", required=True)
    s.add_argument("--x")
    s.add_argument("--n-cut", type=int, dest="n_cut")
    s.add_argument("--tol", type=float)

    s = sub.add_parser("deficiency", help="deficiency indices")
    s.add_argument("--fn", required=True)
    s.add_argument("--ladders", action="store_true", default=None)

    s = sub.add_parser("order", help="the order K << F")
    s.add_argument("--K", required=True)
    s.add_argument("--F", required=True)
    s.add_argument("--a", type=float)

    s = sub.add_parser("simulate", help="Monte Carlo covariance check")
    s.add_argument("process", choices=["bm", "bridge", "ou"])
    s.add_argument("--paths", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--dt", type=float)
    s.add_argument("--T", type=float)
    s.add_argument("--scheme", choices=list(gp.SCHEMES))
    s.add_argument("--gamma", type=float)
    s.add_argument("--beta", type=float)
    s.add_argument("--v0", type=float)
    return p


def _validate(cfg: dict) -> None:
    for key in ("tol", "rank_tol", "dt", "T", "gamma", "beta", "c", "a"):
        v = cfg.get(key)
        if v is not None and not (isinstance(v, (int, float)) and v > 0 and math.isfinite(v)):
            raise ConfigError(f"{key} must be positive")
    for key in ("N", "paths", "n_cut"):
        v = cfg.get(key)
        if v is not None and (not isinstance(v, int) or v < 1):
            raise ConfigError(f"{key} must be a positive integer")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = {k: v for k, v in vars(args).items() if v is not None and k not in ("config", "output")}
    try:
        if args.config:
            try:
                cfg.update(json.loads(Path(args.config).read_text()))
            except (OSError, json.JSONDecodeError) as exc:
                raise ConfigError(f"cannot read config: {exc}") from None
        _validate(cfg)
        # one directory per distinct configuration, so the hash tags every file
        out = io.output_dir(Path(io.output_dir(args.output)) /
                            f"{cfg['command']}-{io.config_hash(cfg)[:12]}")
        io.write_manifest(out, cfg["command"], cfg, cfg.get("seed"))
        return COMMANDS[cfg["command"]](cfg, out)
    except (ConvergenceError, ResolutionError, ConstructionError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConfigError, DomainError, KeyError, ValueError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
