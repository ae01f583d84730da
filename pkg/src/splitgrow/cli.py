"""Command-line harness: solve, simulate, compare, validate.

Configuration is one JSON document (see README for the schema); individual
flags override config fields.  Outputs are written to --out as
``solution.json``, ``census.csv``, ``report.csv`` and ``manifest.json``;
all numeric outputs are byte-reproducible given (config, seed), so wall
time lives only in the manifest.
"""

from __future__ import annotations

import argparse
import json
import platform
import sys
import time
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .errors import InvalidParameterError, SplitgrowError
from .experiment import (ExperimentConfig, build_model, compare,
                         is_two_colour_spec, run_replicated)
from .growth import CensusSnapshot, write_census_binary
from .solver import DensitySolution, fixed_point_densities, solve_finite
from .twocolour import TwoColourModel, TwoColourSolution, densities_from_e, \
    reduce_to_one_colour, solve_two_colour
from .weights import SplittingWeights, classify_regime, validate_model

__all__ = ["main", "parse_weight_expr"]


def parse_weight_expr(expr: str) -> SplittingWeights:
    """Linear weight expressions like ``i``, ``2*i+1``, ``i-0.5`` or ``1``."""
    t = expr.replace(" ", "")
    if "i" not in t:
        return SplittingWeights(0.0, float(t))
    head, _, rest = t.partition("i")
    if head in ("", "+"):
        a = 1.0
    elif head == "-":
        a = -1.0
    else:
        a = float(head[:-1] if head.endswith("*") else head)
    b = float(rest) if rest else 0.0
    return SplittingWeights(a, b)


def _model_spec_from_flags(args) -> dict | None:
    if args.table:
        doc = json.loads(Path(args.table).read_text())
        return {"family": "table", "d_max": doc["d_max"], "entries": doc["entries"]}
    if not args.family:
        return None
    spec: dict = {"family": args.family}
    if args.w is not None:
        sw = parse_weight_expr(args.w)
        spec.update(a=sw.a, b=sw.b)
    for key in ("x", "alpha", "gamma", "alpha0", "a", "b"):
        val = getattr(args, key if key not in ("a", "b") else f"coef_{key}")
        if val is not None:
            spec[key] = val
    return spec


def _load_config(args) -> ExperimentConfig:
    doc = json.loads(Path(args.config).read_text()) if args.config else {}
    spec = _model_spec_from_flags(args)
    if spec:
        doc["model"] = spec
    if "model" not in doc:
        raise InvalidParameterError("no model given (use --config or --family/--table)")
    for flag, key in (("seed", "seed"), ("replicas", "replicas"),
                      ("t_final", "t_final"), ("K", "K"), ("tol", "tol"),
                      ("engine", "engine"), ("thin", "thin"),
                      ("k_check", "k_check"), ("z_crit", "z_crit")):
        val = getattr(args, flag, None)
        if val is not None:
            doc[key] = val
    if getattr(args, "force_unsupported", False):
        doc["force_unsupported"] = True
    return ExperimentConfig.from_dict(doc)


def _manifest(cfg: ExperimentConfig, runtime_s: float) -> dict:
    return {
        "seed": cfg.seed,
        "config_digest": cfg.digest,
        "config": cfg.to_dict(),
        "versions": {
            "splitgrow": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": platform.python_version(),
        },
        "runtime_s": runtime_s,
    }


def _write_json(path: Path, doc: dict) -> None:
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _solution_doc(sol) -> dict:
    if isinstance(sol, TwoColourSolution):
        rho_w, rho_b = densities_from_e(sol)
        doc = {
            "kind": "two-colour",
            "method": sol.method,
            "K": sol.K,
            "e_white": sol.e_white.tolist(),
            "e_black": sol.e_black.tolist(),
            "rho_white": rho_w.tolist(),
            "rho_black": rho_b.tolist(),
            "max_residual": sol.max_residual,
            "colour_sum_dev": sol.colour_sum_dev,
            "weight_sum_dev": sol.weight_sum_dev,
            "warnings": sol.warnings,
        }
        return doc
    assert isinstance(sol, DensitySolution)
    return {
        "kind": "one-colour",
        "method": sol.method,
        "K": sol.K,
        "regime": sol.regime.value,
        "s": sol.s,
        "iterations": sol.iterations,
        "last_step": sol.last_step,
        "sum_a": sol.sum_a,
        "sum_ka": sol.sum_ka,
        "max_residual": sol.residuals.max_abs if sol.residuals else None,
        "sum_dev": sol.residuals.sum_dev if sol.residuals else None,
        "moment_dev": sol.residuals.moment_dev if sol.residuals else None,
        "tail_mass": sol.residuals.tail_mass if sol.residuals else None,
        "monotone_ok": sol.monotone_ok,
        "unsupported": sol.unsupported,
        "warnings": sol.warnings,
        "densities": sol.densities.tolist(),
    }


def _solve_model(model, cfg: ExperimentConfig, method: str):
    if isinstance(model, TwoColourModel):
        m = method if method in ("reduction", "direct") else "reduction"
        return solve_two_colour(model, K=cfg.K, tol=cfg.tol, method=m,
                                force_unsupported=cfg.force_unsupported)
    if method == "linear" or (method == "auto" and model.d_max is not None):
        return solve_finite(model)
    return fixed_point_densities(model, K=cfg.K, tol=cfg.tol,
                                 force_unsupported=cfg.force_unsupported)


def cmd_solve(args) -> int:
    cfg = _load_config(args)
    t0 = time.monotonic()
    model = build_model(cfg.model)
    sol = _solve_model(model, cfg, args.method)
    doc = _solution_doc(sol)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        _write_json(out / "solution.json", doc)
        _write_json(out / "manifest.json", _manifest(cfg, time.monotonic() - t0))
        print(f"solution.json written to {out}", file=sys.stderr)
    else:
        json.dump(doc, sys.stdout, indent=2, sort_keys=True)
        print()
    return 0


def _validate_or_abort(cfg: ExperimentConfig) -> int:
    """0 when the model passes validation (or the config forces on)."""
    model = build_model(cfg.model)
    if isinstance(model, TwoColourModel):
        return 0      # consistency is enforced at construction
    rep = validate_model(model)
    if rep.ok or cfg.force_unsupported:
        return 0
    _print_validation(model, rep)
    return 2


def _print_validation(model, rep) -> None:
    print(f"model: {model!r}")
    for name, cond in (("linearity", rep.linearity),
                       ("leaf_reachability", rep.leaf_reachability),
                       ("top_splittable", rep.top_splittable),
                       ("replacement_matrix", rep.replacement_matrix)):
        status = {True: "pass", False: "FAIL", None: "n/a"}[cond.ok]
        print(f"  {name:<20} {status:<5} {cond.detail}")


def cmd_simulate(args) -> int:
    cfg = _load_config(args)
    rc = _validate_or_abort(cfg)
    if rc:
        return rc
    t0 = time.monotonic()
    results = run_replicated(cfg)
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    two = results[0]["kind"] == "two-colour"
    with open(out / "census.csv", "w") as fh:
        if two:
            fh.write("replica,t,k,n_white,n_black\n")
            for rep, res in enumerate(results):
                snaps = res["snapshots"] or [(res["t"], res["white"], res["black"])]
                for t, white, black in snaps:
                    for d0 in range(max(len(white), len(black))):
                        nw = int(white[d0]) if d0 < len(white) else 0
                        nb = int(black[d0]) if d0 < len(black) else 0
                        if nw or nb:
                            fh.write(f"{rep},{t},{d0 + 1},{nw},{nb}\n")
        else:
            fh.write("replica,t,k,n\n")
            for rep, res in enumerate(results):
                snaps = res["snapshots"] or [
                    CensusSnapshot(res["t"], res["counts"], float("nan"))]
                for snap in snaps:
                    for d0, n in enumerate(snap.counts):
                        if n:
                            fh.write(f"{rep},{snap.t},{d0 + 1},{n}\n")
    if args.binary and not two:
        for rep, res in enumerate(results):
            snaps = res["snapshots"] or [
                CensusSnapshot(res["t"], res["counts"], float("nan"))]
            write_census_binary(out / f"census_{rep}.bin", snaps)
    _write_json(out / "manifest.json", _manifest(cfg, time.monotonic() - t0))
    worst = {}
    for res in results:
        for k, v in res["checks"].items():
            if isinstance(v, float) and np.isnan(v):
                continue
            worst[k] = max(worst.get(k, 0.0), float(v))
    summary = ", ".join(f"{k}={v:.3g}" for k, v in sorted(worst.items()))
    print(f"{cfg.replicas} replicas to t={cfg.t_final} ({cfg.engine}); {summary}",
          file=sys.stderr)
    return 0


def cmd_compare(args) -> int:
    cfg = _load_config(args)
    rc = _validate_or_abort(cfg)
    if rc:
        return rc
    t0 = time.monotonic()
    report = compare(cfg)
    model = build_model(cfg.model)
    sol = _solve_model(model, cfg, "auto")
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "report.csv", "w") as fh:
        report.write_csv(fh)
    _write_json(out / "solution.json", _solution_doc(sol))
    _write_json(out / "manifest.json", _manifest(cfg, time.monotonic() - t0))
    bad = report.violations()
    worst = max((abs(r.z) for r in report.rows if np.isfinite(r.z)), default=0.0)
    status = "PASS" if not bad else f"FAIL ({len(bad)} degrees beyond z={cfg.z_crit})"
    print(f"compare {status}: max |z| = {worst:.2f} over k <= {cfg.k_check}; "
          f"report in {out}", file=sys.stderr)
    return 0 if not bad else 1


def cmd_validate(args) -> int:
    cfg = _load_config(args)
    model = build_model(cfg.model)
    if isinstance(model, TwoColourModel):
        print(f"model: {model!r}")
        print(f"  white consistency     pass  max residual "
              f"{model.white.linear_fit_residual:.3g}")
        red = reduce_to_one_colour(model)
        regime, s = classify_regime(red)
        print(f"  reduced one-colour    regime {regime.value}, s = {s:g}")
        return 0
    rep = validate_model(model)
    _print_validation(model, rep)
    try:
        regime, s = classify_regime(model)
        print(f"  regime {regime.value}, s = {s:g}")
    except SplitgrowError as exc:
        print(f"  regime unknown: {exc}")
    return 0 if rep.ok else 2


def _add_common(p: argparse.ArgumentParser, sim: bool) -> None:
    p.add_argument("--config", help="JSON config document")
    p.add_argument("--family", help="model family name")
    p.add_argument("--w", help="splitting weights, e.g. 'i' or '2*i+1'")
    p.add_argument("--x", type=float, help="uniform-family offset")
    p.add_argument("--alpha", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--alpha0", type=float, help="two-colour white split parameter")
    p.add_argument("--a", dest="coef_a", type=float, help="two-colour weight parameter a")
    p.add_argument("--b", dest="coef_b", type=float, help="two-colour weight parameter b")
    p.add_argument("--table", help="JSON table file {d_max, entries}")
    p.add_argument("--K", type=int, help="solver truncation")
    p.add_argument("--tol", type=float, help="solver tolerance")
    p.add_argument("--force-unsupported", action="store_true",
                   help="run outside the guaranteed regime (results watermarked)")
    p.add_argument("--out", help="output directory")
    if sim:
        p.add_argument("--seed", type=int)
        p.add_argument("--replicas", type=int)
        p.add_argument("--t-final", dest="t_final", type=int)
        p.add_argument("--thin", type=int, help="snapshot every N steps")
        p.add_argument("--engine", choices=("urn", "tree"))


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="splitgrow",
        description="Vertex-splitting random trees: solve, simulate, compare, validate")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="analytic degree densities")
    _add_common(p, sim=False)
    p.add_argument("--method", default="auto",
                   choices=("auto", "fixed-point", "linear", "reduction", "direct"))
    p.set_defaults(fn=cmd_solve)

    p = sub.add_parser("simulate", help="replicated growth trajectories")
    _add_common(p, sim=True)
    p.add_argument("--binary", action="store_true",
                   help="also write per-replica binary census dumps")
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("compare", help="simulation vs analytic, with z-scores")
    _add_common(p, sim=True)
    p.add_argument("--k-check", dest="k_check", type=int)
    p.add_argument("--z-crit", dest="z_crit", type=float)
    p.set_defaults(fn=cmd_compare)

    p = sub.add_parser("validate", help="model condition checks and regime")
    _add_common(p, sim=False)
    p.set_defaults(fn=cmd_validate)

    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except SplitgrowError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
