"""Replicated simulation experiments with analytic cross-checks.

A config describes one model (one- or two-colour), the horizon, the replica
count and solver parameters.  Replicas run on independent, reproducibly
derived random streams (children of one master seed); empirical per-degree
means and standard errors are joined against the analytic densities and
turned into z-scores, giving a CI-friendly pass/fail summary.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .closed_forms import closed_form_for
from .errors import InvalidParameterError
from .growth import OrderedTree, UrnState, run
from .solver import fixed_point_densities, solve_finite
from .twocolour import (TwoColourModel, TwoColourState, densities_from_e,
                        make_rna, make_two_colour_grafting, make_two_colour_uniform,
                        solve_two_colour)
from .weights import SplittingWeights, make_grafting, make_preferential, \
    make_table, make_uniform

__all__ = [
    "ExperimentConfig",
    "DegreeRow",
    "ExperimentReport",
    "build_model",
    "is_two_colour_spec",
    "worker_count",
    "run_replicated",
    "analytic_reference",
    "compare",
]

TWO_COLOUR_FAMILIES = {"rna", "two-colour-uniform", "two-colour-grafting"}


def build_model(spec: dict):
    """Model from a config mapping: ``{"family": ..., <parameters>}``."""
    fam = spec.get("family")
    if fam == "preferential":
        return make_preferential(SplittingWeights(float(spec.get("a", 1.0)),
                                                  float(spec.get("b", 0.0))))
    if fam == "uniform":
        return make_uniform(float(spec.get("x", 0.0)))
    if fam == "grafting":
        return make_grafting(float(spec["alpha"]), float(spec["gamma"]))
    if fam == "table":
        return make_table(int(spec["d_max"]),
                          [(int(i), int(j), float(w)) for i, j, w in spec["entries"]])
    if fam == "rna":
        return make_rna()
    if fam == "two-colour-uniform":
        return make_two_colour_uniform(float(spec["a"]), float(spec["b"]))
    if fam == "two-colour-grafting":
        return make_two_colour_grafting(float(spec["a"]), float(spec["b"]),
                                        float(spec.get("alpha0", 0.5)))
    raise InvalidParameterError(f"unknown family {fam!r}")


def is_two_colour_spec(spec: dict) -> bool:
    return spec.get("family") in TWO_COLOUR_FAMILIES


@dataclass
class ExperimentConfig:
    model: dict
    t_final: int = 100_000
    replicas: int = 32
    thin: int = 0                      # 0: final census only
    K: int = 512
    tol: float = 1e-13
    seed: int = 20240901
    engine: str = "urn"                # "urn" | "tree"
    k_check: int = 8
    z_crit: float = 5.0
    force_unsupported: bool = False
    reference_model: Optional[dict] = None   # analytic override (negative controls)

    def to_dict(self) -> dict:
        d = {k: v for k, v in self.__dict__.items() if v is not None}
        return d

    @property
    def digest(self) -> str:
        return hashlib.sha256(
            json.dumps(self.to_dict(), sort_keys=True).encode()).hexdigest()

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - known
        if unknown:
            raise InvalidParameterError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)


def worker_count(replicas: int) -> int:
    """Worker cap: SPLITGROW_THREADS if set, else the machine's core count."""
    env = os.environ.get("SPLITGROW_THREADS")
    cap = int(env) if env else (os.cpu_count() or 1)
    return max(1, min(cap, replicas))


def _simulate_replica(payload):
    spec, engine, t_final, thin, child_seed = payload
    model = build_model(spec)
    rng = np.random.default_rng(child_seed)
    if isinstance(model, TwoColourModel):
        state = TwoColourState.single_edge(model)
        snaps = []
        colour_dev = 0
        wdrift = wclosed = 0.0
        steps = 0
        while state.t < t_final:
            state.step(rng)
            steps += 1
            if thin and steps % thin == 0:
                snaps.append(state.census())
        snaps.append(state.census())
        colour_dev = abs(state.colour_identity_deviation())
        wdrift, wclosed = state.weight_deviation()
        t, white, black = state.census()
        return {"kind": "two-colour", "t": t, "white": white, "black": black,
                "snapshots": snaps if thin else None,
                "checks": {"colour_identity_dev": colour_dev,
                           "weight_rel_drift": wdrift,
                           "weight_closed_form_rel_dev": wclosed}}

    state = (OrderedTree.single_edge(model) if engine == "tree"
             else UrnState.single_edge(model))
    snaps = run(state, t_final, rng, thin=thin or None)
    sum_dev, moment_dev, drift = state.census_deviations()
    wclosed = (abs(state.total_weight - state.expected_weight())
               / max(abs(state.total_weight), 1.0)) if model.is_linear() else float("nan")
    final = snaps[-1]
    return {"kind": "one-colour", "t": final.t, "counts": final.counts,
            "snapshots": snaps if thin else None,
            "checks": {"census_sum_dev": abs(sum_dev),
                       "census_moment_dev": abs(moment_dev),
                       "weight_rel_drift": drift,
                       "weight_closed_form_rel_dev": wclosed}}


def run_replicated(cfg: ExperimentConfig) -> list[dict]:
    """All replicas, merged in replica-index order (deterministic given the
    config); each carries its final census and invariant checks."""
    children = np.random.SeedSequence(cfg.seed).spawn(cfg.replicas)
    payloads = [(cfg.model, cfg.engine, cfg.t_final, cfg.thin, child)
                for child in children]
    w = worker_count(cfg.replicas)
    if w <= 1:
        return [_simulate_replica(p) for p in payloads]
    with ProcessPoolExecutor(max_workers=w) as pool:
        return list(pool.map(_simulate_replica, payloads))


# -- analytic side -----------------------------------------------------------


def analytic_reference(model, K: int, tol: float, k_report: int,
                       force_unsupported: bool = False):
    """Best analytic densities for the model: closed form when the family has
    one, the direct linear solve for bounded models, the fixed-point
    iteration otherwise.  Two-colour models return the reduction solution."""
    if isinstance(model, TwoColourModel):
        sol = solve_two_colour(model, K=K, tol=tol,
                               force_unsupported=force_unsupported)
        return sol, "reduction"
    cf = closed_form_for(model)
    if cf is not None:
        return cf.densities(k_report), "closed-form"
    if model.d_max is not None:
        sol = solve_finite(model)
        dens = np.zeros(k_report)
        dens[:min(k_report, sol.K)] = sol.densities[:k_report]
        return dens, "linear"
    sol = fixed_point_densities(model, K=K, tol=tol,
                                force_unsupported=force_unsupported)
    dens = np.zeros(k_report)
    dens[:min(k_report, sol.K)] = sol.densities[:k_report]
    return dens, "fixed-point"


# -- report -------------------------------------------------------------------


@dataclass
class DegreeRow:
    colour: str           # "" for one-colour, else "white"/"black"
    k: int
    method: str
    analytic: float
    emp_mean: float
    stderr: float
    z: float


@dataclass
class ExperimentReport:
    rows: list[DegreeRow]
    checks: list[tuple[str, str]]
    seed: int
    digest: str
    replicas: int
    t_final: int
    engine: str
    k_check: int
    z_crit: float
    runtime_s: float = 0.0            # never serialised; byte-stable outputs

    def violations(self) -> list[DegreeRow]:
        return [r for r in self.rows
                if r.k <= self.k_check and np.isfinite(r.z) and abs(r.z) > self.z_crit]

    @property
    def ok(self) -> bool:
        return not self.violations()

    def write_csv(self, fh) -> None:
        fh.write(f"# seed,{self.seed}\n")
        fh.write(f"# config_digest,{self.digest}\n")
        fh.write(f"# replicas,{self.replicas}\n")
        fh.write(f"# t_final,{self.t_final}\n")
        fh.write(f"# engine,{self.engine}\n")
        for name, val in self.checks:
            fh.write(f"# check_{name},{val}\n")
        fh.write("colour,k,method,analytic,emp_mean,stderr,z\n")
        for r in self.rows:
            fh.write(f"{r.colour},{r.k},{r.method},{r.analytic:.17g},"
                     f"{r.emp_mean:.17g},{r.stderr:.17g},{r.z:.17g}\n")


def _mean_se(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    mean = values.mean(axis=0)
    if values.shape[0] >= 2:
        se = values.std(axis=0, ddof=1) / np.sqrt(values.shape[0])
    else:
        se = np.zeros_like(mean)
    return mean, se


def _z_scores(mean, se, analytic):
    z = np.zeros_like(mean)
    for idx in range(len(mean)):
        diff = mean[idx] - analytic[idx]
        if se[idx] > 0:
            z[idx] = diff / se[idx]
        else:
            z[idx] = 0.0 if diff == 0 else np.inf
    return z


def _stack(counts_list: list[np.ndarray], width: int) -> np.ndarray:
    out = np.zeros((len(counts_list), width))
    for r, c in enumerate(counts_list):
        n = min(len(c), width)
        out[r, :n] = c[:n]
    return out


def compare(cfg: ExperimentConfig, k_report: int = 16) -> ExperimentReport:
    """Run the replicated experiment and join it against the analytic
    densities; the report's ``ok`` drives the CLI exit code."""
    start = time.monotonic()
    model = build_model(cfg.model)
    ref_model = build_model(cfg.reference_model) if cfg.reference_model else model
    results = run_replicated(cfg)
    rows: list[DegreeRow] = []
    checks: list[tuple[str, str]] = []

    def fmt(v):
        return f"{v:.17g}" if isinstance(v, float) else str(v)

    agg: dict[str, float] = {}
    for res in results:
        for name, val in res["checks"].items():
            if not (isinstance(val, float) and np.isnan(val)):
                agg[name] = max(agg.get(name, 0.0), float(val))
    for name in sorted(agg):
        checks.append((name, fmt(agg[name])))
    if cfg.force_unsupported:
        checks.append(("forced_unsupported", "true"))

    if results[0]["kind"] == "two-colour":
        sol, method = analytic_reference(ref_model, cfg.K, cfg.tol, k_report,
                                         cfg.force_unsupported)
        white = _stack([r["white"] for r in results], k_report) / cfg.t_final
        black = _stack([r["black"] for r in results], k_report) / cfg.t_final
        for colour, emp, ana in (("white", white, sol.e_white),
                                 ("black", black, sol.e_black)):
            ana_v = np.zeros(k_report)
            ana_v[:min(k_report, len(ana))] = ana[:k_report]
            mean, se = _mean_se(emp)
            z = _z_scores(mean, se, ana_v)
            rows.extend(DegreeRow(colour, k + 1, method, float(ana_v[k]),
                                  float(mean[k]), float(se[k]), float(z[k]))
                        for k in range(k_report))
        # vertex-normalised colour sum against the reduced one-colour model
        if sol.one_colour is not None:
            rho_w, rho_b = densities_from_e(sol)
            upto = min(cfg.k_check, len(rho_w))
            cross = np.max(np.abs((rho_w + rho_b)[:upto]
                                  - sol.one_colour.densities[:upto]))
            checks.append(("colour_sum_vs_one_colour_max_dev", fmt(float(cross))))
    else:
        analytic, method = analytic_reference(ref_model, cfg.K, cfg.tol, k_report,
                                              cfg.force_unsupported)
        emp = _stack([r["counts"] for r in results], k_report) / cfg.t_final
        mean, se = _mean_se(emp)
        z = _z_scores(mean, se, analytic)
        rows.extend(DegreeRow("", k + 1, method, float(analytic[k]),
                              float(mean[k]), float(se[k]), float(z[k]))
                    for k in range(k_report))

    return ExperimentReport(rows=rows, checks=checks, seed=cfg.seed,
                            digest=cfg.digest, replicas=cfg.replicas,
                            t_final=cfg.t_final, engine=cfg.engine,
                            k_check=cfg.k_check, z_crit=cfg.z_crit,
                            runtime_s=time.monotonic() - start)
