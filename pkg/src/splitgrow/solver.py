"""Limiting degree densities from the stationary census equations.

Two routes are provided:

* ``fixed_point_densities`` runs the from-below iteration

      a_1  <- (s + sum_{i>=2} (i*w[1,i+1] - s) * a_i) / (w_2 + s)
      a_k  <- (sum_{i>=k-1} i*w[k,i-k+2] * a_i) / (w_2 + w_k),    k >= 2

  started from the zero vector, with ``s = inf {i*w[1,i+1]}``.  For
  unbounded models whose tail is two-banded with linear band masses
  (``i*w[1,i+1] = pg*i+qg``, ``i*w[2,i] = ph*i+qh`` beyond some degree),
  the sums over ``i > K`` are closed exactly: beyond the truncation the
  stationary equations collapse to the two-term recursion
  ``a_i = a_{i-1} * g(i-1) / (w_2 + g(i))``, whose ratio products are Gamma
  ratios, and the telescoping identity

      sum_{i>=N} Gamma(i+u)/Gamma(i+w) = Gamma(N+u) / ((w-1-u)*Gamma(N+w-1))

  turns every required tail sum into a closed expression.  The truncated
  system then has the *exact* restriction of the infinite solution as its
  fixed point, which is what lets power-law families meet tight tolerances
  at moderate K.

* ``solve_finite`` solves the bounded-degree stationary system directly,
  replacing one redundant row by the normalisation ``sum a = 1``.

The iterates of the from-below scheme are nondecreasing whenever every
update coefficient is nonnegative, i.e. for unbounded models (all band
masses sit at or above ``s``).  For bounded models the first row contains
the coefficient ``-s`` at the top degree, the early iterates overshoot
(``a_1^{(1)} = s/(w_2+s)`` may exceed the limit) and convergence is not
monotone; the fixed point is still the normalised solution provided the
splitting weights are linear in the degree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import (InvalidParameterError, NoConvergenceError, NonPositiveError,
                     RankDeficientError, RegimeError)
from .weights import LinearTail, Regime, WeightModel, classify_regime

__all__ = [
    "ResidualReport",
    "DensitySolution",
    "fixed_point_densities",
    "solve_finite",
    "residuals",
]


@dataclass
class ResidualReport:
    """Stationarity residuals ``r_k = a_k*(w_2+w_k) - sum_i i*w[k,i-k+2]*a_i``
    (tail sums closed when the model admits it) plus the deviations of the
    two census normalisations and the estimated mass beyond the truncation."""

    per_k: np.ndarray
    sum_dev: float
    moment_dev: float
    tail_mass: float

    @property
    def max_abs(self) -> float:
        return float(np.max(np.abs(self.per_k))) if len(self.per_k) else 0.0


@dataclass
class DensitySolution:
    densities: np.ndarray
    K: int
    method: str
    regime: Regime
    s: float
    iterations: int = 0
    last_step: float = 0.0
    residuals: Optional[ResidualReport] = None
    monotone_ok: bool = True
    monotone_violation: float = 0.0
    unsupported: bool = False
    warnings: list[str] = field(default_factory=list)
    iterates: Optional[np.ndarray] = None

    @property
    def sum_a(self) -> float:
        return float(self.densities.sum())

    @property
    def sum_ka(self) -> float:
        return float((np.arange(1, self.K + 1) * self.densities).sum())

    def __getitem__(self, k: int) -> float:
        """Density of degree ``k`` (1-based)."""
        return float(self.densities[k - 1])


# -- tail closure ---------------------------------------------------------------


@dataclass(frozen=True)
class _TailClosure:
    """Exact sums over the neglected degrees ``i > K``, all relative to a_K:
    Q0 = sum R_i, Q0m = sum i*R_i, Qg = sum g(i)*R_i, Qh = sum h(i)*R_i,
    where R_i = a_i/a_K under the two-term tail recursion."""

    Q0: float
    Q0m: float
    Qg: float
    Qh: float


def _tail_closure(tail: LinearTail, w2: float, K: int) -> Optional[_TailClosure]:
    if K < max(tail.start, 2):
        return None
    pg, qg, ph, qh = tail.pg, tail.qg, tail.ph, tail.qh
    if pg < 0 or tail.g(K + 1) < 0:
        return None
    if pg > 0:
        u = qg / pg
        v = (qg + w2) / pg
        if v - u <= 1:          # sum i*a_i would diverge; no valid closure
            return None
        con = (K + u) / (v - u)
        lin = (K + u) * (K + 1 + u) / (v - u - 1)
        return _TailClosure(Q0=con, Q0m=lin - u * con, Qg=pg * lin,
                            Qh=ph * lin + (qh - ph * u) * con)
    if qg == 0:
        return _TailClosure(0.0, 0.0, 0.0, 0.0)
    r = qg / (w2 + qg)
    geo = r / (1.0 - r)                      # = qg / w2
    q0m = K * geo + geo / (1.0 - r)
    return _TailClosure(Q0=geo, Q0m=q0m, Qg=qg * geo, Qh=ph * q0m + qh * geo)


def _band_sums(model: WeightModel, K: int):
    """Dense update matrix rows: B[k-1, i-1] = i * w[k, i-k+2] for i >= k-1."""
    pw = model.partition
    B = np.zeros((K, K))
    for k in range(1, K + 1):
        for i in range(max(k - 1, 1), K + 1):
            c = pw(k, i - k + 2)
            if c:
                B[k - 1, i - 1] = i * c
    return B


def _closure_for(model: WeightModel, K: int):
    notes = []
    clo = None
    if model.d_max is None:
        tail = model.partition.tail
        if tail is not None:
            clo = _tail_closure(tail, model.w2, K)
            if clo is None:
                notes.append("tail closure unavailable; zero-tail truncation used")
        elif model.family == "uniform":
            notes.append("super-exponential tail; zero-tail truncation used")
        else:
            notes.append("unbounded model without tail metadata; "
                         "zero-tail truncation may bias low degrees")
    return clo, notes


def fixed_point_densities(model: WeightModel, K: int = 512, tol: float = 1e-13,
                          max_iter: int = 1_000_000, record_iterates: bool = False,
                          force_unsupported: bool = False,
                          adaptive: bool = False) -> DensitySolution:
    """Minimal solution of the stationary system by monotone-style iteration.

    Parameters
    ----------
    model : WeightModel
    K : truncation; overridden by ``d_max`` when the model is bounded.
    tol : sup-norm step at which iteration stops.
    max_iter : iteration budget (NoConvergenceError beyond it).
    record_iterates : keep the full iterate history (for diagnostics/tests).
    force_unsupported : outside the guaranteed regime (``s <= 0``), fall back
        to a truncated linear solve and flag the result as unsupported.
    adaptive : double K until the first half of the vector moves by < tol.

    Returns the densities with residual diagnostics; the result of an
    unbounded model is the monotone-limit (minimal) solution.
    """
    if K < 2:
        raise InvalidParameterError("K must be >= 2")
    regime, s = classify_regime(model)
    if s <= 0.0 or regime is Regime.CASE_II:
        if not force_unsupported:
            raise RegimeError(
                f"regime {regime.value} with s = {s:g}: no convergence guarantee; "
                "pass force_unsupported=True for a truncated linear solve")
        sol = _truncated_stationary_solve(model, K, regime, s)
        return sol

    if adaptive and model.d_max is None:
        sol = _fixed_point_once(model, K, tol, max_iter, record_iterates, regime, s)
        while K <= 4096:
            bigger = _fixed_point_once(model, 2 * K, tol, max_iter,
                                       record_iterates, regime, s)
            drift = float(np.max(np.abs(bigger.densities[:K // 2]
                                        - sol.densities[:K // 2])))
            if drift < tol:
                bigger.warnings.append(f"adaptive: stable at K={K} (drift {drift:.2e})")
                return bigger
            K *= 2
            sol = bigger
        sol.warnings.append("adaptive: K ceiling reached")
        return sol

    return _fixed_point_once(model, K, tol, max_iter, record_iterates, regime, s)


def _fixed_point_once(model, K, tol, max_iter, record_iterates, regime, s):
    warnings: list[str] = []
    if model.d_max is not None and K != model.d_max:
        K = model.d_max
        warnings.append(f"bounded model: truncation set to d_max = {K}")
    if not model.is_linear(1e-6):
        warnings.append("splitting weights are not linear in the degree; the "
                        "fixed point need not be the normalised census limit")

    w2 = model.w2
    wk = model.splitting_weights(K)
    B = _band_sums(model, K)
    clo, notes = _closure_for(model, K)
    warnings.extend(notes)

    denom = np.concatenate([[w2 + s], w2 + wk[1:]])
    if np.any(denom <= 0):
        raise RegimeError("nonpositive update denominator (w_2 + w_k <= 0)")

    M = B / denom[:, None]
    # first row uses the shifted coefficients (i*w[1,i+1] - s), i >= 2
    M[0, :] = (B[0, :] - s) / (w2 + s)
    M[0, 0] = 0.0
    c = np.zeros(K)
    c[0] = s / (w2 + s)
    if clo is not None:
        M[0, K - 1] += (clo.Qg - s * clo.Q0) / (w2 + s)
        if K >= 2:
            M[1, K - 1] += clo.Qh / (w2 + wk[1])

    a = np.zeros(K)
    history = [a.copy()] if record_iterates else None
    monotone_violation = 0.0
    last_step = math.inf
    it = 0
    for it in range(1, max_iter + 1):
        a_new = M @ a + c
        neg = float(np.min(a_new - a))
        if neg < -monotone_violation:
            monotone_violation = -neg
        last_step = float(np.max(np.abs(a_new - a)))
        a = a_new
        if history is not None:
            history.append(a.copy())
        if last_step < tol:
            break
    else:
        raise NoConvergenceError(
            f"no convergence after {max_iter} iterations (last step {last_step:.3e})")

    res = _residual_report(model, a, K, clo)
    return DensitySolution(
        densities=a, K=K, method="fixed-point", regime=regime, s=s,
        iterations=it, last_step=last_step, residuals=res,
        monotone_ok=monotone_violation <= 1e-15,
        monotone_violation=monotone_violation,
        warnings=warnings,
        iterates=np.array(history) if history is not None else None)


# -- direct solve -----------------------------------------------------------------


def _stationary_matrix(model: WeightModel, K: int) -> np.ndarray:
    """Rows of ``a_k*(w_2+w_k) - sum_i i*w[k,i-k+2]*a_i = 0``."""
    B = _band_sums(model, K)
    wk = model.splitting_weights(K)
    A = B.copy()
    A[np.diag_indices(K)] -= model.w2 + wk
    return A


def solve_finite(model: WeightModel, tol: float = 1e-12) -> DensitySolution:
    """Direct solution for a bounded model: the stationary system has rank
    ``d_max - 1`` when every degree is leaf-reachable, and the normalisation
    ``sum rho = 1`` fixes the remaining constant.  ``sum k*rho = 2`` is
    verified afterwards rather than imposed."""
    D = model.d_max
    if D is None:
        raise InvalidParameterError("solve_finite needs a bounded model")
    regime, s = classify_regime(model)
    A = _stationary_matrix(model, D)
    rank = np.linalg.matrix_rank(A)
    if rank < D - 1:
        raise RankDeficientError(
            f"stationary system has rank {rank} < d_max-1 = {D - 1}; "
            "some degree below the bound is unreachable")

    # Replace the most redundant row by the normalisation; try the last row
    # first and fall back to the best-conditioned choice.
    rows = [D - 1] + list(range(D - 1))
    best = None
    for r in rows:
        Ar = A.copy()
        Ar[r, :] = 1.0
        b = np.zeros(D)
        b[r] = 1.0
        cond = np.linalg.cond(Ar)
        if best is None or cond < best[0]:
            best = (cond, Ar, b, r)
        if cond < 1e12:
            break
    _, Ar, b, _ = best
    rho = np.linalg.solve(Ar, b)

    warnings = []
    if np.any(rho < -tol):
        raise NonPositiveError(f"negative density: min rho = {rho.min():.3e}")
    if np.any(rho <= 0):
        warnings.append("some densities are zero (degenerate table)")
    moment = float((np.arange(1, D + 1) * rho).sum())
    if abs(moment - 2.0) > 1e-8:
        warnings.append(f"sum k*rho = {moment:.12g} deviates from 2; "
                        "weights are likely inconsistent")
    res = _residual_report(model, rho, D, None)
    return DensitySolution(densities=rho, K=D, method="linear", regime=regime, s=s,
                           residuals=res, warnings=warnings)


def _truncated_stationary_solve(model: WeightModel, K: int, regime, s) -> DensitySolution:
    """Forced fallback outside the guaranteed regime: truncate the stationary
    system at K, replace the last (most tail-damaged) row by the
    normalisation.  No census-limit claim attaches to the result."""
    A = _stationary_matrix(model, K)
    A[K - 1, :] = 1.0
    b = np.zeros(K)
    b[K - 1] = 1.0
    rho = np.linalg.lstsq(A, b, rcond=None)[0]
    res = _residual_report(model, rho, K, None)
    return DensitySolution(
        densities=rho, K=K, method="linear-truncated", regime=regime, s=s,
        residuals=res, unsupported=True,
        warnings=["forced solve outside the guaranteed regime; "
                  "no almost-sure census limit is claimed"])


# -- residuals ---------------------------------------------------------------------


def _residual_report(model: WeightModel, a: np.ndarray, K: int,
                     clo: Optional[_TailClosure]) -> ResidualReport:
    wk = model.splitting_weights(K)
    B = _band_sums(model, K)
    gains = B @ a
    if clo is not None and K >= 2:
        aK = a[K - 1]
        gains[0] += clo.Qg * aK
        gains[1] += clo.Qh * aK
        tail_mass = clo.Q0 * aK
        tail_moment = clo.Q0m * aK
    else:
        tail_mass = 0.0
        tail_moment = 0.0
    per_k = a * (model.w2 + wk) - gains
    ks = np.arange(1, K + 1)
    return ResidualReport(
        per_k=per_k,
        sum_dev=abs(float(a.sum()) + tail_mass - 1.0),
        moment_dev=abs(float((ks * a).sum()) + tail_moment - 2.0),
        tail_mass=float(tail_mass))


def residuals(model: WeightModel, a: np.ndarray, K: Optional[int] = None) -> ResidualReport:
    """Stationarity residuals of a density vector against the model."""
    a = np.asarray(a, dtype=float)
    if K is None:
        K = len(a)
    if len(a) < K:
        raise InvalidParameterError("density vector shorter than K")
    a = a[:K]
    clo, _ = _closure_for(model, K)
    return _residual_report(model, a, K, clo)
