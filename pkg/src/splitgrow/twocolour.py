"""Two-colour vertex splitting: recolouring blacks, splitting whites.

Every vertex is black or white.  A step selects a vertex with weight
``w_black(deg)`` (black) or ``w_white(deg)`` (white); a selected black is
recoloured white, a selected white splits into two *black* children under
the white partitioning weights.  The event clock ``t`` advances on every
step, so recolouring advances ``t`` without adding a vertex; with

    w_white(k) = (a - 3b/2)*k + a,     w_black(k) = (a - 3b/2)*k + b

the running totals obey, exactly,

    sum_k (3*n_white_k + 2*n_black_k) = t + 2
    sum_k (w_white_k*n_white_k + w_black_k*n_black_k) = (a-b)*t + b.

Per-degree counts over the event clock converge to limits
``e_white_k, e_black_k`` which this module computes by reducing to a
one-colour model (splitting weights ``w_black``, partitioning weights scaled
by ``w_black/w_white`` per split-degree class), splitting each one-colour
density by the per-degree ratio ``e_white/e_black = w_black/(w_white +
w2_white/3)``, and rescaling so ``sum(3*e_white + 2*e_black) = 1``.  The
RNA-folding instance is ``a = 1, b = 0`` with uniform white partitioning.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import InvalidParameterError, ReductionInvalidError
from .growth import FenwickSampler
from .solver import DensitySolution, fixed_point_densities
from .weights import PartitionWeights, SplittingWeights, WeightModel, LinearTail

__all__ = [
    "TwoColourModel",
    "TwoColourEvent",
    "TwoColourState",
    "TwoColourSolution",
    "make_rna",
    "make_two_colour_uniform",
    "make_two_colour_grafting",
    "step_two_colour",
    "reduce_to_one_colour",
    "solve_two_colour",
    "densities_from_e",
    "rna_closed_form",
]


class TwoColourModel:
    """Weights of the two-colour process.

    ``a`` and ``b`` fix both splitting-weight families (slope ``a - 3b/2``
    forces linear growth of the total weight); ``white_partition`` carries
    the symmetric partitioning weights of white splits, which must be
    consistent with ``w_white`` in the usual pair-sum sense.
    """

    def __init__(self, a: float, b: float, white_partition: PartitionWeights,
                 family: str = "two-colour", params: Optional[dict] = None):
        if not a - b > 0:
            raise InvalidParameterError(f"needs a - b > 0, got a={a}, b={b}")
        c = a - 1.5 * b
        if white_partition.d_max is None and c < 0:
            raise InvalidParameterError("unbounded model needs slope a - 3b/2 >= 0")
        self.a = float(a)
        self.b = float(b)
        self.family = family
        self.params = dict(params or {})
        self.black = SplittingWeights(c, b)
        if self.black(1) < 0 or SplittingWeights(c, a)(1) < 0:
            raise InvalidParameterError("degree-1 weights must be nonnegative")
        # the white side reuses the one-colour machinery for split-size laws
        self.white = WeightModel(white_partition, SplittingWeights(c, a),
                                 family=f"{family}-white")
        if self.white.linear_fit_residual > 1e-9:
            raise InvalidParameterError(
                "white partitioning weights are inconsistent with w_white "
                f"(max residual {self.white.linear_fit_residual:.3g})")

    def w_white(self, k):
        return self.white.splitting(k)

    def w_black(self, k):
        return self.black(k)

    @property
    def d_max(self) -> Optional[int]:
        return self.white.partition.d_max

    @property
    def weight_growth_rate(self) -> float:
        """a - b, which equals w_black(2)/2 and w_white(2)/3."""
        return self.a - self.b

    def __repr__(self):
        return f"TwoColourModel(a={self.a:g}, b={self.b:g}, family={self.family!r})"


def make_two_colour_uniform(a: float, b: float) -> TwoColourModel:
    """Uniform white partitioning: every ordered child pair of a white split
    is equally likely."""
    c = a - 1.5 * b

    def fn(i, j):
        d = i + j - 2
        if d < 1:
            return 0.0
        return 2.0 * (c * d + a) / (d * (d + 1))

    pw = PartitionWeights(fn, d_max=None, tail=None)
    return TwoColourModel(a, b, pw, family="two-colour-uniform",
                          params={"a": float(a), "b": float(b)})


def make_rna() -> TwoColourModel:
    """The RNA-folding instance: ``w_white(k) = k+1``, ``w_black(k) = k``,
    uniform white partitioning."""
    m = make_two_colour_uniform(1.0, 0.0)
    m.family = "rna"
    return m


def make_two_colour_grafting(a: float, b: float, alpha0: float) -> TwoColourModel:
    """Two-banded white partitioning: a white split of degree ``i`` sheds a
    leaf with probability ``1 - alpha0*i/(2*w_white_i)`` and otherwise
    produces the pair ``(2, i)``."""
    c = a - 1.5 * b
    ww = SplittingWeights(c, a)
    if not 0.0 <= alpha0 < 1.0:
        raise InvalidParameterError("alpha0 must lie in [0, 1)")
    pg = c - alpha0 / 2.0
    if pg < 0 or 2 * pg + a <= 0:
        raise InvalidParameterError("leaf mass of white splits must stay positive")

    def fn(i, j):
        d = i + j - 2
        if d < 1:
            return 0.0
        if d == 1:
            return ww(1) if i == 1 else 0.0
        g = pg * d + a
        if i == 1 and j == d + 1:
            return g / d
        if i == 2 and j == d:
            h = alpha0 * d / 2.0
            return h if d == 2 else h / d
        return 0.0

    tail = LinearTail(start=2, pg=pg, qg=a, ph=alpha0 / 2.0, qh=0.0)
    pw = PartitionWeights(fn, d_max=None, tail=tail)
    return TwoColourModel(a, b, pw, family="two-colour-grafting",
                          params={"a": float(a), "b": float(b), "alpha0": float(alpha0)})


# -- simulation -------------------------------------------------------------------


@dataclass(frozen=True)
class TwoColourEvent:
    t: int
    kind: str                      # "recolour" | "split"
    degree: int
    child_degrees: Optional[tuple[int, int]] = None


class TwoColourState:
    """Per-degree census of both colours plus the event clock."""

    def __init__(self, model: TwoColourModel,
                 white: Optional[list[int]] = None,
                 black: Optional[list[int]] = None,
                 t: Optional[int] = None):
        self.model = model
        self.white_counts: list[int] = list(white or [])
        self.black_counts: list[int] = list(black or [])
        if t is None:
            # default clock: a fresh process started from a single edge has
            # t = vertex count = 2; general states must pass t explicitly
            t = sum(self.white_counts) + sum(self.black_counts)
        self.t = int(t)
        self.total_weight = float(
            sum(n * model.w_white(d + 1) for d, n in enumerate(self.white_counts) if n)
            + sum(n * model.w_black(d + 1) for d, n in enumerate(self.black_counts) if n))
        self._sampler = FenwickSampler(16)
        for d0, n in enumerate(self.white_counts):
            if n:
                self._sampler.set(2 * d0, n * model.w_white(d0 + 1))
        for d0, n in enumerate(self.black_counts):
            if n:
                self._sampler.set(2 * d0 + 1, n * model.w_black(d0 + 1))

    @classmethod
    def single_edge(cls, model: TwoColourModel) -> "TwoColourState":
        """Single edge, both endpoints black, at t = 2."""
        return cls(model, white=[0], black=[2], t=2)

    # -- bookkeeping ------------------------------------------------------

    def _bump_white(self, d: int, delta: int) -> None:
        while len(self.white_counts) < d:
            self.white_counts.append(0)
        self.white_counts[d - 1] += delta
        self._sampler.set(2 * (d - 1),
                          self.white_counts[d - 1] * self.model.w_white(d))

    def _bump_black(self, d: int, delta: int) -> None:
        while len(self.black_counts) < d:
            self.black_counts.append(0)
        self.black_counts[d - 1] += delta
        self._sampler.set(2 * (d - 1) + 1,
                          self.black_counts[d - 1] * self.model.w_black(d))

    def step(self, rng) -> TwoColourEvent:
        idx = self._sampler.sample(rng)
        d = idx // 2 + 1
        m = self.model
        if idx % 2 == 1:                     # black vertex: recolour to white
            self._bump_black(d, -1)
            self._bump_white(d, +1)
            self.t += 1
            self.total_weight += m.w_white(d) - m.w_black(d)
            return TwoColourEvent(self.t, "recolour", d)
        k = m.white.sample_split(d, rng)      # white vertex: split into blacks
        ell = d + 2 - k
        self._bump_white(d, -1)
        self._bump_black(k, +1)
        self._bump_black(ell, +1)
        self.t += 1
        self.total_weight += m.w_black(k) + m.w_black(ell) - m.w_white(d)
        return TwoColourEvent(self.t, "split", d, (k, ell))

    # -- invariants ---------------------------------------------------------

    def colour_identity_deviation(self) -> int:
        """``sum(3*n_white + 2*n_black) - (t + 2)``; exactly zero."""
        tot = 3 * sum(self.white_counts) + 2 * sum(self.black_counts)
        return tot - (self.t + 2)

    def weight_deviation(self) -> tuple[float, float]:
        """(relative drift vs recomputation, relative deviation from the
        closed form ``(a-b)*t + b``)."""
        m = self.model
        exact = (sum(n * m.w_white(d + 1) for d, n in enumerate(self.white_counts) if n)
                 + sum(n * m.w_black(d + 1) for d, n in enumerate(self.black_counts) if n))
        closed = m.weight_growth_rate * self.t + m.b
        scale = max(abs(exact), 1.0)
        return (abs(self.total_weight - exact) / scale,
                abs(self.total_weight - closed) / scale)

    def census(self) -> tuple[int, np.ndarray, np.ndarray]:
        k = max(len(self.white_counts), len(self.black_counts), 1)
        w = np.zeros(k, dtype=np.int64)
        bl = np.zeros(k, dtype=np.int64)
        w[:len(self.white_counts)] = self.white_counts
        bl[:len(self.black_counts)] = self.black_counts
        return self.t, w, bl


def step_two_colour(state: TwoColourState, rng) -> TwoColourEvent:
    return state.step(rng)


# -- solving ----------------------------------------------------------------------


def reduce_to_one_colour(model2: TwoColourModel) -> WeightModel:
    """One-colour model with the same summed densities: splitting weights
    ``w_black``, partitioning weights scaled by ``w_black/w_white`` on each
    split-degree class."""
    white_pw = model2.white.partition
    w_white = model2.w_white
    w_black = model2.w_black

    def fn(i, j):
        d = i + j - 2
        if d < 1:
            return 0.0
        base = white_pw(i, j)
        if base == 0.0:
            return 0.0
        ww = w_white(d)
        if ww == 0.0:
            raise ZeroDivisionError(
                f"white splitting weight vanishes at degree {d} where "
                "partition mass exists")
        return w_black(d) / ww * base

    c = model2.black.a
    limit = None
    if white_pw.tail is not None:
        glim = white_pw.tail.g_limit
        if math.isinf(glim):
            limit = math.inf
        else:
            ratio = 1.0 if c > 0 else (model2.b / model2.a if model2.a else None)
            limit = None if ratio is None else glim * ratio
    elif model2.family in ("rna", "two-colour-uniform"):
        limit = 2.0 * c if c > 0 else 0.0
    pw = PartitionWeights(fn, d_max=white_pw.d_max, tail=None)
    red = WeightModel(pw, model2.black, family="reduced",
                      params={"from": model2.family}, leaf_mass_limit=limit)
    if red.linear_fit_residual > 1e-9:
        raise ReductionInvalidError(
            f"reduced model inconsistent (residual {red.linear_fit_residual:.3g})")
    return red


@dataclass
class TwoColourSolution:
    e_white: np.ndarray
    e_black: np.ndarray
    K: int
    method: str
    residual_selection: np.ndarray      # family: (w_b + w2_b/2) e_b = sum i w_w[k,.] e_w
    residual_colour: np.ndarray         # family: (w_w + w2_w/3) e_w = w_b e_b
    colour_sum_dev: float               # |sum(3 e_w + 2 e_b) - 1|
    weight_sum_dev: float               # |sum(w_w e_w + w_b e_b) - w2_b/2|
    one_colour: Optional[DensitySolution] = None
    warnings: list[str] = field(default_factory=list)

    @property
    def max_residual(self) -> float:
        return max(float(np.max(np.abs(self.residual_selection))),
                   float(np.max(np.abs(self.residual_colour))))


def _two_colour_residuals(m2: TwoColourModel, e_w: np.ndarray, e_b: np.ndarray):
    K = len(e_w)
    ks = np.arange(1, K + 1, dtype=float)
    w_w = m2.white.splitting(ks)
    w_b = m2.black(ks)
    w2b_half = m2.w_black(2) / 2.0
    w2w_third = m2.w_white(2) / 3.0
    pw = m2.white.partition
    gains = np.zeros(K)
    for k in range(1, K + 1):
        acc = 0.0
        for i in range(max(k - 1, 1), K + 1):
            cij = pw(k, i - k + 2)
            if cij:
                acc += i * cij * e_w[i - 1]
        gains[k - 1] = acc
    res_sel = (w_b + w2b_half) * e_b - gains
    res_col = (w_w + w2w_third) * e_w - w_b * e_b
    colour_dev = abs(float((3.0 * e_w + 2.0 * e_b).sum()) - 1.0)
    weight_dev = abs(float((w_w * e_w + w_b * e_b).sum()) - w2b_half)
    return res_sel, res_col, colour_dev, weight_dev


def solve_two_colour(model2: TwoColourModel, K: int = 512, tol: float = 1e-13,
                     max_iter: int = 1_000_000, method: str = "reduction",
                     force_unsupported: bool = False) -> TwoColourSolution:
    """Limiting per-degree counts over the event clock.

    ``method="reduction"`` (default) solves the reduced one-colour model and
    splits each density by the per-degree colour ratio; ``method="direct"``
    solves the truncated two-family linear system instead.
    """
    if method == "reduction":
        red = reduce_to_one_colour(model2)
        one = fixed_point_densities(red, K=K, tol=tol, max_iter=max_iter,
                                    force_unsupported=force_unsupported)
        Ke = one.K
        ks = np.arange(1, Ke + 1, dtype=float)
        ratio = model2.black(ks) / (model2.white.splitting(ks) + model2.w_white(2) / 3.0)
        u = one.densities / (1.0 + ratio)
        lam = 1.0 / float((u * (2.0 + 3.0 * ratio)).sum())
        e_b = lam * u
        e_w = ratio * e_b
        warnings = list(one.warnings)
    elif method == "direct":
        e_w, e_b = _direct_two_colour(model2, K)
        Ke = K
        one = None
        warnings = ["direct truncated solve; no constructive convergence guarantee"]
    else:
        raise InvalidParameterError(f"unknown method {method!r}")

    res_sel, res_col, cdev, wdev = _two_colour_residuals(model2, e_w, e_b)
    return TwoColourSolution(e_white=e_w, e_black=e_b, K=Ke, method=method,
                             residual_selection=res_sel, residual_colour=res_col,
                             colour_sum_dev=cdev, weight_sum_dev=wdev,
                             one_colour=one, warnings=warnings)


def _direct_two_colour(m2: TwoColourModel, K: int):
    """Truncated linear solve of the two equation families; the unknown vector
    is [e_black, e_white] and the most tail-damaged selection row is replaced
    by the colour normalisation."""
    ks = np.arange(1, K + 1, dtype=float)
    w_w = m2.white.splitting(ks)
    w_b = m2.black(ks)
    pw = m2.white.partition
    A = np.zeros((2 * K, 2 * K))
    b = np.zeros(2 * K)
    for k in range(1, K + 1):                     # selection family
        A[k - 1, k - 1] = w_b[k - 1] + m2.w_black(2) / 2.0
        for i in range(max(k - 1, 1), K + 1):
            cij = pw(k, i - k + 2)
            if cij:
                A[k - 1, K + i - 1] -= i * cij
    for k in range(1, K + 1):                     # colour-exchange family
        A[K + k - 1, K + k - 1] = w_w[k - 1] + m2.w_white(2) / 3.0
        A[K + k - 1, k - 1] = -w_b[k - 1]
    A[K - 1, :] = np.concatenate([np.full(K, 2.0), np.full(K, 3.0)])
    b[K - 1] = 1.0
    z = np.linalg.lstsq(A, b, rcond=None)[0]
    return z[K:], z[:K]


def densities_from_e(sol: TwoColourSolution) -> tuple[np.ndarray, np.ndarray]:
    """Vertex-normalised degree densities: each colour's counts divided by
    the total vertex density ``sum(e_white + e_black)``."""
    denom = float((sol.e_white + sol.e_black).sum())
    return sol.e_white / denom, sol.e_black / denom


def rna_closed_form(k: int) -> tuple[float, float]:
    """Exact RNA limits ``e_white_k = 2^k k / (e^2 (k+2)!)`` and
    ``e_black_k = 2^k / (e^2 (k+1)!)``."""
    if k < 1:
        raise InvalidParameterError("k must be >= 1")
    lw = k * math.log(2.0) + math.log(k) - 2.0 - math.lgamma(k + 3)
    lb = k * math.log(2.0) - 2.0 - math.lgamma(k + 2)
    return math.exp(lw), math.exp(lb)
