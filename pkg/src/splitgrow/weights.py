"""Weight models for vertex-splitting trees.

A model is a pair of weight families on degrees:

* partitioning weights ``w[i, j] >= 0``, symmetric in ``(i, j)``, governing
  how a splitting vertex of degree ``i + j - 2`` distributes its edges over
  the two children (which then have degrees ``i`` and ``j``), and
* splitting weights ``w_i`` controlling which vertex splits; consistency
  demands ``w_i = (i/2) * sum_{j=1..i+1} w[j, i+2-j]``.

The built-in families are constructed here, together with validation of the
standard conditions (linear splitting weights, reachability of every degree
up to the bound, splittability of the top degree) and classification of the
convergence regime via ``s = inf {i * w[1, i+1]}``.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterable, Optional

import numpy as np

from .errors import InvalidDegreeError, InvalidParameterError, UnknownTailError

__all__ = [
    "Regime",
    "SplittingWeights",
    "LinearTail",
    "PartitionWeights",
    "WeightModel",
    "derive_splitting_weights",
    "validate_model",
    "classify_regime",
    "make_preferential",
    "make_uniform",
    "make_alpha_class",
    "make_grafting",
    "make_table",
    "ConditionReport",
    "ValidationReport",
]


class Regime(Enum):
    """Convergence regime of a weight model.

    CASE_I   : some leaf-producing weight w[1, i+1] vanishes (in particular
               every bounded-degree model).
    CASE_II  : all w[1, i+1] positive but inf {i * w[1, i+1]} = 0; the
               density iteration carries no convergence guarantee.
    CASE_III : inf {i * w[1, i+1]} > 0 with no forced zero below the bound.
    """

    CASE_I = "I"
    CASE_II = "II"
    CASE_III = "III"


@dataclass(frozen=True)
class SplittingWeights:
    """Linear splitting weights ``w_i = a*i + b``."""

    a: float
    b: float

    def __call__(self, i):
        return self.a * i + self.b

    @property
    def offset(self) -> float:
        """Normalised offset ``x = b/a``; degree statistics of a model with
        ``a != 0`` depend on the weights only through ``x``."""
        if self.a == 0:
            raise InvalidParameterError("offset undefined for constant weights (a = 0)")
        return self.b / self.a


@dataclass(frozen=True)
class LinearTail:
    """Declares that for split degrees ``i >= start`` the only positive
    partitioning weights are the two-banded pair

        w[1, i+1] = g(i)/i   with g(i) = pg*i + qg,
        w[2, i]   = h(i)/i   with h(i) = ph*i + qh,

    except on the diagonal (``i == 2``) where ``w[2, 2] = h(2)/2`` would be
    counted twice by symmetry, so ``w[2, 2] = h(2)`` instead.

    A linear tail admits exact closed forms for all the tail sums the
    density solver needs, which is what makes truncation-free accuracy
    possible for power-law families.
    """

    start: int
    pg: float
    qg: float
    ph: float = 0.0
    qh: float = 0.0

    def g(self, i):
        return self.pg * i + self.qg

    def h(self, i):
        return self.ph * i + self.qh

    @property
    def g_limit(self) -> float:
        """Limit of g(i) = i * w[1, i+1] as i grows."""
        return math.inf if self.pg > 0 else self.qg


class PartitionWeights:
    """Symmetric nonnegative partitioning weights with optional degree bound.

    Parameters
    ----------
    fn : callable
        ``fn(i, j) -> float`` for ``i <= j``; symmetry and out-of-range
        zeroing are applied by the wrapper.
    d_max : int or None
        Finite degree bound; any index beyond it maps to weight zero.
    tail : LinearTail or None
        Two-banded tail description for unbounded families, when available.
    """

    def __init__(self, fn: Callable[[int, int], float], d_max: Optional[int] = None,
                 tail: Optional[LinearTail] = None):
        if d_max is not None and d_max < 2:
            raise InvalidParameterError("d_max must be at least 2")
        self._fn = fn
        self.d_max = d_max
        self.tail = tail

    def __call__(self, i: int, j: int) -> float:
        if i < 1 or j < 1:
            return 0.0
        if self.d_max is not None and (i > self.d_max or j > self.d_max):
            return 0.0
        if i > j:
            i, j = j, i
        return float(self._fn(i, j))

    @classmethod
    def from_table(cls, d_max: int, entries: Iterable[tuple[int, int, float]]) -> "PartitionWeights":
        """Build a bounded-degree table from ``(i, j, weight)`` triples.

        Entries are symmetrised; omitted pairs are zero.
        """
        table: dict[tuple[int, int], float] = {}
        for i, j, w in entries:
            i, j = int(i), int(j)
            if i < 1 or j < 1:
                raise InvalidParameterError(f"table indices must be >= 1, got ({i}, {j})")
            if i > d_max or j > d_max:
                raise InvalidParameterError(
                    f"table entry ({i}, {j}) exceeds d_max = {d_max}")
            w = float(w)
            if not math.isfinite(w) or w < 0:
                raise InvalidParameterError(f"weight for ({i}, {j}) must be finite and >= 0")
            key = (min(i, j), max(i, j))
            if key in table and table[key] != w:
                raise InvalidParameterError(f"conflicting entries for pair {key}")
            table[key] = w
        return cls(lambda i, j: table.get((i, j), 0.0), d_max=d_max)


def derive_splitting_weights(pw: PartitionWeights, i_max: int) -> np.ndarray:
    """Splitting weights implied by the partitioning weights.

    Returns ``w_1 .. w_{i_max}`` with ``w_i = (i/2) * sum_{j=1..i+1} w[j, i+2-j]``.
    """
    if i_max < 1:
        raise InvalidParameterError("i_max must be >= 1")
    out = np.empty(i_max)
    for i in range(1, i_max + 1):
        out[i - 1] = (i / 2.0) * math.fsum(pw(j, i + 2 - j) for j in range(1, i + 2))
    return out


class WeightModel:
    """A partitioning-weight family together with its splitting weights.

    Instances are immutable after construction and safe to share across
    concurrently running simulation replicas.  The per-degree split-size
    distributions are cached lazily; cache writes are idempotent.
    """

    def __init__(self, partition: PartitionWeights,
                 splitting: Optional[SplittingWeights] = None,
                 family: str = "custom", params: Optional[dict] = None,
                 leaf_mass_limit: Optional[float] = None,
                 fit_range: int = 16):
        self.partition = partition
        self.family = family
        self.params = dict(params or {})
        n_fit = min(fit_range, partition.d_max) if partition.d_max else fit_range
        derived = derive_splitting_weights(partition, max(n_fit, 2))
        given_splitting = splitting is not None
        if splitting is None:
            a = derived[1] - derived[0]
            b = 2.0 * derived[0] - derived[1]
            splitting = SplittingWeights(a, b)
        self.splitting = splitting
        fitted = splitting.a * np.arange(1, len(derived) + 1) + splitting.b
        self.linear_fit_residual = float(np.max(np.abs(derived - fitted)))
        # explicit splitting weights assert consistency; otherwise fall back
        # to the pair-sum weights whenever the linear fit does not hold
        self._trust_linear = given_splitting or self.linear_fit_residual <= 1e-9
        self._derived_cache: dict[int, float] = {
            i + 1: float(v) for i, v in enumerate(derived)}
        self._leaf_mass_limit = leaf_mass_limit
        self._split_cache: dict[int, tuple[list[float], float]] = {}
        self._regime: Optional[tuple[Regime, float]] = None

    # -- basic accessors ---------------------------------------------------

    @property
    def d_max(self) -> Optional[int]:
        return self.partition.d_max

    def w(self, i: int) -> float:
        """Splitting weight of degree ``i`` (pair-sum weight for tables that
        are not linear-consistent)."""
        if self._trust_linear:
            return self.splitting(i)
        got = self._derived_cache.get(i)
        if got is None:
            got = (i / 2.0) * math.fsum(self.partition(j, i + 2 - j)
                                        for j in range(1, i + 2))
            self._derived_cache[i] = got
        return got

    def splitting_weights(self, k_max: int) -> np.ndarray:
        """Vector ``w_1 .. w_{k_max}``."""
        if self._trust_linear:
            return self.splitting(np.arange(1, k_max + 1, dtype=float))
        return np.array([self.w(i) for i in range(1, k_max + 1)])

    @property
    def w2(self) -> float:
        return self.w(2)

    def is_linear(self, tol: float = 1e-9) -> bool:
        return self.linear_fit_residual <= tol

    def leaf_mass(self, i: int) -> float:
        """``i * w[1, i+1]``, the rate at which degree-``i`` splits shed leaves."""
        return i * self.partition(1, i + 1)

    @property
    def leaf_mass_limit(self) -> Optional[float]:
        if self._leaf_mass_limit is not None:
            return self._leaf_mass_limit
        if self.partition.tail is not None:
            return self.partition.tail.g_limit
        return None

    @property
    def regime(self) -> Regime:
        return self._classify()[0]

    @property
    def s(self) -> float:
        """``inf { i * w[1, i+1] : 1 <= i < d_max }``."""
        return self._classify()[1]

    def _classify(self) -> tuple[Regime, float]:
        if self._regime is None:
            self._regime = classify_regime(self)
        return self._regime

    # -- split-size law ----------------------------------------------------

    def split_distribution(self, i: int) -> tuple[list[float], float]:
        """Cumulative weights of the ordered child-degree pairs of a
        degree-``i`` split.

        Entry ``k-1`` accumulates ``(i/2) * w[k, i+2-k]`` for ``k = 1..i+1``;
        the pair ``(k, i+2-k)`` has probability ``(i/2) * w[k, i+2-k] / w_i``.
        """
        got = self._split_cache.get(i)
        if got is not None:
            return got
        if i < 1:
            raise InvalidDegreeError(f"degree must be >= 1, got {i}")
        cum: list[float] = []
        total = 0.0
        half_i = i / 2.0
        for k in range(1, i + 2):
            total += half_i * self.partition(k, i + 2 - k)
            cum.append(total)
        self._split_cache[i] = (cum, total)
        return cum, total

    def split_probabilities(self, i: int) -> np.ndarray:
        cum, total = self.split_distribution(i)
        if total <= 0:
            raise InvalidDegreeError(f"degree {i} has no admissible split")
        return np.diff(np.concatenate([[0.0], cum])) / total

    def sample_split(self, i: int, rng) -> int:
        """Draw the first child degree ``k`` of a degree-``i`` split."""
        cum, total = self.split_distribution(i)
        if total <= 0:
            raise InvalidDegreeError(f"degree {i} has no admissible split")
        return bisect.bisect_right(cum, rng.random() * total) + 1

    def __repr__(self):
        bound = self.d_max if self.d_max is not None else "inf"
        return (f"WeightModel(family={self.family!r}, params={self.params}, "
                f"w_i={self.splitting.a:g}*i{self.splitting.b:+g}, d_max={bound})")


# -- validation --------------------------------------------------------------


@dataclass
class ConditionReport:
    ok: Optional[bool]      # None means not applicable / not checked
    detail: str


@dataclass
class ValidationReport:
    """Outcome of the standard model checks.

    ``linearity`` covers the least-squares consistency of the derived
    splitting weights with ``a*i + b``; ``leaf_reachability`` that every
    degree up to the bound can be produced by leaf splits; ``top_splittable``
    that bound-degree vertices can split at all. Diagonalisability of the
    expected-census replacement matrix is reported informationally and never
    checked; the density results do not need it.
    """

    linearity: ConditionReport
    leaf_reachability: ConditionReport
    top_splittable: ConditionReport
    replacement_matrix: ConditionReport
    fitted: tuple[float, float]
    max_linear_residual: float

    @property
    def ok(self) -> bool:
        return all(c.ok is not False
                   for c in (self.linearity, self.leaf_reachability, self.top_splittable))


def validate_model(m: WeightModel, tol: float = 1e-9, i_max: int = 200) -> ValidationReport:
    """Check the standard conditions; reports violations instead of raising."""
    span = min(i_max, m.d_max) if m.d_max else i_max
    derived = derive_splitting_weights(m.partition, max(span, 2))
    a = derived[1] - derived[0]
    b = 2.0 * derived[0] - derived[1]
    fitted = a * np.arange(1, len(derived) + 1) + b
    resid = float(np.max(np.abs(derived - fitted)))
    lin = ConditionReport(resid <= tol,
                          f"max |w_i - ({a:g}*i{b:+g})| = {resid:.3g} over i <= {len(derived)}")

    if m.d_max is None:
        reach = ConditionReport(None, "unbounded model; not applicable")
        top = ConditionReport(None, "unbounded model; not applicable")
    else:
        D = m.d_max
        bad = [k for k in range(2, D + 1) if m.partition(1, k) <= 0]
        reach = ConditionReport(not bad,
                                "w[1,k] > 0 for all 2 <= k <= d_max" if not bad
                                else f"w[1,k] = 0 for k in {bad}")
        idx = [i for i in range(2, D) if m.partition(i, D + 2 - i) > 0]
        top = ConditionReport(bool(idx),
                              f"w[i, d_max+2-i] > 0 for i in {idx}" if idx
                              else "no i in 2..d_max-1 with w[i, d_max+2-i] > 0")
    diag = ConditionReport(None, "not checked (not required for density limits)")
    return ValidationReport(lin, reach, top, diag, (float(a), float(b)), resid)


def classify_regime(m: WeightModel, i_scan: int = 4096,
                    limit: Optional[float] = None) -> tuple[Regime, float]:
    """Classify the convergence regime and compute ``s``.

    For bounded models the infimum runs over ``1 <= i < d_max`` and the bound
    itself forces CASE_I.  For unbounded models the scanned minimum is folded
    with the analytic limit of ``i * w[1, i+1]``; if no limit is known
    (unrecognised family without a declared tail and no ``limit`` hint) an
    UnknownTailError is raised rather than extrapolating.
    """
    if m.d_max is not None:
        hi = m.d_max - 1
        masses = [m.leaf_mass(i) for i in range(1, hi + 1)]
        s = min(masses) if masses else 0.0
        return Regime.CASE_I, float(s)

    masses = [m.leaf_mass(i) for i in range(1, i_scan + 1)]
    s_scan = min(masses)
    if s_scan == 0.0:
        return Regime.CASE_I, 0.0
    tail_limit = limit if limit is not None else m.leaf_mass_limit
    if tail_limit is None:
        raise UnknownTailError(
            "unbounded model with unknown tail of i*w[1,i+1]; "
            "pass an explicit limit or construct the model with tail metadata")
    s = min(s_scan, tail_limit)
    if s <= 0.0:
        return Regime.CASE_II, 0.0
    return Regime.CASE_III, float(s)


# -- family constructors ------------------------------------------------------


def _check_splitting_valid(sw: SplittingWeights, d_max: Optional[int]) -> None:
    if not (math.isfinite(sw.a) and math.isfinite(sw.b)):
        raise InvalidParameterError("splitting weight coefficients must be finite")
    hi = d_max if d_max is not None else None
    if hi is None:
        if sw.a < 0:
            raise InvalidParameterError("unbounded model needs a >= 0 (weights turn negative)")
        if sw(1) < 0:
            raise InvalidParameterError(f"w_1 = {sw(1):g} < 0")
        if sw.a == 0 and sw.b <= 0:
            raise InvalidParameterError("constant weights must be positive")
    else:
        for i in range(1, hi + 1):
            if sw(i) < 0:
                raise InvalidParameterError(f"w_{i} = {sw(i):g} < 0")


def make_preferential(sw: SplittingWeights) -> WeightModel:
    """Attachment-only model: the sole positive partitioning weights are
    ``w[1, i+1] = w[i+1, 1] = w_i / i``, so every split sheds a leaf."""
    _check_splitting_valid(sw, None)

    def fn(i, j):  # i <= j guaranteed by the wrapper
        if i != 1 or j < 2:
            return 0.0
        d = j - 1
        return sw(d) / d

    tail = LinearTail(start=1, pg=sw.a, qg=sw.b)
    pw = PartitionWeights(fn, d_max=None, tail=tail)
    return WeightModel(pw, sw, family="preferential", params={"a": sw.a, "b": sw.b})


def make_uniform(x: float) -> WeightModel:
    """Uniform partitioning: a degree-``k`` split picks each ordered child
    pair with the same probability; ``w_i = i + x`` with ``x > -1``."""
    if not x > -1:
        raise InvalidParameterError(f"uniform family needs x > -1, got {x}")
    sw = SplittingWeights(1.0, float(x))

    def fn(i, j):
        d = i + j - 2
        if d < 1:
            return 0.0
        return 2.0 * (d + x) / (d * (d + 1))

    # i * w[1, i+1] = 2(i+x)/(i+1) is monotone with limit 2
    pw = PartitionWeights(fn, d_max=None, tail=None)
    return WeightModel(pw, sw, family="uniform", params={"x": float(x)},
                       leaf_mass_limit=2.0)


def _two_banded_fn(sw: SplittingWeights, alpha_of: Callable[[int], float],
                   start: int, head: Optional[PartitionWeights]):
    """Partitioning accessor with head table below ``start`` and the
    two-banded split law ``i*w[1,i+1] = alpha_i*w_i``, ``i*w[2,i] = (1-alpha_i)*w_i``
    from ``start`` on (diagonal pair (2,2) not halved)."""

    def fn(i, j):  # i <= j
        d = i + j - 2
        if d < 1:
            return 0.0
        if d < start:
            if head is not None:
                return head(i, j)
            if d == 1 and i == 1:      # forced: w[1,2] = w_1
                return sw(1)
            return 0.0
        al = alpha_of(d)
        if i == 1 and j == d + 1:
            return al * sw(d) / d
        if i == 2 and j == d:
            if d == 2:
                return (1.0 - al) * sw(2)
            return (1.0 - al) * sw(d) / d
        return 0.0

    return fn


def make_alpha_class(sw: SplittingWeights, alpha, M: int = 2,
                     head: Optional[PartitionWeights] = None) -> WeightModel:
    """Two-banded family: for split degrees ``i >= M`` the only admissible
    child pairs are ``(1, i+1)`` (probability ``alpha_i``) and ``(2, i)``.

    ``alpha`` is a sequence of values in (0, 1] for degrees ``M, M+1, ...``
    (the final value extends to all larger degrees) or a callable; a callable
    carries no tail metadata, so regime classification then needs an explicit
    limit hint.  ``head`` supplies the partitioning weights of split degrees
    below ``M``; for ``M == 2`` it may be omitted and ``w[1,2] = w_1`` is used.
    """
    if M < 2:
        raise InvalidParameterError("M must be >= 2")
    if M > 2 and head is None:
        raise InvalidParameterError("head table required when M > 2")
    _check_splitting_valid(sw, None)

    tail = None
    if callable(alpha):
        alpha_of = alpha
    else:
        seq = [float(v) for v in alpha]
        if not seq:
            raise InvalidParameterError("alpha sequence must be nonempty")
        for v in seq:
            if not 0.0 < v <= 1.0:
                raise InvalidParameterError(f"alpha values must lie in (0, 1], got {v}")

        def alpha_of(i, _seq=seq, _M=M):
            return _seq[min(i - _M, len(_seq) - 1)]

        const_from = M + len(seq) - 1
        al = seq[-1]
        tail = LinearTail(start=const_from, pg=al * sw.a, qg=al * sw.b,
                          ph=(1.0 - al) * sw.a, qh=(1.0 - al) * sw.b)

    fn = _two_banded_fn(sw, alpha_of, M, head)
    pw = PartitionWeights(fn, d_max=None, tail=tail)
    model = WeightModel(pw, sw, family="alpha", params={"M": M})
    if model.linear_fit_residual > 1e-9:
        raise InvalidParameterError(
            "head table is inconsistent with the splitting weights "
            f"(max residual {model.linear_fit_residual:.3g})")
    return model


def make_grafting(alpha: float, gamma: float) -> WeightModel:
    """Attachment-and-grafting family with parameters ``alpha, gamma in [0, 1]``:
    ``w_i = (alpha/2 + 1 - gamma)*i + 2*gamma - alpha - 1`` and split law
    ``alpha_i = 1 - alpha*i / (2*w_i)`` from degree 2 on."""
    if not (0.0 <= alpha <= 1.0 and 0.0 <= gamma <= 1.0):
        raise InvalidParameterError("alpha and gamma must lie in [0, 1]")
    a = alpha / 2.0 + 1.0 - gamma
    b = 2.0 * gamma - alpha - 1.0
    sw = SplittingWeights(a, b)
    if sw(1) < 0:
        raise InvalidParameterError(
            f"w_1 = gamma - alpha/2 = {sw(1):g} < 0; needs gamma >= alpha/2")

    def alpha_of(i):
        return 1.0 - alpha * i / (2.0 * sw(i))

    # i * w[1, i+1] = w_i - alpha*i/2 = (1-gamma)*i + 2*gamma - alpha - 1
    tail = LinearTail(start=2, pg=1.0 - gamma, qg=2.0 * gamma - alpha - 1.0,
                      ph=alpha / 2.0, qh=0.0)
    fn = _two_banded_fn(sw, alpha_of, 2, head=None)
    pw = PartitionWeights(fn, d_max=None, tail=tail)
    return WeightModel(pw, sw, family="grafting",
                       params={"alpha": float(alpha), "gamma": float(gamma)})


def make_table(d_max: int, entries: Iterable[tuple[int, int, float]]) -> WeightModel:
    """Bounded-degree model from an explicit ``(i, j, weight)`` table."""
    pw = PartitionWeights.from_table(d_max, entries)
    return WeightModel(pw, None, family="table", params={"d_max": int(d_max)},
                       fit_range=d_max)
