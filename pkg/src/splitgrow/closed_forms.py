"""Exact limiting degree densities for the analytically solvable families.

These evaluators are independent of the iterative solver and serve as its
oracles: attachment-only (preferential) weights, uniform partitioning
weights, and the attachment-and-grafting family, plus the asymptotic
power-law / geometric forms and the modified Bessel function the uniform
normalisation constant needs.

All Gamma ratios are evaluated in log space; direct factorials overflow
doubles near k = 170.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import InvalidParameterError
from .weights import SplittingWeights, WeightModel

__all__ = [
    "bessel_i",
    "pref_attachment_density",
    "pref_attachment_densities",
    "pref_attachment_asymptote",
    "uniform_norm_constant",
    "uniform_density",
    "uniform_densities",
    "grafting_density",
    "grafting_densities",
    "grafting_asymptote",
    "constant_weight_density",
    "ClosedForm",
    "closed_form_for",
]


def bessel_i(nu: float, z: float) -> float:
    """Modified Bessel function of the first kind, by its power series.

    Terms ``(z/2)^(2m+nu) / (m! * Gamma(m+nu+1))`` are accumulated until one
    falls below 1e-18 of the running sum.  Intended range: ``nu >= 0`` and
    ``0 < z <= 4``.
    """
    if nu < 0 or z <= 0:
        raise InvalidParameterError(f"series valid for nu >= 0, z > 0; got nu={nu}, z={z}")
    log_half_z = math.log(z / 2.0)
    total = 0.0
    for m in range(200):
        term = math.exp((2 * m + nu) * log_half_z
                        - math.lgamma(m + 1) - math.lgamma(m + nu + 1))
        total += term
        if term < 1e-18 * total:
            break
    return total


# -- attachment-only (preferential) weights -----------------------------------


def pref_attachment_density(sw: SplittingWeights, k: int) -> float:
    """Limiting density ``a_k = (w_2/w_k) * prod_{i<=k} w_i/(w_i + w_2)``."""
    if k < 1:
        raise InvalidParameterError("k must be >= 1")
    w2 = sw(2)
    log_a = math.log(w2) - math.log(sw(k))
    for i in range(1, k + 1):
        wi = sw(i)
        if wi <= 0:
            raise InvalidParameterError(f"w_{i} = {wi:g} must be positive")
        log_a += math.log(wi) - math.log(wi + w2)
    return math.exp(log_a)


def pref_attachment_densities(sw: SplittingWeights, k_max: int) -> np.ndarray:
    """Vector ``a_1 .. a_{k_max}`` via one cumulative pass."""
    i = np.arange(1, k_max + 1)
    w = sw.a * i + sw.b
    if np.any(w <= 0):
        raise InvalidParameterError("all splitting weights up to k_max must be positive")
    w2 = sw(2)
    log_prod = np.cumsum(np.log(w) - np.log(w + w2))
    return np.exp(math.log(w2) - np.log(w) + log_prod)


def pref_attachment_gamma_form(sw: SplittingWeights, k: int) -> float:
    """Equivalent Gamma-ratio form, defined for ``a != 0`` via ``x = b/a``."""
    x = sw.offset
    lg = (math.lgamma(2 * x + 3) + math.lgamma(k + x + 1)
          - math.lgamma(x + 1) - math.lgamma(k + 2 * x + 3))
    return (2 + x) * math.exp(lg) / (k + x)


def pref_attachment_asymptote(sw: SplittingWeights, k: int) -> float:
    """Leading tail behaviour ``C(x) * k^(-3-x)`` with
    ``C(x) = (2+x)*Gamma(2x+3)/Gamma(x+1)``."""
    x = sw.offset
    c = (2 + x) * math.exp(math.lgamma(2 * x + 3) - math.lgamma(x + 1))
    return c * float(k) ** (-3.0 - x)


# -- uniform partitioning weights ----------------------------------------------


def uniform_norm_constant(x: float) -> float:
    """Normalisation constant ``C(x) = e*sqrt(pi)*2^(-3/2-x)*I_{1/2+x}(1)/(2+x)``."""
    if not x > -1:
        raise InvalidParameterError(f"needs x > -1, got {x}")
    return math.e * math.sqrt(math.pi) * 2.0 ** (-1.5 - x) * bessel_i(0.5 + x, 1.0) / (2 + x)


def uniform_density(x: float, k: int) -> float:
    """Limiting density of the uniform-partitioning family,

        a_k = (1/C(x)) * 2^(k-1) * Gamma(k+x) / (Gamma(k) * Gamma(k+3+2x)) * (k+1+2x).
    """
    if k < 1:
        raise InvalidParameterError("k must be >= 1")
    C = uniform_norm_constant(x)
    lg = ((k - 1) * math.log(2.0) + math.lgamma(k + x)
          - math.lgamma(k) - math.lgamma(k + 3 + 2 * x))
    return math.exp(lg) * (k + 1 + 2 * x) / C


def uniform_densities(x: float, k_max: int) -> np.ndarray:
    return np.array([uniform_density(x, k) for k in range(1, k_max + 1)])


# -- attachment and grafting ----------------------------------------------------


def _check_grafting_params(alpha: float, gamma: float) -> None:
    if not (0.0 <= alpha <= 1.0):
        raise InvalidParameterError(f"alpha must lie in [0, 1], got {alpha}")
    if not (0.0 < gamma <= 1.0):
        raise InvalidParameterError(f"gamma must lie in (0, 1], got {gamma}")
    if alpha >= 1.0:
        raise InvalidParameterError("alpha = 1 has no positive density solution")


def grafting_density(alpha: float, gamma: float, k: int) -> float:
    """Limiting density of the attachment-and-grafting family.

    Geometric for ``gamma = 1``; a Gamma-ratio power law for ``0 < gamma < 1``.
    """
    _check_grafting_params(alpha, gamma)
    if k < 1:
        raise InvalidParameterError("k must be >= 1")
    if gamma == 1.0:
        if k == 1:
            return (1.0 - alpha) / (2.0 - alpha)
        r = (1.0 - alpha) / (2.0 - alpha)
        return r ** (k - 2) / (2.0 - alpha) ** 2
    if k == 1:
        return (1.0 - alpha) / (1.0 + gamma - alpha)
    u = (1.0 - alpha) / (1.0 - gamma)
    v = (2.0 - alpha) / (1.0 - gamma)
    lg = (math.lgamma((3.0 - alpha - gamma) / (1.0 - gamma)) + math.lgamma(k - 2 + u)
          - math.lgamma(u) - math.lgamma(k - 1 + v))
    return gamma * math.exp(lg) / ((1.0 + gamma - alpha) * (2.0 - alpha))


def grafting_densities(alpha: float, gamma: float, k_max: int) -> np.ndarray:
    return np.array([grafting_density(alpha, gamma, k) for k in range(1, k_max + 1)])


def grafting_asymptote(alpha: float, gamma: float, k: int) -> float:
    """Tail form: ``C * k^(-(2-gamma)/(1-gamma))`` for ``gamma < 1``, the
    geometric law with rate ``(1-alpha)/(2-alpha)`` for ``gamma = 1``."""
    _check_grafting_params(alpha, gamma)
    if gamma == 1.0:
        r = (1.0 - alpha) / (2.0 - alpha)
        return r ** (k - 2) / (2.0 - alpha) ** 2
    u = (1.0 - alpha) / (1.0 - gamma)
    c = gamma * math.exp(math.lgamma((3.0 - alpha - gamma) / (1.0 - gamma)) - math.lgamma(u)) \
        / ((1.0 + gamma - alpha) * (2.0 - alpha))
    return c * float(k) ** (-(2.0 - gamma) / (1.0 - gamma))


def constant_weight_density(k: int) -> float:
    """Solution ``a_k = e^{-1} / (k-1)!`` of the stationary system for constant
    splitting weights under uniform partitioning.

    That model has ``inf i*w[1,i+1] = 0``, so no almost-sure census limit is
    guaranteed; use for informational comparison only.
    """
    if k < 1:
        raise InvalidParameterError("k must be >= 1")
    return math.exp(-1.0 - math.lgamma(k))


# -- dispatch -------------------------------------------------------------------


@dataclass(frozen=True)
class ClosedForm:
    """Exact density evaluator for a recognised family, with its tail law.

    ``exponent``/``constant`` describe a power-law tail ``constant * k^exponent``;
    ``rate`` a geometric tail.  Exactly one descriptor family is populated.
    """

    family: str
    params: dict
    _eval: Callable[[int], float] = field(repr=False)
    exponent: Optional[float] = None
    constant: Optional[float] = None
    rate: Optional[float] = None
    note: str = ""

    def __call__(self, k: int) -> float:
        return self._eval(k)

    def densities(self, k_max: int) -> np.ndarray:
        return np.array([self._eval(k) for k in range(1, k_max + 1)])

    def asymptote(self, k: int) -> float:
        if self.exponent is not None:
            return self.constant * float(k) ** self.exponent
        if self.rate is not None:
            return self._eval(max(k, 2))
        raise InvalidParameterError(f"no asymptotic descriptor for {self.family}")


def closed_form_for(model: WeightModel) -> Optional[ClosedForm]:
    """Exact solution for the model's family, or None if there is none."""
    fam = model.family
    sw = model.splitting
    if fam == "preferential":
        if sw.a == 0:
            rate = 0.5  # a_k = 2^-k regardless of the constant level
            return ClosedForm(fam, model.params,
                              lambda k: pref_attachment_density(sw, k), rate=rate)
        x = sw.offset
        c = (2 + x) * math.exp(math.lgamma(2 * x + 3) - math.lgamma(x + 1))
        return ClosedForm(fam, model.params,
                          lambda k: pref_attachment_density(sw, k),
                          exponent=-3.0 - x, constant=c)
    if fam == "uniform":
        x = model.params["x"]
        return ClosedForm(fam, model.params, lambda k: uniform_density(x, k),
                          note="super-exponential tail")
    if fam == "grafting":
        al, ga = model.params["alpha"], model.params["gamma"]
        if al >= 1.0 or ga == 0.0:
            return None
        if ga == 1.0:
            return ClosedForm(fam, model.params,
                              lambda k: grafting_density(al, ga, k),
                              rate=(1.0 - al) / (2.0 - al))
        u = (1.0 - al) / (1.0 - ga)
        c = ga * math.exp(math.lgamma((3.0 - al - ga) / (1.0 - ga)) - math.lgamma(u)) \
            / ((1.0 + ga - al) * (2.0 - al))
        return ClosedForm(fam, model.params,
                          lambda k: grafting_density(al, ga, k),
                          exponent=-(2.0 - ga) / (1.0 - ga), constant=c)
    return None
