"""Centering and scaling constants, tail asymptotics, LIL normalizers, blocking
subsequences, and an empirical fit of (a, b) for weights without closed forms.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Dict, Mapping, Optional, Sequence

import numpy as np

from .weights import Distribution, Exponential

E_E = math.exp(math.e)
# the Tracy-Widom tail coefficients: 1 - F2(x) ~ exp(-4/3 x^{3/2}), F2(-x) ~ exp(-x^3/12)
RIGHT_TAIL_COEF = 4.0 / 3.0
LEFT_TAIL_COEF = 1.0 / 12.0
LIMSUP_BOUND = 0.75 ** (2.0 / 3.0)
LIMINF_CONJECTURE = -(12.0 ** (1.0 / 3.0))
# mean and standard deviation of the GUE Tracy-Widom law (tabulated values)
TW_MEAN = -1.7710868074
TW_SD = math.sqrt(0.8131947928)


class Source(enum.Enum):
    EXPONENTIAL_CLOSED_FORM = "exponential-closed-form"
    USER_SUPPLIED = "user-supplied"
    EMPIRICAL_FIT = "empirical-fit"


class InsufficientData(ValueError):
    pass


@dataclass(frozen=True)
class ScalingConstants:
    gamma: float
    a: float
    b: float
    source: Source = Source.EXPONENTIAL_CLOSED_FORM
    residuals: Optional[Dict[str, float]] = field(default=None, compare=False)
    degenerate_b: bool = False

    def __post_init__(self):
        if not self.gamma >= 1.0:
            raise ValueError(f"gamma must be >= 1, got {self.gamma!r}")
        if not (self.a > 0 and (self.b > 0 or self.degenerate_b)):
            raise ValueError("scaling constants a, b must be positive")


def shape_constant(gamma: float) -> float:
    """``a(gamma) = (1 + sqrt(gamma))**2``."""
    return (1.0 + math.sqrt(gamma)) ** 2


def fluctuation_constant(gamma: float) -> float:
    """``b(gamma) = gamma**(-1/6) (1 + sqrt(gamma))**(4/3)``."""
    return gamma ** (-1.0 / 6.0) * (1.0 + math.sqrt(gamma)) ** (4.0 / 3.0)


def constants(gamma: float = 1.0, dist: Distribution = Exponential(),
              mode: Source = Source.EXPONENTIAL_CLOSED_FORM,
              a: Optional[float] = None, b: Optional[float] = None,
              samples: Optional[Mapping[int, Sequence[float]]] = None) -> ScalingConstants:
    """Scaling constants for ``gamma`` under ``dist``.

    Closed forms are only known for exponential weights. Geometric weights
    need either user supplied ``a, b`` or ``samples`` for :func:`fit_constants`.
    """
    if not gamma >= 1.0:
        raise ValueError(f"gamma must be >= 1, got {gamma!r}")
    if mode is Source.EXPONENTIAL_CLOSED_FORM:
        if not isinstance(dist, Exponential):
            raise ValueError("no closed form for a, b with geometric weights; "
                             "use user-supplied values or an empirical fit")
        return ScalingConstants(gamma, shape_constant(gamma), fluctuation_constant(gamma))
    if mode is Source.USER_SUPPLIED:
        if a is None or b is None:
            raise ValueError("user-supplied mode needs both a and b")
        return ScalingConstants(gamma, float(a), float(b), Source.USER_SUPPLIED)
    if samples is None:
        raise ValueError("empirical-fit mode needs samples {N: [h values]}")
    return fit_constants(samples, gamma)


def rescale(h_n, n, c: ScalingConstants):
    """``(h - a n) / (b n^{1/3})``; works elementwise on arrays."""
    n = np.asarray(n, dtype=float)
    return (np.asarray(h_n, dtype=float) - c.a * n) / (c.b * np.cbrt(n))


def unrescale(h_tilde, n, c: ScalingConstants):
    n = np.asarray(n, dtype=float)
    return np.asarray(h_tilde, dtype=float) * (c.b * np.cbrt(n)) + c.a * n


def right_rate_asymptote(epsilon: float, c: ScalingConstants) -> float:
    """Small-epsilon form ``4 / (3 b^{3/2}) * epsilon^{3/2}`` of the right rate function."""
    if epsilon < 0:
        raise ValueError("epsilon must be nonnegative")
    return RIGHT_TAIL_COEF / c.b ** 1.5 * epsilon ** 1.5


def tw_tail_exponents():
    """``(right, left)`` coefficients of the Tracy-Widom tails."""
    return RIGHT_TAIL_COEF, LEFT_TAIL_COEF


def reference_lines() -> Dict[str, float]:
    return {"limsup_upper_bound": LIMSUP_BOUND, "liminf_conjecture": LIMINF_CONJECTURE}


# --------------------------------------------------------------------------
# normalizers


class Normalizer(enum.Enum):
    LIMSUP_PHI = "limsup"
    LIMINF_PSI = "liminf"

    @property
    def exponent(self) -> float:
        return 2.0 / 3.0 if self is Normalizer.LIMSUP_PHI else 1.0 / 3.0

    def __call__(self, n):
        return phi(n) if self is Normalizer.LIMSUP_PHI else psi(n)


def _cbrt_loglog(n):
    # cbrt and log give the same bits whether applied to arrays or scalars
    # (np.power does not), so normalized values are reproducible elementwise
    n = np.asarray(n, dtype=float)
    big = n >= E_E
    safe = np.where(big, n, E_E)
    return big, np.cbrt(np.log(np.log(safe)))


def phi(n):
    """``(log log n)^{2/3}`` for ``n >= e^e``, else 1."""
    big, r = _cbrt_loglog(n)
    out = np.where(big, r * r, 1.0)
    return out if out.ndim else float(out)


def psi(n):
    """``(log log n)^{1/3}`` for ``n >= e^e``, else 1."""
    big, r = _cbrt_loglog(n)
    out = np.where(big, r, 1.0)
    return out if out.ndim else float(out)


# --------------------------------------------------------------------------
# blocking subsequences


@dataclass(frozen=True)
class GeometricRho:
    """``n_k = [rho^k]``."""

    rho: float

    def __post_init__(self):
        if not self.rho > 1.0:
            raise ValueError(f"rho must be > 1, got {self.rho!r}")

    def term(self, k: int) -> int:
        return int(math.floor(self.rho ** k))


@dataclass(frozen=True)
class Stretched:
    """``n_k = [exp(k^eta)]``."""

    eta: float = 0.5

    def __post_init__(self):
        if not 0.0 < self.eta < 1.0:
            raise ValueError(f"eta must lie in (0, 1), got {self.eta!r}")

    def term(self, k: int) -> int:
        return int(math.floor(math.exp(k ** self.eta)))


def subsequence(kind, k_max: int) -> np.ndarray:
    """Terms ``k = 1 .. k_max`` of ``kind``, deduplicated into a strictly increasing array."""
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    terms = [kind.term(k) for k in range(1, k_max + 1)]
    if terms[-1] > np.iinfo(np.int64).max:
        raise ValueError(f"term k={k_max} of {kind} exceeds the 64-bit integer range")
    return np.unique(np.asarray(terms, dtype=np.int64))


def subsequence_upto(kind, n_max: int) -> np.ndarray:
    """All (deduplicated) terms of ``kind`` not exceeding ``n_max``."""
    terms = []
    k = 1
    while True:
        t = kind.term(k)
        if t > n_max:
            break
        terms.append(t)
        k += 1
    return np.unique(np.asarray(terms, dtype=np.int64))


# --------------------------------------------------------------------------
# empirical constants

MIN_FIT_POINTS = 3
MIN_FIT_SAMPLES = 100


def fit_constants(samples: Mapping[int, Sequence[float]], gamma: float = 1.0,
                  fluctuation_sd: float = 1.0) -> ScalingConstants:
    """Estimate ``a`` and ``b`` from passage-time samples ``{N: [h, ...]}``.

    ``a`` is the least-squares slope of ``mean(h_N)`` against ``N`` (with
    intercept, which absorbs the lower-order ``N^{1/3}`` drift); ``b`` is the
    least-squares slope through the origin of ``std(h_N)`` against ``N^{1/3}``,
    divided by ``fluctuation_sd``, the standard deviation of the limit law if
    known (1 leaves ``b`` as the raw fluctuation scale).
    """
    keys = sorted(samples)
    if len(keys) < MIN_FIT_POINTS:
        raise InsufficientData(f"need at least {MIN_FIT_POINTS} distinct N, got {len(keys)}")
    short = [k for k in keys if len(samples[k]) < MIN_FIT_SAMPLES]
    if short:
        raise InsufficientData(f"need >= {MIN_FIT_SAMPLES} samples per N; short: {short}")
    ns = np.asarray(keys, dtype=float)
    means = np.array([np.mean(samples[k]) for k in keys])
    stds = np.array([np.std(samples[k], ddof=1) for k in keys])

    design = np.column_stack([ns, np.ones_like(ns)])
    (a, intercept), *_ = np.linalg.lstsq(design, means, rcond=None)
    mean_resid = means - design @ np.array([a, intercept])

    x = np.cbrt(ns)
    sxx = float(x @ x)
    slope = float(x @ stds) / sxx
    degenerate = not slope > 1e-12 * max(1.0, abs(a))
    b = slope / fluctuation_sd
    std_resid = stds - slope * x
    residuals = {
        "mean_intercept": float(intercept),
        "mean_rms": float(np.sqrt(np.mean(mean_resid ** 2))),
        "std_rms": float(np.sqrt(np.mean(std_resid ** 2))),
    }
    return ScalingConstants(gamma, float(a), float(b), Source.EMPIRICAL_FIT, residuals, degenerate)
