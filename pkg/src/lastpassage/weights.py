"""The infinite i.i.d. weight array, realized as a pure function of (seed, i, j).

Every cell is generated from a keyed 64-bit mix of ``(seed, i, j)``, so any
rectangle, ray or sub-rectangle of the same seed reads the *same* array no
matter the evaluation order. That coupling is what makes statements about
the whole sequence ``H_N, N >= 1`` meaningful.

Conventions
-----------
* Lattice coordinates are 1-indexed, ``i`` along the long side (length
  ``[gamma N]``), ``j`` along the short side (length ``N``).
* ``Exponential``: ``X = -ln(u)``, rounded to the nearest multiple of
  ``2**-32`` so that all path sums are exact in float64.
* ``Geometric(q)``: ``X = floor(ln(u) / ln(q))``, i.e.
  ``P(X = k) = (1 - q) q**k`` for ``k = 0, 1, 2, ...``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from . import _kernels

UINT64_MAX = 2**64 - 1
QUANTUM = _kernels.QUANTUM


@dataclass(frozen=True)
class Exponential:
    """Exponential weights with parameter 1."""

    def label(self) -> str:
        return "exp"

    @property
    def lnq(self) -> float:
        return 0.0

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x > 0, -np.expm1(-np.maximum(x, 0.0)), 0.0)


@dataclass(frozen=True)
class Geometric:
    """Geometric weights ``P(X = k) = (1 - q) q**k`` on ``k >= 0``."""

    q: float

    def __post_init__(self):
        if not 0.0 < self.q < 1.0:
            raise ValueError(f"geometric parameter q must lie in (0, 1), got {self.q!r}")

    def label(self) -> str:
        return f"geom:{self.q!r}"

    @property
    def lnq(self) -> float:
        return float(np.log(np.float64(self.q)))

    def cdf(self, x):
        # P(X <= x) = 1 - q**(floor(x) + 1)
        x = np.asarray(x, dtype=float)
        k = np.floor(x)
        return np.where(x >= 0, 1.0 - self.q ** (k + 1.0), 0.0)

    @property
    def mean(self) -> float:
        return self.q / (1.0 - self.q)


Distribution = Union[Exponential, Geometric]


def parse_distribution(text: str) -> Distribution:
    """Parse ``exp`` or ``geom:<q>``."""
    text = text.strip().lower()
    if text in ("exp", "exponential"):
        return Exponential()
    if text.startswith("geom:"):
        try:
            q = float(text.split(":", 1)[1])
        except ValueError:
            raise ValueError(f"cannot parse geometric parameter in {text!r}") from None
        return Geometric(q)
    raise ValueError(f"unknown distribution {text!r}; expected 'exp' or 'geom:<q>'")


@dataclass(frozen=True)
class WeightField:
    """A seed-keyed realization of the array ``(X_{i,j})``."""

    seed: int
    distribution: Distribution = Exponential()

    def __post_init__(self):
        if not 0 <= int(self.seed) <= UINT64_MAX:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")

    @property
    def key(self) -> np.uint64:
        return _kernels.keys_from_seeds(np.array([self.seed], dtype=np.uint64))[0]

    def weight(self, i: int, j: int) -> float:
        return weight(self, i, j)

    def block(self, m: int, n: int, i0: int = 1, j0: int = 1) -> np.ndarray:
        return weight_block(self, m, n, i0, j0)


def _check_index(i, j):
    if np.any(np.asarray(i) < 1) or np.any(np.asarray(j) < 1):
        raise ValueError("lattice indices are 1-based: need i >= 1 and j >= 1")


def cell_uniforms(seed: int, i, j) -> np.ndarray:
    """Vectorized :func:`cell_uniform` over broadcast index arrays."""
    _check_index(i, j)
    ii, jj = np.broadcast_arrays(np.asarray(i, dtype=np.uint64), np.asarray(j, dtype=np.uint64))
    key = _kernels.keys_from_seeds(np.array([seed], dtype=np.uint64))[0]
    out = np.empty(ii.size)
    _kernels.fill_uniform_cells(key, ii.ravel(), jj.ravel(), out)
    return out.reshape(ii.shape)


def cell_uniform(seed: int, i: int, j: int) -> float:
    """Uniform variate in the open interval (0, 1) attached to cell (i, j).

    The value is an odd multiple of ``2**-53``, so it is never exactly 0 or 1
    and no clamping is needed before the inverse-CDF transform.
    """
    return float(cell_uniforms(seed, i, j))


def inverse_cdf(u, dist: Distribution) -> np.ndarray:
    """Map uniforms to weights of ``dist`` (same arithmetic as the DP engine)."""
    u = np.asarray(u, dtype=np.float64)
    if np.any((u <= 0.0) | (u >= 1.0)):
        raise ValueError("uniforms must lie strictly inside (0, 1)")
    logu = np.log(np.ascontiguousarray(u.ravel()))
    out = np.empty_like(logu)
    _kernels.logu_to_weights(logu, dist.lnq, out)
    return out.reshape(u.shape)


def weights_at(field: WeightField, i, j) -> np.ndarray:
    return inverse_cdf(cell_uniforms(field.seed, i, j), field.distribution)


def weight(field: WeightField, i: int, j: int) -> float:
    """The weight ``X_{i,j}`` of ``field``."""
    return float(weights_at(field, i, j))


def weight_block(field: WeightField, m: int, n: int, i0: int = 1, j0: int = 1) -> np.ndarray:
    """Weights of the ``m x n`` block with lower-left cell ``(i0, j0)``.

    Entry ``[a, b]`` is ``X_{i0 + a, j0 + b}``.
    """
    ii, jj = np.meshgrid(np.arange(i0, i0 + m), np.arange(j0, j0 + n), indexing="ij")
    return weights_at(field, ii, jj)
