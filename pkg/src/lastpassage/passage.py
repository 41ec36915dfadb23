"""Last passage times on the weight array.

The engine sweeps a rectangle row by row (row = second coordinate ``j``)
keeping a single row of partial maxima ``G(i, j) = X_{i,j} + max(G(i-1, j),
G(i, j-1))``. Any number of *harvest points* can be read off as their row
completes, which yields the whole coupled sequence ``H_N = H([gamma N], N)``
for ``N <= n_max`` from one pass, in ``O([gamma n_max])`` memory.

Many replicas (seeds) are swept side by side; each replica's arithmetic is
independent of which batch it lands in, so results do not depend on batch
size or worker count.

Throughout, the weight of the start corner is omitted unless
``omit_origin=False`` is passed.
"""

from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field
from typing import Callable, Optional, Sequence

import numpy as np

from . import _kernels
from .weights import Distribution, Exponential, WeightField

DEFAULT_CELL_BUDGET = 10**9
ORACLE_MAX_SIDE = 8

# Row buffers of (columns x replicas) doubles are kept near this many entries
# so that the two working buffers stay cache resident.
_TARGET_BUFFER = 1 << 17
_MAX_LANES = 64


class ResourceError(RuntimeError):
    """Raised when a computation would exceed the configured cell budget."""


def ray_column(gamma: float, n: int) -> int:
    """``[gamma N]``, read as the integer part."""
    return int(math.floor(gamma * n))


def _check_gamma(gamma: float):
    if not gamma >= 1.0:
        raise ValueError(f"gamma must be >= 1, got {gamma!r}")


def _check_budget(cells: int, cell_budget: Optional[int]):
    budget = DEFAULT_CELL_BUDGET if cell_budget is None else cell_budget
    if cells > budget:
        raise ResourceError(
            f"{cells} cell updates per realization exceed the cell budget of {budget}; "
            "raise --cell-budget or shrink the problem"
        )


def lanes_for(width: int) -> int:
    """Replicas per batch for rows of ``width`` columns."""
    return int(max(1, min(_MAX_LANES, _TARGET_BUFFER // max(width, 1))))


def _sweep_keys(
    keys: np.ndarray,
    dist: Distribution,
    i0: int,
    j0: int,
    i1: int,
    j1: int,
    harvest_j: np.ndarray,
    harvest_i: np.ndarray,
    omit_start: bool = True,
    recorder: Optional[Callable[[int, int, int], None]] = None,
) -> np.ndarray:
    """Sweep the rectangle ``[i0, i1] x [j0, j1]`` for a batch of keys.

    Returns an array ``(B, H)`` with ``G`` at each harvest point
    ``(harvest_i[h], harvest_j[h])``; harvest points must be sorted by row.
    """
    m = i1 - i0 + 1
    B = keys.shape[0]
    row = np.zeros((m, B))
    buf = np.empty((m, B))
    left = np.empty(B)
    out = np.empty((B, harvest_j.shape[0]))
    lnq = dist.lnq
    colhash = _kernels.column_hashes(keys, i0, m)
    h = 0
    nh = harvest_j.shape[0]
    for j in range(j0, j1 + 1):
        if recorder is not None:
            recorder(i0, i1, j)
        _kernels.fill_uniform_row(colhash, j, buf)
        np.log(buf, out=buf)
        _kernels.dp_row(row, buf, left, lnq, omit_start and j == j0)
        while h < nh and harvest_j[h] == j:
            out[:, h] = row[harvest_i[h] - i0]
            h += 1
    return out


def _run_batched(func: Callable[[np.ndarray], np.ndarray], seeds: np.ndarray,
                 lanes: int, workers: Optional[int]) -> np.ndarray:
    """Apply ``func`` to fixed-size seed batches, preserving seed order."""
    seeds = np.ascontiguousarray(seeds, dtype=np.uint64)
    chunks = [seeds[k:k + lanes] for k in range(0, seeds.shape[0], lanes)]
    workers = default_workers() if workers is None else max(1, int(workers))
    if workers == 1 or len(chunks) <= 1:
        parts = [func(c) for c in chunks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(func, chunks))
    if not parts:
        return np.empty((0,))
    return np.concatenate(parts, axis=0)


def default_workers() -> int:
    return len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else (os.cpu_count() or 1)


# --------------------------------------------------------------------------
# rectangles from the origin


def grid_passage_batch(seeds, dist: Distribution, m: int, n: int, omit_origin: bool = True,
                       cell_budget: Optional[int] = None, workers: Optional[int] = 1) -> np.ndarray:
    """:func:`grid_passage` for many seeds at once; returns shape ``(len(seeds),)``."""
    if m < 1 or n < 1:
        raise ValueError("grid sides must be >= 1")
    _check_budget(m * n, cell_budget)
    hj = np.array([n])
    hi = np.array([m])

    def run(chunk):
        keys = _kernels.keys_from_seeds(chunk)
        return _sweep_keys(keys, dist, 1, 1, m, n, hj, hi, omit_origin)[:, 0]

    return _run_batched(run, np.asarray(seeds), lanes_for(m), workers)


def grid_passage(field: WeightField, m: int, n: int, omit_origin: bool = True,
                 cell_budget: Optional[int] = None) -> float:
    """Passage time ``H(m, n)`` on ``[(1,1), (m,n)]`` of ``field``."""
    return float(grid_passage_batch([field.seed], field.distribution, m, n, omit_origin,
                                    cell_budget)[0])


@dataclass(frozen=True)
class RayConfig:
    gamma: float
    n_max: int
    field: WeightField = WeightField(0)

    def __post_init__(self):
        _check_gamma(self.gamma)
        if self.n_max < 1:
            raise ValueError("n_max must be >= 1")

    @property
    def m_max(self) -> int:
        return ray_column(self.gamma, self.n_max)


@dataclass
class RaySweepResult:
    """``h[N - 1] = H([gamma N], N)`` for ``N = 1 .. n_max`` (origin omitted)."""

    gamma: float
    seed: int
    h: np.ndarray = dc_field(repr=False)

    @property
    def n_max(self) -> int:
        return self.h.shape[0]

    def at(self, n: int) -> float:
        return float(self.h[n - 1])


def ray_sweep_batch(seeds, dist: Distribution, gamma: float, n_max: int,
                    cell_budget: Optional[int] = None, workers: Optional[int] = 1,
                    recorder=None) -> np.ndarray:
    """Coupled ray sequences for many seeds; returns ``(len(seeds), n_max)``."""
    _check_gamma(gamma)
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    m_max = ray_column(gamma, n_max)
    _check_budget(m_max * n_max, cell_budget)
    ns = np.arange(1, n_max + 1)
    cols = np.array([ray_column(gamma, k) for k in ns])

    def run(chunk):
        keys = _kernels.keys_from_seeds(chunk)
        return _sweep_keys(keys, dist, 1, 1, m_max, n_max, ns, cols, True, recorder)

    return _run_batched(run, np.asarray(seeds), lanes_for(m_max), workers).reshape(-1, n_max)


def ray_sweep(config: RayConfig, cell_budget: Optional[int] = None) -> RaySweepResult:
    """All ``H_N``, ``N <= n_max``, of one realization in a single sweep."""
    h = ray_sweep_batch([config.field.seed], config.field.distribution, config.gamma,
                        config.n_max, cell_budget)[0]
    return RaySweepResult(config.gamma, config.field.seed, h)


# --------------------------------------------------------------------------
# transversal times W_[N, L]


@dataclass(frozen=True)
class TransversalTime:
    n: int
    l: int
    value: float


def transversal_ray_batch(seeds, dist: Distribution, gamma: float, n: int, l_max: int,
                          cell_budget: Optional[int] = None, workers: Optional[int] = 1,
                          recorder=None) -> np.ndarray:
    """``W_[n, L]`` for every ``L = n .. l_max``; returns ``(len(seeds), l_max - n + 1)``.

    The sweep starts at ``([gamma n], n)`` with that cell's weight omitted.
    """
    _check_gamma(gamma)
    if not 1 <= n <= l_max:
        raise ValueError(f"need 1 <= n <= l, got n={n}, l={l_max}")
    i0, j0 = ray_column(gamma, n), n
    i1 = ray_column(gamma, l_max)
    _check_budget((i1 - i0 + 1) * (l_max - j0 + 1), cell_budget)
    ls = np.arange(n, l_max + 1)
    cols = np.array([ray_column(gamma, k) for k in ls])

    def run(chunk):
        keys = _kernels.keys_from_seeds(chunk)
        return _sweep_keys(keys, dist, i0, j0, i1, l_max, ls, cols, True, recorder)

    width = i1 - i0 + 1
    return _run_batched(run, np.asarray(seeds), lanes_for(width), workers).reshape(-1, ls.shape[0])


def transversal_batch(seeds, dist: Distribution, gamma: float, n: int, l: int,
                      cell_budget: Optional[int] = None, workers: Optional[int] = 1) -> np.ndarray:
    return transversal_ray_batch(seeds, dist, gamma, n, l, cell_budget, workers)[:, -1]


def transversal(field: WeightField, gamma: float, n: int, l: int,
                cell_budget: Optional[int] = None, recorder=None) -> TransversalTime:
    """``W_[N, L]``: best path from ``([gamma N], N)`` to ``([gamma L], L)``, start omitted."""
    value = transversal_ray_batch([field.seed], field.distribution, gamma, n, l, cell_budget,
                                  recorder=recorder)[0, -1]
    return TransversalTime(n, l, float(value))


# --------------------------------------------------------------------------
# brute-force oracle


def monotone_paths(m: int, n: int):
    """Yield every up/right path from (0, 0) to (m-1, n-1) as a list of cells."""
    steps = m + n - 2
    for ups in itertools.combinations(range(steps), n - 1):
        up_set = set(ups)
        i = j = 0
        cells = [(0, 0)]
        for s in range(steps):
            if s in up_set:
                j += 1
            else:
                i += 1
            cells.append((i, j))
        yield cells


def oracle_passage(weights, omit_origin: bool = True) -> float:
    """Maximum path sum by explicit enumeration of all up/right paths.

    ``weights[i - 1, j - 1]`` is ``X_{i,j}``; sides are limited to 8.
    """
    w = np.asarray(weights, dtype=float)
    if w.ndim != 2:
        raise ValueError("weights must be a 2-D matrix")
    m, n = w.shape
    if not (1 <= m <= ORACLE_MAX_SIDE and 1 <= n <= ORACLE_MAX_SIDE):
        raise ValueError(f"oracle supports sides 1..{ORACLE_MAX_SIDE}, got {m}x{n}")
    best = -math.inf
    for cells in monotone_paths(m, n):
        cells = cells[1:] if omit_origin else cells
        total = math.fsum(w[c] for c in cells)
        best = max(best, total)
    return best


def matrix_passage(weights, omit_origin: bool = True) -> float:
    """Row-sweep DP on an explicit weight matrix (``weights[i-1, j-1] = X_{i,j}``)."""
    w = np.array(weights, dtype=float)
    if omit_origin:
        w[0, 0] = 0.0
    return float(_kernels.dp_full(w))


def passage_time_ladder(seeds: Sequence[int], dist: Distribution = Exponential(),
                        gamma: float = 1.0, n_max: int = 10) -> np.ndarray:
    """Per-rectangle (non-swept) values ``H([gamma N], N)`` for checking the sweep."""
    out = np.empty((len(seeds), n_max))
    for k in range(1, n_max + 1):
        out[:, k - 1] = grid_passage_batch(seeds, dist, ray_column(gamma, k), k)
    return out
