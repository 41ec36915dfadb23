"""Compiled inner loops for weight generation and the row-major DP.

Layout convention: a row buffer has shape ``(m, B)`` where ``m`` is the
number of columns (first lattice coordinate ``i``) and ``B`` the number of
independent replicas processed side by side. The replica axis is innermost
so the per-cell work vectorizes across replicas.

Logarithms are deliberately *not* taken here: numba lowers ``np.log`` to
scalar libm calls, while numpy's ufunc uses a SIMD implementation that is
several times faster. The drivers in :mod:`lastpassage.passage` call
``np.log`` on the contiguous uniform buffer between the two kernels below.
"""

import numpy as np
from numba import njit

_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_ROW_MUL = np.uint64(0xD1B54A32D192ED03)
_SEED_SALT = np.uint64(0x6A09E667F3BCC909)

# exponential weights are rounded onto this grid so that path sums are exact
QUANTUM = 2.0**-32
_INV_QUANTUM = 2.0**32
_HALF_ULP53 = 2.0**-53


@njit(inline="always")
def mix64(z):
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


@njit(inline="always")
def seed_key(seed):
    return mix64(seed ^ _SEED_SALT)


@njit(inline="always")
def cell_bits(key, i, j):
    z = mix64(key + np.uint64(i) * _GOLDEN)
    return mix64(z ^ (np.uint64(j) * _ROW_MUL))


@njit(inline="always")
def bits_to_uniform(z):
    # odd multiple of 2^-53: never 0, never 1
    return (np.float64(np.int64(z >> np.uint64(12))) * 2.0 + 1.0) * _HALF_ULP53


@njit(nogil=True, error_model="numpy", cache=True)
def keys_from_seeds(seeds):
    out = np.empty(seeds.shape[0], dtype=np.uint64)
    for b in range(seeds.shape[0]):
        out[b] = seed_key(seeds[b])
    return out


@njit(nogil=True, error_model="numpy", cache=True)
def column_hashes(keys, i0, m):
    """First mixing stage of :func:`cell_bits`, shared by every row."""
    B = keys.shape[0]
    out = np.empty((m, B), dtype=np.uint64)
    for c in range(m):
        col_mix = np.uint64(i0 + c) * _GOLDEN
        for b in range(B):
            out[c, b] = mix64(keys[b] + col_mix)
    return out


@njit(nogil=True, error_model="numpy", cache=True)
def fill_uniform_row(colhash, j, out):
    """Uniforms of row ``j`` for the columns and replicas of ``colhash``."""
    m, B = out.shape
    row_mix = np.uint64(j) * _ROW_MUL
    for c in range(m):
        for b in range(B):
            out[c, b] = bits_to_uniform(mix64(colhash[c, b] ^ row_mix))


@njit(nogil=True, error_model="numpy", cache=True)
def fill_uniform_cells(key, ii, jj, out):
    for t in range(ii.shape[0]):
        out[t] = bits_to_uniform(cell_bits(key, ii[t], jj[t]))


@njit(inline="always", error_model="numpy")
def exp_weight(logu):
    return np.floor(-logu * _INV_QUANTUM + 0.5) * QUANTUM


@njit(inline="always", error_model="numpy")
def geom_weight(logu, lnq):
    return np.floor(logu / lnq)


@njit(nogil=True, error_model="numpy", cache=True)
def logu_to_weights(logu, lnq, out):
    """Inverse-CDF transform of ``log(u)``; ``lnq == 0`` selects exponential."""
    n = logu.shape[0]
    if lnq == 0.0:
        for t in range(n):
            out[t] = exp_weight(logu[t])
    else:
        for t in range(n):
            out[t] = geom_weight(logu[t], lnq)


@njit(nogil=True, error_model="numpy", cache=True)
def dp_row(row, logu, left, lnq, zero_first):
    """Advance the DP by one row.

    ``row[c, b]`` holds G of the previous row on entry and of this row on
    exit. All G are nonnegative, so a zero-initialised ``row`` acts as the
    boundary below the first row and ``left = 0`` as the boundary on the
    left. With ``zero_first`` the weight of the row's first cell is dropped
    (the omitted start corner).
    """
    m, B = row.shape
    for b in range(B):
        left[b] = 0.0
    if lnq == 0.0:
        for c in range(m):
            for b in range(B):
                x = exp_weight(logu[c, b])
                if zero_first and c == 0:
                    x = 0.0
                up = row[c, b]
                lf = left[b]
                g = x + (up if up > lf else lf)
                row[c, b] = g
                left[b] = g
    else:
        for c in range(m):
            for b in range(B):
                x = geom_weight(logu[c, b], lnq)
                if zero_first and c == 0:
                    x = 0.0
                up = row[c, b]
                lf = left[b]
                g = x + (up if up > lf else lf)
                row[c, b] = g
                left[b] = g


@njit(nogil=True, cache=True)
def dp_full(weights):
    """Plain DP on an explicit ``(m, n)`` weight matrix, origin included."""
    m, n = weights.shape
    g = np.zeros((m, n))
    for j in range(n):
        for i in range(m):
            best = 0.0
            if i > 0:
                best = g[i - 1, j]
            if j > 0 and g[i, j - 1] > best:
                best = g[i, j - 1]
            g[i, j] = weights[i, j] + best
    return g[m - 1, n - 1]
