import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from lastpassage import _kernels
from lastpassage.weights import (
    Exponential,
    Geometric,
    WeightField,
    cell_uniform,
    cell_uniforms,
    inverse_cdf,
    parse_distribution,
    weight,
    weight_block,
)

seeds = st.integers(min_value=0, max_value=2**64 - 1)
index = st.integers(min_value=1, max_value=10**6)


@given(seeds, index, index)
@settings(max_examples=200, deadline=None)
def test_cell_uniform_is_deterministic_and_open(seed, i, j):
    u = cell_uniform(seed, i, j)
    assert u == cell_uniform(seed, i, j)
    assert 0.0 < u < 1.0


def test_transposed_cells_differ():
    rng = np.random.default_rng(1)
    ss = rng.integers(0, 2**63, size=10_000, dtype=np.uint64)
    same = sum(cell_uniform(int(s), 1, 2) == cell_uniform(int(s), 2, 1) for s in ss)
    assert same / ss.size <= 1e-4


def test_uniformity_ks():
    ii, jj = np.meshgrid(np.arange(1, 1001), np.arange(1, 1001), indexing="ij")
    u = cell_uniforms(12345, ii, jj).ravel()
    res = stats.kstest(u, "uniform")
    # 1% critical value of the one-sample KS statistic
    assert res.statistic < 1.628 / math.sqrt(u.size)


def test_neighbouring_cells_uncorrelated():
    ii, jj = np.meshgrid(np.arange(1, 801), np.arange(1, 801), indexing="ij")
    u = cell_uniforms(99, ii, jj)
    assert abs(np.corrcoef(u[1:, :].ravel(), u[:-1, :].ravel())[0, 1]) < 0.005
    assert abs(np.corrcoef(u[:, 1:].ravel(), u[:, :-1].ravel())[0, 1]) < 0.005
    v = cell_uniforms(100, ii, jj)
    assert abs(np.corrcoef(u.ravel(), v.ravel())[0, 1]) < 0.005


def test_exponential_inverse_cdf_at_one_over_e():
    assert inverse_cdf(np.array([1.0 / math.e]), Exponential())[0] == pytest.approx(1.0, abs=2**-32)


def test_geometric_inverse_cdf_example():
    assert inverse_cdf(np.array([0.6]), Geometric(0.5))[0] == 0.0
    # floor(ln 0.2 / ln 0.5) = floor(2.32) = 2
    assert inverse_cdf(np.array([0.2]), Geometric(0.5))[0] == 2.0


def test_exponential_mean():
    w = weight_block(WeightField(3), 1000, 1000).ravel()
    assert 0.995 <= w.mean() <= 1.005
    assert np.all(w >= 0)


def test_exponential_weights_are_quantized():
    w = weight_block(WeightField(4), 50, 50)
    assert np.array_equal(w, np.round(w * 2**32) / 2**32)


def test_geometric_distribution_matches_pmf():
    q = 0.5
    w = weight_block(WeightField(5, Geometric(q)), 500, 500).ravel()
    assert np.array_equal(w, np.floor(w))
    counts = np.bincount(w.astype(int), minlength=8)[:8]
    expected = (1 - q) * q ** np.arange(8) * w.size
    assert np.all(np.abs(counts - expected) < 5 * np.sqrt(expected) + 5)


def test_log_is_elementwise_independent_of_array_length():
    # the engine takes logs of whole rows; single-cell evaluation must agree
    u = cell_uniforms(8, np.arange(1, 5001), 3)
    whole = np.log(u)
    single = np.array([np.log(np.array([x]))[0] for x in u])
    assert np.array_equal(whole, single)


def test_weight_block_orientation():
    f = WeightField(11)
    block = weight_block(f, 3, 4, i0=2, j0=5)
    for a in range(3):
        for b in range(4):
            assert block[a, b] == weight(f, 2 + a, 5 + b)


def test_kernel_uniform_matches_scalar_path():
    key = _kernels.keys_from_seeds(np.array([77], dtype=np.uint64))
    col = _kernels.column_hashes(key, 1, 5)
    out = np.empty((5, 1))
    _kernels.fill_uniform_row(col, 9, out)
    assert np.array_equal(out[:, 0], cell_uniforms(77, np.arange(1, 6), 9))


@pytest.mark.parametrize("text,expected", [
    ("exp", Exponential()), ("geom:0.5", Geometric(0.5)), (" GEOM:0.25 ", Geometric(0.25)),
])
def test_parse_distribution(text, expected):
    assert parse_distribution(text) == expected


@pytest.mark.parametrize("text", ["geom:0", "geom:1", "geom:x", "normal", "geom:-0.1"])
def test_parse_distribution_rejects(text):
    with pytest.raises(ValueError):
        parse_distribution(text)


def test_invalid_inputs():
    with pytest.raises(ValueError):
        WeightField(-1)
    with pytest.raises(ValueError):
        WeightField(2**64)
    with pytest.raises(ValueError):
        cell_uniform(0, 0, 1)
    with pytest.raises(ValueError):
        inverse_cdf(np.array([0.0]), Exponential())
    with pytest.raises(ValueError):
        inverse_cdf(np.array([1.0]), Exponential())


@given(st.floats(min_value=1e-300, max_value=1.0, exclude_max=True))
def test_geometric_inverse_cdf_agrees_with_cdf(u):
    d = Geometric(0.3)
    k = inverse_cdf(np.array([u]), d)[0]
    # u in (q^(k+1), q^k]  <=>  floor(ln u / ln q) = k
    assert k >= 0
    assert d.q ** (k + 1) <= u * (1 + 1e-12)
    assert u <= d.q ** k * (1 + 1e-12)
