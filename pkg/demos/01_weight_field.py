"""The weight array as a pure function of (seed, i, j).

Every rectangle of one seed reads the same weights, whatever the order in
which it is swept. This is what couples H_1, H_2, ... into one sequence.
"""
import numpy as np
from scipy import stats

from lastpassage import Geometric, WeightField, weight_block

field = WeightField(seed=7)
print("X_{3,5} twice:", field.weight(3, 5), field.weight(3, 5))
print("top-left 3x3 block of a 10x10 read equals a direct 3x3 read:",
      np.array_equal(weight_block(field, 10, 10)[:3, :3], weight_block(field, 3, 3)))

w = weight_block(field, 500, 500).ravel()
print(f"exponential: mean {w.mean():.4f}, var {w.var():.4f}, "
      f"KS p-value vs Exp(1) {stats.kstest(w, 'expon').pvalue:.3f}")

g = weight_block(WeightField(7, Geometric(0.5)), 500, 500).ravel().astype(int)
freq = np.bincount(g, minlength=5)[:5] / g.size
print("geometric(0.5) frequencies of 0..4:", np.round(freq, 4))
print("pmf (1-q) q^k:                     ", np.round(0.5 * 0.5 ** np.arange(5), 4))
