"""Tail probabilities of the rescaled passage time and their decay rates.

The right tail decays like exp(-(4/3) x^{3/2}) and the left tail like
exp(-x^3/12). At these small sizes the fitted coefficients are rough;
the acceptance suite runs the larger versions.
"""
from lastpassage import experiments as ex
from lastpassage.weights import Exponential

EXP = Exponential()
n, trials = 200, 20_000
samples = ex.rescaled_samples(1.0, EXP, n, trials, 0, ex.Stream.RIGHT_TAIL)
right = ex.right_tail_scan(1.0, EXP, n, [0.5, 1.0, 1.5, 2.0], trials, samples=samples)
left = ex.left_tail_scan(1.0, EXP, n, [2.0, 2.5, 3.0, 3.5, 6.0], trials, samples=samples)
for e in right + left:
    note = f"censored, p < {e.upper_bound:.1e}" if e.censored else \
        f"log p = {e.log_prob:.3f} +- {e.std_err:.3f}"
    print(f"{e.side:5s} x={e.threshold:<4} hits={e.hits:6d}  {note}")
print("right coefficient:", round(ex.fit_tail_coefficient(right, 1.5).slope, 3), "(4/3 in the limit)")
print("left coefficient: ", round(ex.fit_tail_coefficient(left, 3.0).slope, 4), "(1/12 in the limit)")

fit = ex.ldp_rate_fit(1.0, EXP, 0.2, [50, 100, 200], 20_000)
print(f"large deviations at eps=0.2: slope vs N {fit.slope_vs_n:.4f} "
      f"(small-eps rate {fit.target_slope_vs_n:.4f}), slope vs N^2 {fit.slope_vs_n2:.2e}")
