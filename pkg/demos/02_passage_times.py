"""Passage times: the row-sweep engine, the brute-force oracle, transversal
times, and the superadditivity W_N + W_[N,L] <= W_L, checked exactly."""
import numpy as np

from lastpassage import WeightField, grid_passage, oracle_passage, transversal
from lastpassage import experiments as ex
from lastpassage.passage import ray_sweep_batch
from lastpassage.weights import Exponential

w = np.array([[1.0, 2.0], [3.0, 4.0]])  # w[i-1, j-1] = X_{i,j}
print("2x2 example:", oracle_passage(w, omit_origin=False), "with origin,",
      oracle_passage(w), "without")

field = WeightField(42)
for m, n in [(3, 3), (5, 4), (6, 6)]:
    print(f"H({m},{n}): engine {grid_passage(field, m, n):.6f}  "
          f"oracle {oracle_passage(field.block(m, n)):.6f}")

gamma, n, l = 1.5, 10, 30
h = ray_sweep_batch([42], Exponential(), gamma, l)[0]
w_nl = transversal(field, gamma, n, l).value
print(f"gamma={gamma}: W_{n} = {h[n - 1]:.4f}, W_[{n},{l}] = {w_nl:.4f}, "
      f"sum {h[n - 1] + w_nl:.4f} <= W_{l} = {h[l - 1]:.4f}")

rep = ex.superadditivity_audit(gamma, Exponential(), seeds=20, l_max=40)
print(f"audit over {rep.checked} (seed, N, L) pairs: {rep.violations} violations, "
      f"strict in {100 * rep.strict_fraction:.1f}% of pairs")
