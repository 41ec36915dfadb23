"""Growth rate a and fluctuation scale b N^{1/3}: closed forms for
exponential weights, least-squares fits from simulated data, and the
log-log fluctuation exponent."""
import numpy as np

from lastpassage import constants, fit_constants, passage
from lastpassage import experiments as ex
from lastpassage.scaling import TW_SD
from lastpassage.weights import Exponential, Geometric

for gamma in (1.0, 2.0, 4.0):
    c = constants(gamma)
    print(f"gamma={gamma}: a={c.a:.4f}, b={c.b:.4f}")

ns = [100, 200, 400, 800]
seeds = ex.replica_seeds(0, ex.Stream.FIT, 300)
h = passage.ray_sweep_batch(seeds, Exponential(), 1.0, ns[-1])
samples = {n: h[:, n - 1] for n in ns}
fit = fit_constants(samples, 1.0, fluctuation_sd=TW_SD)
print(f"fit from {len(seeds)} sweeps: a={fit.a:.3f} (exact 4), b={fit.b:.3f} (exact 2.520)")

sd = [samples[n].std(ddof=1) for n in ns]
slope = np.polyfit(np.log(ns), np.log(sd), 1)[0]
print(f"log std vs log N slope: {slope:.3f} (scaling exponent 1/3)")

geo = passage.ray_sweep_batch(seeds, Geometric(0.5), 1.0, ns[-1])
gfit = fit_constants({n: geo[:, n - 1] for n in ns}, 1.0, fluctuation_sd=TW_SD)
print(f"geometric(0.5), no closed form used: a~{gfit.a:.3f}, b~{gfit.b:.3f}")
