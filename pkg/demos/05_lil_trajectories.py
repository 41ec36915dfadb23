"""Running extremes of H~_N / (log log N)^{2/3} and H~_N / (log log N)^{1/3}
along one coupled sweep, printed at the blocking subsequence.

The asymptotic constants are shown as reference lines only: at N = 10^4
the normalizers barely exceed 1 and the trajectories are still dominated
by the Tracy-Widom mean of about -1.77.
"""
from lastpassage import experiments as ex
from lastpassage.scaling import GeometricRho, Normalizer, Stretched
from lastpassage.weights import Exponential

sup = ex.lil_trajectory(3, 1.0, Exponential(), 10_000, Normalizer.LIMSUP_PHI, GeometricRho(1.5))
inf = ex.lil_trajectory(3, 1.0, Exponential(), 10_000, Normalizer.LIMINF_PSI, Stretched(0.5))
print("reference lines:", sup.reference)
print(f"{'N':>6} {'H~/phi':>9} {'run sup':>9}")
for c in sup.checkpoints[::2]:
    print(f"{c.n:6d} {c.normalized:9.3f} {c.running_sup:9.3f}")
print(f"{'N':>6} {'H~/psi':>9} {'run inf':>9}")
for c in inf.checkpoints:
    print(f"{c.n:6d} {c.normalized:9.3f} {c.running_inf:9.3f}")

recs = ex.lil_trajectories(range(20), 1.0, Exponential(), 10_000)
print("terminal running sups over 20 seeds:", sorted(round(r.terminal_sup, 2) for r in recs))
