"""Acceptance gate: criteria 1-11.

Each test records one or more sub-checks under its criterion number; the
terminal summary (see conftest.py) prints one PASS/FAIL line per criterion.
Tolerances below are the agreed ones and must not be relaxed.
"""

import math
import time

import numpy as np
import pytest
from scipy import stats

from lastpassage import cli, passage
from lastpassage import experiments as ex
from lastpassage.passage import oracle_passage
from lastpassage.scaling import (
    Normalizer,
    constants,
    phi,
    rescale,
)
from lastpassage.weights import Exponential, Geometric, WeightField

EXP = Exponential()
RESULTS = {}


def record(criterion, ok, detail, sub=""):
    RESULTS.setdefault(criterion, []).append((sub, bool(ok), detail))
    label = f"{criterion}{'/' + sub if sub else ''}"
    print(f"CRITERION {label}: {'PASS' if ok else 'FAIL'} ({detail})")
    return ok


# 1 -------------------------------------------------------------------------

def test_c01_oracle_equivalence():
    t0 = time.time()
    checked = mismatches = 0
    for dist, seeds in ((EXP, range(100)), (Geometric(0.5), range(1000, 1100))):
        for seed in seeds:
            f = WeightField(seed, dist)
            block = f.block(6, 6)
            for m in range(1, 7):
                for n in range(1, 7):
                    engine = passage.grid_passage(f, m, n)
                    oracle = oracle_passage(block[:m, :n])
                    if isinstance(dist, Geometric):
                        ok = engine == oracle
                    else:
                        ok = abs(engine - oracle) <= 1e-9 * max(1.0, abs(oracle))
                    checked += 1
                    mismatches += not ok
    elapsed = time.time() - t0
    ok = mismatches == 0 and elapsed < 10.0
    record(1, ok, f"{checked} grids, {mismatches} mismatches, {elapsed:.1f}s (limit 10s)")
    assert ok


# 2 -------------------------------------------------------------------------

def test_c02_superadditivity():
    t0 = time.time()
    total = violations = 0
    for gamma in (1.0, 1.5, 2.0):
        rep = ex.superadditivity_audit(gamma, EXP, 2, 40, base_seed=2024)
        # the audit covers every N <= L <= 40; N = L pairs are the zero diagonal
        total += rep.checked - rep.seeds * rep.l_max
        violations += rep.violations
        assert rep.zero_diagonal
    elapsed = time.time() - t0
    ok = violations == 0 and total >= 1000 and elapsed < 30.0
    record(2, ok, f"{total} (seed, gamma, N<L<=40) triples, {violations} violations, {elapsed:.1f}s")
    assert ok


# 3 -------------------------------------------------------------------------

def test_c03_coupled_sweep_consistency():
    t0 = time.time()
    seeds = list(range(500, 520))
    bad = 0
    for gamma in (1.0, 2.0):
        swept = passage.ray_sweep_batch(seeds, EXP, gamma, 50)
        ladder = passage.passage_time_ladder(seeds, EXP, gamma, 50)
        bad += int(np.count_nonzero(swept != ladder))
    elapsed = time.time() - t0
    ok = bad == 0 and elapsed < 30.0
    record(3, ok, f"2 x 20 x 50 values, {bad} differ, {elapsed:.1f}s")
    assert ok


# 4 -------------------------------------------------------------------------

def test_c04_shape_constant():
    seeds = ex.replica_seeds(4, ex.Stream.RAY, 200)
    h = passage.grid_passage_batch(seeds, EXP, 2000, 2000, workers=None)
    mean = float(np.mean(h / 2000))
    ok = 3.95 <= mean <= 4.05
    record(4, ok, f"mean h[2000]/2000 = {mean:.4f}, band [3.95, 4.05]")
    assert ok


# 5 -------------------------------------------------------------------------

def test_c05_fluctuation_exponent():
    ns = [250, 500, 1000, 2000]
    sds = []
    for n in ns:
        seeds = ex.replica_seeds(5, ex.Stream.FIT, 500, offset=500 * ns.index(n))
        h = passage.grid_passage_batch(seeds, EXP, n, n, workers=None)
        sds.append(float(np.std(h, ddof=1)))
    slope = float(np.polyfit(np.log(ns), np.log(sds), 1)[0])
    ok = abs(slope - 1 / 3) <= 0.08
    record(5, ok, f"slope {slope:.4f}, target 1/3 +- 0.08; std = {[round(s, 3) for s in sds]}")
    assert ok


# 6 -------------------------------------------------------------------------

def test_c06_right_tail_coefficient():
    xs = [1.0, 1.5, 2.0, 2.5, 3.0]
    est = ex.right_tail_scan(1.0, EXP, 1000, xs, 100_000, base_seed=6, workers=None)
    fit = ex.fit_tail_coefficient(est, 1.5)
    ok = 0.9 <= fit.slope <= 1.8
    hits = [e.hits for e in est]
    record(6, ok, f"slope {fit.slope:.4f} +- {fit.slope_se:.4f}, band [0.9, 1.8], target 4/3; hits {hits}")
    assert ok


# 7 -------------------------------------------------------------------------

@pytest.mark.slow
def test_c07_left_tail_coefficient():
    xs = [2.0, 2.5, 3.0, 3.5]
    est = ex.left_tail_scan(1.0, EXP, 1000, xs, 1_000_000, base_seed=7, workers=None)
    fit = ex.fit_tail_coefficient(est, 3.0)
    ok = 0.04 <= fit.slope <= 0.17
    hits = [e.hits for e in est]
    record(7, ok, f"slope {fit.slope:.5f} +- {fit.slope_se:.5f}, band [0.04, 0.17], target 1/12; hits {hits}")
    assert ok


# 8 -------------------------------------------------------------------------

def test_c08_transversal_identity():
    rep = ex.transversal_identity(1.0, EXP, 10, 30, 10_000, base_seed=8)
    ok = not rep.rejected_at_1pct
    record(8, ok, f"KS {rep.ks_statistic:.4f}, p = {rep.p_value:.3f} (reject if < 0.01)")
    assert ok


# 9 -------------------------------------------------------------------------

def test_c09_maximal_inequality():
    c = constants(1.0)
    t = 2 * c.b * 10 ** (1 / 3)
    literal = ex.maximal_inequality_audit(1.0, EXP, 10, 40, t, c.a, 100_000, base_seed=9, consts=c)
    ok_literal = literal.lhs_est <= literal.rhs_est + 3 * literal.combined_se
    record(9, ok_literal, f"N in [10, 40]: lhs {literal.lhs_est:.5f}, rhs {literal.rhs_est}; "
           f"vacuous={literal.vacuous} because W_1 = 0 makes the N = 40 denominator zero",
           sub="literal")
    restricted = ex.maximal_inequality_audit(1.0, EXP, 10, 40, t, c.a, 100_000, base_seed=9,
                                             consts=c, include_endpoint=False)
    ok_restricted = (not restricted.vacuous
                     and restricted.lhs_est <= restricted.rhs_est + 3 * restricted.combined_se)
    record(9, ok_restricted, f"N in [10, 39]: lhs {restricted.lhs_est:.5f} <= rhs "
           f"{restricted.rhs_est:.5f} + 3 x {restricted.combined_se:.5f}", sub="restricted")
    assert ok_literal and ok_restricted


# 10 ------------------------------------------------------------------------

def test_c10_trajectory_band():
    seeds = list(range(20))
    recs = ex.lil_trajectories(seeds, 1.0, EXP, 10_000, Normalizer.LIMSUP_PHI, workers=None)
    sups = [r.terminal_sup for r in recs]
    ok = all(math.isfinite(s) and 0.0 < s < 5.0 for s in sups)
    outside = sum(not 0.0 < s < 5.0 for s in sups)
    record(10, ok, f"{outside}/20 terminal running_sup outside (0, 5); "
           f"range [{min(sups):.3f}, {max(sups):.3f}]", sub="band")
    assert ok


def test_c10_trajectory_bruteforce():
    seeds = list(range(20))
    n_max = 1000
    c = constants(1.0)
    recs = ex.lil_trajectories(seeds, 1.0, EXP, n_max, Normalizer.LIMSUP_PHI, workers=None)
    ladder = passage.passage_time_ladder(seeds, EXP, 1.0, n_max)
    mismatches = 0
    for rec, h in zip(recs, ladder):
        sup, inf = -math.inf, math.inf
        for cp in rec.checkpoints:
            n = cp.n
            value = float(rescale(h[n - 1], n, c)) / float(phi(n))
            sup, inf = max(sup, value), min(inf, value)
            mismatches += (cp.running_sup != sup) + (cp.running_inf != inf)
    ok = mismatches == 0
    record(10, ok, f"running extremes vs independent per-N recomputation, n_max = 1000: "
           f"{mismatches} mismatches", sub="bruteforce")
    assert ok


def test_c10_reference_lines():
    rec = ex.lil_trajectory(0, 1.0, EXP, 100)
    ref = rec.reference
    ok = (abs(ref["limsup_upper_bound"] - 0.8255) < 1e-4
          and abs(ref["liminf_conjecture"] + 2.2894) < 1e-4)
    record(10, ok, f"emitted {ref['limsup_upper_bound']:.4f} and {ref['liminf_conjecture']:.4f}",
           sub="reference")
    assert ok


# 11 ------------------------------------------------------------------------

TABLE_X = np.linspace(-8.0, 6.0, 281)

CLI_CASES = {
    "oracle-check": ["--fields", "5"],
    "sweep": ["--n", "200", "--seed", "11"],
    "tails": ["--side", "both", "--n", "60", "--x", "1,2,3", "--trials", "5000"],
    "ldp-fit": ["--epsilon", "0.3", "--n-grid", "20,40,80", "--trials", "5000"],
    "trajectory": ["--kind", "liminf", "--eta", "0.5", "--n-max", "1500", "--seeds", "5"],
    "superadd": ["--seeds", "3", "--l-max", "25", "--gamma", "1.5"],
    "maximal": ["--K", "5", "--L", "20", "--trials", "20000", "--exclude-endpoint"],
    "fit-constants": ["--n-grid", "50,100,200", "--reps", "200", "--dist", "geom:0.5"],
    "compare-f2": ["--n", "50", "--reps", "500"],
}


def test_c11_cli_determinism(tmp_path):
    table = tmp_path / "f2.csv"
    f = stats.norm.cdf(TABLE_X, loc=-1.77, scale=0.90)
    table.write_text("x,F2\n" + "".join(f"{float(x)!r},{float(v)!r}\n" for x, v in zip(TABLE_X, f)))
    differing = []
    for sub, args in CLI_CASES.items():
        extra = ["--table", str(table)] if sub == "compare-f2" else []
        for fmt in ("csv", "jsonl"):
            first = tmp_path / f"{sub}.{fmt}"
            code = cli.run([sub, *args, *extra, "--format", fmt, "--out", str(first)])
            assert code == 0, f"{sub} exited {code}"
            manifest = str(first) + ".manifest.json"
            outs = []
            for workers in (1, 8):
                out = tmp_path / f"{sub}.w{workers}.{fmt}"
                assert cli.run(["replay", manifest, "--workers", str(workers), "--out", str(out)]) == 0
                outs.append(out.read_bytes())
            if not (outs[0] == outs[1] == first.read_bytes()):
                differing.append(f"{sub}/{fmt}")
    ok = not differing
    record(11, ok, f"{len(CLI_CASES)} subcommands x 2 formats replayed at --workers 1 and 8; "
           f"differing: {differing or 'none'}")
    assert ok
