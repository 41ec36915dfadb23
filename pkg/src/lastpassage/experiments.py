"""Monte Carlo experiments on the coupled passage times.

Replicas are addressed by seed ``mix(base) ^ (stream << 48) ^ index``: distinct
streams never share a seed, and the result of an experiment depends only on
``(base_seed, trials, parameters)``, never on batch size or worker count.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
from scipy import stats

from . import _kernels, passage
from .passage import ray_column
from .scaling import (
    GeometricRho,
    Normalizer,
    ScalingConstants,
    Source,
    Stretched,
    constants,
    reference_lines,
    rescale,
    right_rate_asymptote,
    subsequence_upto,
)
from .weights import Distribution, Geometric

MIN_TAIL_TRIALS = 1000
MIN_DENOMINATOR_HITS = 10
_STREAM_SHIFT = 48
_MAX_INDEX = 1 << _STREAM_SHIFT


class Stream(enum.IntEnum):
    RIGHT_TAIL = 1
    LEFT_TAIL = 2
    LDP = 3
    MAXIMAL_LHS = 4
    MAXIMAL_NUMERATOR = 5
    MAXIMAL_DENOMINATOR = 6
    TRANSVERSAL = 7
    RAY = 8
    FIT = 9
    SUPERADD = 10
    TRAJECTORY = 11


class Side(enum.Enum):
    RIGHT = "right"
    LEFT = "left"


class InsufficientHits(RuntimeError):
    pass


class EstimabilityError(RuntimeError):
    pass


class SuperadditivityViolation(AssertionError):
    pass


def replica_seeds(base_seed: int, stream: int, count: int, offset: int = 0) -> np.ndarray:
    """Seeds ``mix(base) ^ (stream << 48) ^ index`` for ``index = offset .. offset+count-1``.

    Hashing the base first matters: without it, pools for nearby bases such
    as 1 and 2 would be permutations of one another.
    """
    if offset < 0 or offset + count > _MAX_INDEX:
        raise ValueError("replica index out of range")
    mixed = _kernels.keys_from_seeds(np.array([base_seed], dtype=np.uint64))[0]
    base = mixed ^ (np.uint64(int(stream)) << np.uint64(_STREAM_SHIFT))
    return base ^ np.arange(offset, offset + count, dtype=np.uint64)


def resolve_constants(gamma: float, dist: Distribution,
                      consts: Optional[ScalingConstants]) -> ScalingConstants:
    if consts is not None:
        if consts.gamma != gamma:
            raise ValueError("scaling constants were computed for a different gamma")
        return consts
    if isinstance(dist, Geometric):
        raise ValueError("geometric weights need explicit scaling constants "
                         "(user-supplied or from fit_constants)")
    return constants(gamma, dist, Source.EXPONENTIAL_CLOSED_FORM)


# --------------------------------------------------------------------------
# tail estimates


@dataclass(frozen=True)
class TailEstimate:
    """Empirical tail probability with a binomial error on the log scale.

    A zero-hit estimate is *censored*: ``log_prob`` is ``-inf`` and
    ``upper_bound`` carries the one-sided 95% rule-of-three bound ``3/trials``.
    """

    n: int
    threshold: float
    side: str
    hits: int
    trials: int
    log_prob: float
    std_err: float
    censored: bool
    upper_bound: float

    @property
    def prob(self) -> float:
        return self.hits / self.trials

    @property
    def prob_se(self) -> float:
        p = self.prob
        return math.sqrt(p * (1.0 - p) / self.trials)

    def as_row(self) -> Dict:
        return {
            "n": self.n, "threshold": self.threshold, "side": self.side,
            "hits": self.hits, "trials": self.trials, "prob": self.prob,
            "log_prob": self.log_prob, "std_err": self.std_err,
            "censored": self.censored, "upper_bound": self.upper_bound,
        }


def tail_estimate(n: int, threshold: float, side: str, hits: int, trials: int) -> TailEstimate:
    if not 0 <= hits <= trials or trials < 1:
        raise ValueError(f"need 0 <= hits <= trials, got {hits}/{trials}")
    if hits == 0:
        return TailEstimate(n, threshold, side, 0, trials, -math.inf, math.nan, True, 3.0 / trials)
    p = hits / trials
    # delta method: sd(log p_hat) = sqrt((1 - p) / (trials p))
    se = math.sqrt((1.0 - p) / hits)
    return TailEstimate(n, threshold, side, int(hits), int(trials), math.log(p), se, False, p)


def rescaled_samples(gamma: float, dist: Distribution, n: int, trials: int, base_seed: int,
                     stream: int, consts: Optional[ScalingConstants] = None,
                     workers: Optional[int] = None, cell_budget: Optional[int] = None) -> np.ndarray:
    """``H~_n`` over ``trials`` independent replicas of one seed stream."""
    c = resolve_constants(gamma, dist, consts)
    seeds = replica_seeds(base_seed, stream, trials)
    h = passage.grid_passage_batch(seeds, dist, ray_column(gamma, n), n,
                                   cell_budget=cell_budget, workers=workers)
    return rescale(h, n, c)


def _scan(samples: np.ndarray, n: int, x_grid: Sequence[float], side: Side) -> List[TailEstimate]:
    out = []
    for x in x_grid:
        x = float(x)
        if side is Side.RIGHT:
            hits = int(np.count_nonzero(samples >= x))
        else:
            hits = int(np.count_nonzero(samples <= -x))
        out.append(tail_estimate(n, x, side.value, hits, samples.shape[0]))
    return out


def right_tail_scan(gamma: float, dist: Distribution, n: int, x_grid: Sequence[float],
                    trials: int, base_seed: int = 0, consts: Optional[ScalingConstants] = None,
                    workers: Optional[int] = None, cell_budget: Optional[int] = None,
                    samples: Optional[np.ndarray] = None) -> List[TailEstimate]:
    """Estimates of ``P(H~_n >= x)`` for each ``x`` in ``x_grid``."""
    if trials < MIN_TAIL_TRIALS:
        raise ValueError(f"tail scans need at least {MIN_TAIL_TRIALS} trials")
    if samples is None:
        samples = rescaled_samples(gamma, dist, n, trials, base_seed, Stream.RIGHT_TAIL,
                                   consts, workers, cell_budget)
    return _scan(samples, n, x_grid, Side.RIGHT)


def left_tail_scan(gamma: float, dist: Distribution, n: int, x_grid: Sequence[float],
                   trials: int, base_seed: int = 0, consts: Optional[ScalingConstants] = None,
                   workers: Optional[int] = None, cell_budget: Optional[int] = None,
                   samples: Optional[np.ndarray] = None) -> List[TailEstimate]:
    """Estimates of ``P(H~_n <= -x)`` for each ``x`` in ``x_grid``."""
    if trials < MIN_TAIL_TRIALS:
        raise ValueError(f"tail scans need at least {MIN_TAIL_TRIALS} trials")
    if samples is None:
        samples = rescaled_samples(gamma, dist, n, trials, base_seed, Stream.LEFT_TAIL,
                                   consts, workers, cell_budget)
    return _scan(samples, n, x_grid, Side.LEFT)


@dataclass(frozen=True)
class LineFit:
    slope: float
    intercept: float
    slope_se: float
    points: int


def weighted_line(x, y, se=None) -> LineFit:
    """Weighted least squares ``y ~ slope x + intercept`` with weights ``1/se^2``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    w = np.ones_like(x) if se is None else 1.0 / np.asarray(se, dtype=float) ** 2
    if x.shape[0] < 2:
        raise InsufficientHits("a line fit needs at least two uncensored points")
    sw = w.sum()
    xm = (w @ x) / sw
    ym = (w @ y) / sw
    sxx = w @ (x - xm) ** 2
    if sxx <= 0:
        raise ValueError("degenerate design: all abscissae equal")
    slope = (w @ ((x - xm) * (y - ym))) / sxx
    intercept = ym - slope * xm
    if se is None:
        dof = max(x.shape[0] - 2, 1)
        resid = y - slope * x - intercept
        slope_se = math.sqrt((resid @ resid) / dof / sxx)
    else:
        slope_se = math.sqrt(1.0 / sxx)
    return LineFit(float(slope), float(intercept), float(slope_se), int(x.shape[0]))


def fit_tail_coefficient(estimates: Sequence[TailEstimate], power: float) -> LineFit:
    """Slope of ``-log P`` against ``x^power`` over the uncensored estimates."""
    usable = [e for e in estimates if not e.censored and e.hits < e.trials]
    x = [e.threshold ** power for e in usable]
    y = [-e.log_prob for e in usable]
    se = [e.std_err for e in usable]
    return weighted_line(x, y, se)


# --------------------------------------------------------------------------
# large deviation slopes


@dataclass
class LdpFit:
    epsilon: float
    slope_vs_n: float
    slope_vs_n2: float
    target_slope_vs_n: float
    right: List[TailEstimate] = field(repr=False)
    left: List[TailEstimate] = field(repr=False)

    def __iter__(self):
        return iter((self.slope_vs_n, self.slope_vs_n2))


def ldp_rate_fit(gamma: float, dist: Distribution, epsilon: float, n_grid: Sequence[int],
                 trials: int, base_seed: int = 0, consts: Optional[ScalingConstants] = None,
                 workers: Optional[int] = None, cell_budget: Optional[int] = None) -> LdpFit:
    """Slopes of ``log P(H >= (a+eps)N)`` vs ``N`` and ``log P(H <= (a-eps)N)`` vs ``N^2``."""
    if not epsilon > 0:
        raise ValueError("epsilon must be > 0: at epsilon = 0 the events are not large deviations")
    n_grid = sorted(int(k) for k in n_grid)
    if len(n_grid) < 2:
        raise ValueError("n_grid needs at least two sizes")
    c = resolve_constants(gamma, dist, consts)
    seeds = replica_seeds(base_seed, Stream.LDP, trials)
    h = passage.ray_sweep_batch(seeds, dist, gamma, n_grid[-1], cell_budget, workers)
    right, left = [], []
    for n in n_grid:
        hn = h[:, n - 1]
        right.append(tail_estimate(n, epsilon, Side.RIGHT.value,
                                   int(np.count_nonzero(hn >= (c.a + epsilon) * n)), trials))
        left.append(tail_estimate(n, epsilon, Side.LEFT.value,
                                  int(np.count_nonzero(hn <= (c.a - epsilon) * n)), trials))
    slopes = []
    for ests, power in ((right, 1), (left, 2)):
        usable = [e for e in ests if not e.censored]
        if 2 * len(usable) < len(ests) or len(usable) < 2:
            raise InsufficientHits(
                f"{len(ests) - len(usable)} of {len(ests)} {ests[0].side} estimates censored; "
                "increase trials or decrease epsilon")
        fit = weighted_line([e.n ** power for e in usable], [e.log_prob for e in usable],
                            [e.std_err for e in usable])
        slopes.append(fit.slope)
    return LdpFit(epsilon, slopes[0], slopes[1], -right_rate_asymptote(epsilon, c), right, left)


# --------------------------------------------------------------------------
# LIL trajectories


@dataclass(frozen=True)
class Checkpoint:
    n: int
    h_tilde: float
    normalized: float
    running_sup: float
    running_inf: float


@dataclass
class TrajectoryRecord:
    seed: int
    gamma: float
    kind: str
    checkpoints: List[Checkpoint]
    terminal_sup: float
    terminal_inf: float
    reference: Dict[str, float]

    def rows(self) -> List[Dict]:
        return [dict(seed=self.seed, gamma=self.gamma, kind=self.kind, n=c.n, h_tilde=c.h_tilde,
                     normalized=c.normalized, running_sup=c.running_sup,
                     running_inf=c.running_inf) for c in self.checkpoints]


def default_subsequence(kind: Normalizer):
    return GeometricRho(1.5) if kind is Normalizer.LIMSUP_PHI else Stretched(0.5)


def trajectory_from_sweep(h: np.ndarray, seed: int, gamma: float, kind: Normalizer,
                          subseq, c: ScalingConstants) -> TrajectoryRecord:
    n_max = h.shape[0]
    ns = np.arange(1, n_max + 1)
    h_tilde = rescale(h, ns, c)
    normalized = h_tilde / kind(ns)
    run_sup = np.maximum.accumulate(normalized)
    run_inf = np.minimum.accumulate(normalized)
    points = subsequence_upto(subseq, n_max)
    if n_max <= 1000:
        points = ns
    checkpoints = [Checkpoint(int(k), float(h_tilde[k - 1]), float(normalized[k - 1]),
                              float(run_sup[k - 1]), float(run_inf[k - 1])) for k in points]
    return TrajectoryRecord(int(seed), gamma, kind.value, checkpoints, float(run_sup[-1]),
                            float(run_inf[-1]), reference_lines())


def lil_trajectories(seeds: Sequence[int], gamma: float, dist: Distribution, n_max: int,
                     kind: Normalizer = Normalizer.LIMSUP_PHI, subseq=None,
                     consts: Optional[ScalingConstants] = None, workers: Optional[int] = None,
                     cell_budget: Optional[int] = None) -> List[TrajectoryRecord]:
    c = resolve_constants(gamma, dist, consts)
    subseq = default_subsequence(kind) if subseq is None else subseq
    seeds = np.asarray(seeds, dtype=np.uint64)
    h = passage.ray_sweep_batch(seeds, dist, gamma, n_max, cell_budget, workers)
    return [trajectory_from_sweep(h[r], int(seeds[r]), gamma, kind, subseq, c)
            for r in range(seeds.shape[0])]


def lil_trajectory(seed: int, gamma: float, dist: Distribution, n_max: int,
                   kind: Normalizer = Normalizer.LIMSUP_PHI, subseq=None,
                   consts: Optional[ScalingConstants] = None,
                   cell_budget: Optional[int] = None) -> TrajectoryRecord:
    """One ray sweep; running extremes of ``H~_N / phi(N)`` (or ``psi``) over every ``N``."""
    return lil_trajectories([seed], gamma, dist, n_max, kind, subseq, consts, 1, cell_budget)[0]


# --------------------------------------------------------------------------
# superadditivity


def superadditivity_slack(seed: int, gamma: float, dist: Distribution, n: int, l: int) -> float:
    """``W_L - W_N - W_[N,L]`` for one realization; negative means a violation."""
    h = passage.ray_sweep_batch([seed], dist, gamma, l)[0]
    w = passage.transversal_batch([seed], dist, gamma, n, l)[0]
    return float(h[l - 1] - (h[n - 1] + w))


@dataclass
class SuperadditivityReport:
    gamma: float
    seeds: int
    l_max: int
    checked: int
    violations: int
    min_slack: float
    max_slack: float
    mean_slack: float
    strict_fraction: float
    zero_diagonal: bool


def superadditivity_audit(gamma: float, dist: Distribution, seeds: int, l_max: int,
                          base_seed: int = 0, workers: Optional[int] = None,
                          raise_on_violation: bool = True) -> SuperadditivityReport:
    """Check ``W_N + W_[N,L] <= W_L`` for every ``1 <= N <= L <= l_max`` and seed."""
    if not 1 <= l_max <= 200:
        raise ValueError("l_max must lie in 1..200")
    pool = replica_seeds(base_seed, Stream.SUPERADD, seeds)
    h = passage.ray_sweep_batch(pool, dist, gamma, l_max, workers=workers)
    slacks = []
    diagonal_zero = True
    for n in range(1, l_max + 1):
        w = passage.transversal_ray_batch(pool, dist, gamma, n, l_max, workers=workers)
        slack = h[:, n - 1:] - (h[:, [n - 1]] + w)
        diagonal_zero &= bool(np.all(w[:, 0] == 0.0) and np.all(slack[:, 0] == 0.0))
        slacks.append(slack.ravel())
    slack = np.concatenate(slacks)
    violations = int(np.count_nonzero(slack < 0))
    if violations and raise_on_violation:
        raise SuperadditivityViolation(f"{violations} superadditivity violations (min slack "
                                       f"{slack.min()!r}); the passage engine is inconsistent")
    return SuperadditivityReport(gamma, seeds, l_max, int(slack.size), violations,
                                 float(slack.min()), float(slack.max()), float(slack.mean()),
                                 float(np.mean(slack > 0)), diagonal_zero)


# --------------------------------------------------------------------------
# distributional identity W_[N,L] ~ W_{L-N+1}


@dataclass
class IdentityReport:
    n: int
    l: int
    samples: int
    ks_statistic: float
    p_value: float
    rejected_at_1pct: bool


def transversal_identity(gamma: float, dist: Distribution, n: int, l: int, samples: int,
                         base_seed: int = 0, workers: Optional[int] = None) -> IdentityReport:
    """Two-sample KS between ``W_[N,L]`` and ``W_{L-N+1}`` on disjoint seed pools."""
    width = ray_column(gamma, l) - ray_column(gamma, n) + 1
    if width != ray_column(gamma, l - n + 1):
        raise ValueError(f"rectangles differ in width for gamma={gamma}: the identity "
                         "holds exactly only when [gamma L] - [gamma N] + 1 = [gamma (L-N+1)]")
    w = passage.transversal_batch(replica_seeds(base_seed, Stream.TRANSVERSAL, samples),
                                  dist, gamma, n, l, workers=workers)
    k = l - n + 1
    h = passage.ray_sweep_batch(replica_seeds(base_seed, Stream.RAY, samples), dist, gamma, k,
                                workers=workers)[:, k - 1]
    res = stats.ks_2samp(w, h)
    return IdentityReport(n, l, samples, float(res.statistic), float(res.pvalue),
                          bool(res.pvalue < 0.01))


# --------------------------------------------------------------------------
# maximal inequality


@dataclass(frozen=True)
class ProbEstimate:
    hits: int
    trials: int

    @property
    def p(self) -> float:
        return self.hits / self.trials

    @property
    def se(self) -> float:
        # binomial spread at the add-one smoothed proportion, so that a pool
        # with zero (or all) hits still carries an honest uncertainty
        p = (self.hits + 1.0) / (self.trials + 2.0)
        return math.sqrt(p * (1.0 - p) / self.trials)


@dataclass
class MaximalIneqReport:
    K: int
    L: int
    t: float
    s: float
    lhs: ProbEstimate
    numerator: ProbEstimate
    denominators: Dict[int, ProbEstimate]
    argmin_n: int
    lhs_est: float
    rhs_est: float
    combined_se: float
    satisfied_within_3se: bool
    vacuous: bool
    max_range: tuple

    def as_row(self) -> Dict:
        return {
            "K": self.K, "L": self.L, "t": self.t, "s": self.s,
            "lhs_hits": self.lhs.hits, "lhs_trials": self.lhs.trials, "lhs_est": self.lhs_est,
            "numerator_hits": self.numerator.hits, "numerator_est": self.numerator.p,
            "denominator_min": self.denominators[self.argmin_n].p, "argmin_n": self.argmin_n,
            "rhs_est": self.rhs_est, "combined_se": self.combined_se,
            "satisfied_within_3se": self.satisfied_within_3se, "vacuous": self.vacuous,
            "n_lo": self.max_range[0], "n_hi": self.max_range[1],
        }


def maximal_inequality_audit(gamma: float, dist: Distribution, K: int, L: int, t: float,
                             s: float, trials: int, base_seed: int = 0,
                             consts: Optional[ScalingConstants] = None,
                             include_endpoint: bool = True,
                             workers: Optional[int] = None) -> MaximalIneqReport:
    """Monte Carlo check of the maximal inequality

        P(max_{K<=N<=L'} (W_N - aN) >= t)
            <= P(W_L - aL >= t + s) / min_{K<=N<=L'} P(W_{L-N+1} - a(L-N) >= s)

    with ``L' = L`` (or ``L - 1`` when ``include_endpoint`` is false; the
    proof goes through unchanged for any sub-range of ``N``). The three
    probabilities come from three disjoint seed pools.

    If a denominator term is identically zero (``W_1 = 0`` when ``[gamma] = 1``
    and ``s > 0``) the bound is vacuous: the report carries ``rhs_est = inf``
    and ``vacuous = True``.
    """
    if not 1 <= K <= L <= 100:
        raise ValueError("need 1 <= K <= L <= 100")
    c = resolve_constants(gamma, dist, consts)
    a = c.a
    n_hi = L if include_endpoint else L - 1
    if n_hi < K:
        raise ValueError("empty range of N")

    lhs_seeds = replica_seeds(base_seed, Stream.MAXIMAL_LHS, trials)
    h = passage.ray_sweep_batch(lhs_seeds, dist, gamma, L, workers=workers)
    ns = np.arange(K, n_hi + 1)
    excess = h[:, K - 1:n_hi] - a * ns
    lhs = ProbEstimate(int(np.count_nonzero(excess.max(axis=1) >= t)), trials)

    num_seeds = replica_seeds(base_seed, Stream.MAXIMAL_NUMERATOR, trials)
    h_num = passage.ray_sweep_batch(num_seeds, dist, gamma, L, workers=workers)[:, L - 1]
    numerator = ProbEstimate(int(np.count_nonzero(h_num - a * L >= t + s)), trials)

    k_max = L - K + 1
    den_seeds = replica_seeds(base_seed, Stream.MAXIMAL_DENOMINATOR, trials)
    h_den = passage.ray_sweep_batch(den_seeds, dist, gamma, k_max, workers=workers)
    denominators = {}
    structurally_zero = []
    for n in ns:
        k = L - n + 1
        hits = int(np.count_nonzero(h_den[:, k - 1] - a * (L - n) >= s))
        denominators[int(n)] = ProbEstimate(hits, trials)
        if k == 1 and ray_column(gamma, 1) == 1 and s > 0:
            structurally_zero.append(int(n))
    argmin_n = min(denominators, key=lambda k: (denominators[k].p, k))
    den = denominators[argmin_n]

    if structurally_zero:
        return MaximalIneqReport(K, L, t, s, lhs, numerator, denominators, structurally_zero[0],
                                 lhs.p, math.inf, math.inf, True, True, (K, n_hi))
    if den.hits < MIN_DENOMINATOR_HITS:
        raise EstimabilityError(f"denominator at N={argmin_n} has only {den.hits} hits "
                                f"(< {MIN_DENOMINATOR_HITS}); choose a smaller s or more trials")
    rhs = numerator.p / den.p
    # delta method for the ratio; with zero numerator hits only its spread counts
    rhs_se = math.hypot(numerator.se / den.p, rhs * den.se / den.p)
    combined = math.sqrt(lhs.se ** 2 + rhs_se ** 2)
    ok = lhs.p <= rhs + 3.0 * combined
    return MaximalIneqReport(K, L, t, s, lhs, numerator, denominators, argmin_n, lhs.p, rhs,
                             combined, bool(ok), False, (K, n_hi))
