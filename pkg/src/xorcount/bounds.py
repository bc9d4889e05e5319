"""Certified lower/upper bounds on |S| from repeated hash-survival trials.

Lower bound: if the empirical survival frequency over T trials at m
constraints clears a threshold c, then |S| >= 2^m c/(1+kappa) with
confidence 1 - exp(-kappa^2 c T / ((1+kappa)(2+kappa))).

Upper bound: with T >= 24 ln(1/Delta) trials, a strict majority of empty
cells certifies |S| <= U(n,m,f) with probability 1 - Delta.

SPARSE-COUNT: grow m until the median survival indicator drops below 1;
the break index brackets log2 |S| within a constant factor.
"""

from __future__ import annotations

import dataclasses
import math
import time
from dataclasses import dataclass

from .comb import upper_bound_threshold
from .gf2hash import HashParams, ParityHash, derive_seed, sample_hash
from .oracle import CountingProblem, SolverProfile, has_survivor

__all__ = [
    "SurvivalEstimate",
    "LowerBoundCertificate",
    "UpperBoundCertificate",
    "SparseCountConfig",
    "SparseCountResult",
    "OracleUnknownError",
    "estimate_survival",
    "lower_bound",
    "best_lower_bound",
    "upper_bound",
    "sparse_count",
    "pick_promising_m",
]

LN2 = math.log(2.0)


class OracleUnknownError(RuntimeError):
    """Some trials came back unknown; no estimate is finalized from them."""

    def __init__(self, unknown: int, total: int):
        super().__init__("%d of %d trials unknown; refusing to estimate" % (unknown, total))
        self.unknown = unknown
        self.total = total


@dataclass(frozen=True)
class SurvivalEstimate:
    m: int
    f: float
    trials_T: int
    successes_Y: int
    seed: int
    outcomes: tuple = ()  # per-trial 0/1, order matches derived seeds

    @property
    def p_est(self) -> float:
        return self.successes_Y / self.trials_T


@dataclass(frozen=True)
class LowerBoundCertificate:
    n: int
    m: int
    f: float
    T: int
    kappa: float
    c: float
    bound_log2: float | None  # None: vacuous (p_est fell short of c)
    confidence: float
    p_est: float
    seed: int
    c_data_chosen: bool = False
    outcomes: tuple = ()
    wall_time_s: float = 0.0

    @property
    def issued(self) -> bool:
        return self.bound_log2 is not None

    def to_json(self) -> dict:
        return {
            "kind": "lower_bound",
            "n": self.n, "m": self.m, "f": self.f, "T": self.T,
            "params": {"kappa": self.kappa, "c": self.c,
                       "c_data_chosen": self.c_data_chosen},
            "bound_log2": self.bound_log2,
            "bound_ln": None if self.bound_log2 is None else self.bound_log2 * LN2,
            "confidence": self.confidence,
            "p_est": self.p_est,
            "seed": self.seed,
            "trial_outcomes": list(self.outcomes),
            "wall_time_s": self.wall_time_s,
        }


@dataclass(frozen=True)
class UpperBoundCertificate:
    n: int
    m: int
    f: float
    T: int
    delta: float
    verdict_log2: float  # log2 U when the median-empty event fired, else n
    event_fired: bool
    empty_count: int
    seed: int
    outcomes: tuple = ()
    wall_time_s: float = 0.0

    def to_json(self) -> dict:
        return {
            "kind": "upper_bound",
            "n": self.n, "m": self.m, "f": self.f, "T": self.T,
            "params": {"delta": self.delta},
            "bound_log2": self.verdict_log2,
            "bound_ln": self.verdict_log2 * LN2,
            "confidence": 1.0 - self.delta,
            "event_fired": self.event_fired,
            "empty_count": self.empty_count,
            "seed": self.seed,
            "trial_outcomes": list(self.outcomes),
            "wall_time_s": self.wall_time_s,
        }


@dataclass
class SparseCountConfig:
    delta: float
    alpha: float
    density_schedule: object = 0.5  # constant f or callable i -> f_i
    max_i: int | None = None
    T: int | None = None
    use_ln_n: bool = True

    def __post_init__(self):
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must lie in (0,1)")
        if self.alpha <= 0.0:
            raise ValueError("alpha must be positive")
        if not callable(self.density_schedule):
            fconst = float(self.density_schedule)
            self.density_schedule = lambda i: fconst

    def trials(self, n: int) -> int:
        if self.T is not None:
            return self.T
        base = math.log(1.0 / self.delta) / self.alpha
        if self.use_ln_n:
            base *= math.log(n)
        return max(1, math.ceil(base))


@dataclass(frozen=True)
class SparseCountResult:
    log2_estimate: float | None  # None: broke at i=0, fewer than 1 witnessed
    break_i: int
    exhausted: bool
    T: int
    n: int
    seed: int

    def to_json(self) -> dict:
        return {
            "kind": "sparse_count",
            "n": self.n,
            "T": self.T,
            "bound_log2": self.log2_estimate,
            "bound_ln": None if self.log2_estimate is None else self.log2_estimate * LN2,
            "break_i": self.break_i,
            "exhausted": self.exhausted,
            "seed": self.seed,
        }


def _trial(problem: CountingProblem, m: int, f: float, trial_seed: int,
           solver: SolverProfile = None, budget: float = None) -> str:
    """One survival indicator; m = 0 degenerates to plain satisfiability."""
    if m == 0:
        if problem.kind == "explicit":
            return "sat" if len(problem) else "unsat"
        h = None
    else:
        h = sample_hash(HashParams(problem.n, m, f, seed=trial_seed))
    if h is None:
        from .oracle import _exhaustive_scan  # noqa: import guarded for m=0 cnf path

        if solver is None:
            return "sat" if _exhaustive_scan(problem.formula) is not None else "unsat"
        from .dimacs import emit
        from .oracle import run_external

        text = emit(problem.formula, native_xor=solver.native_xor)
        return run_external(text, solver, budget=budget).answer
    return has_survivor(problem, h, budget=budget, solver=solver).answer


def estimate_survival(problem: CountingProblem, m: int, f: float, T: int,
                      seed: int, solver: SolverProfile = None,
                      budget: float = None, jobs: int = 1) -> SurvivalEstimate:
    """Run T independent trials at m constraints; refuse on any unknown.

    jobs > 1 runs trials on a thread pool (each external trial owns its own
    subprocess and temp file); outcomes are collected by trial index, so the
    estimate is identical regardless of completion order.
    """
    if T < 1:
        raise ValueError("T must be at least 1")
    stream = derive_seed(seed, m)
    if jobs > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=jobs) as pool:
            answers = list(pool.map(
                lambda k: _trial(problem, m, f, derive_seed(stream, k), solver, budget),
                range(T),
            ))
    else:
        answers = [
            _trial(problem, m, f, derive_seed(stream, k), solver, budget)
            for k in range(T)
        ]
    unknown = sum(1 for a in answers if a == "unknown")
    if unknown:
        raise OracleUnknownError(unknown, T)
    outcomes = tuple(1 if a == "sat" else 0 for a in answers)
    return SurvivalEstimate(m, f, T, sum(outcomes), seed, outcomes)


def _lb_confidence(kappa: float, c: float, T: int) -> float:
    return 1.0 - math.exp(-kappa * kappa * c * T / ((1.0 + kappa) * (2.0 + kappa)))


def lower_bound(est: SurvivalEstimate, kappa: float, c: float = None,
                n: int = None, wall_time_s: float = 0.0) -> LowerBoundCertificate:
    """Certificate |S| >= 2^m c/(1+kappa), issued iff p_est >= c.

    c=None picks the data-chosen threshold p_est itself (already on the 1/T
    grid); the certificate records that choice.
    """
    if kappa <= 0.0:
        raise ValueError("kappa must be positive")
    data_chosen = c is None
    if data_chosen:
        c = est.p_est if est.successes_Y > 0 else 1.0 / est.trials_T
    if not 0.0 < c <= 1.0:
        raise ValueError("threshold c must lie in (0, 1]")
    confidence = _lb_confidence(kappa, c, est.trials_T)
    issued = est.p_est >= c
    bound_log2 = est.m + math.log2(c) - math.log2(1.0 + kappa) if issued else None
    return LowerBoundCertificate(
        n=n if n is not None else est.m, m=est.m, f=est.f, T=est.trials_T,
        kappa=kappa, c=c, bound_log2=bound_log2, confidence=confidence,
        p_est=est.p_est, seed=est.seed, c_data_chosen=data_chosen,
        outcomes=est.outcomes, wall_time_s=wall_time_s,
    )


def best_lower_bound(problem: CountingProblem, f: float, m_range, T: int,
                     kappa: float, c: float = None, seed: int = 0,
                     bonferroni: bool = False, solver: SolverProfile = None,
                     budget: float = None) -> LowerBoundCertificate:
    """Scan m over m_range, return the issued certificate with the largest
    bound; all-vacuous scans return the vacuous certificate with the best
    p_est on record.

    With bonferroni=True the per-m failure budget is divided by the number
    of m values scanned (multiplicity correction, off by default).
    """
    m_list = sorted(set(m_range))
    if not m_list or m_list[0] < 1 or m_list[-1] > problem.n:
        raise ValueError("m_range must lie within [1, n]")
    best = None
    best_vacuous = None
    for m in m_list:
        t0 = time.monotonic()
        est = estimate_survival(problem, m, f, T, seed, solver, budget)
        cert = lower_bound(est, kappa, c, n=problem.n,
                           wall_time_s=time.monotonic() - t0)
        if bonferroni:
            fail = (1.0 - cert.confidence) * len(m_list)
            cert = dataclasses.replace(cert, confidence=max(0.0, 1.0 - fail))
        if cert.issued:
            if best is None or cert.bound_log2 > best.bound_log2:
                best = cert
        elif best_vacuous is None or cert.p_est > best_vacuous.p_est:
            best_vacuous = cert
    return best if best is not None else best_vacuous


def upper_bound(problem: CountingProblem, m: int, f: float, delta: float,
                seed: int = 0, T: int = None, solver: SolverProfile = None,
                budget: float = None) -> UpperBoundCertificate:
    """Certificate |S| <= U(n,m,f) when a strict majority of T trials find
    the cell empty; otherwise the vacuous sentinel 2^n.

    T defaults to ceil(24 ln(1/Delta)) and is never allowed below it.
    """
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0,1)")
    t_min = math.ceil(24.0 * math.log(1.0 / delta))
    T = t_min if T is None else max(T, t_min)
    t0 = time.monotonic()
    est = estimate_survival(problem, m, f, T, seed, solver, budget)
    empty = T - est.successes_Y
    fired = empty * 2 > T  # strict majority: median of indicators is 1
    n = problem.n
    if fired:
        u = upper_bound_threshold(n, m, f)
        verdict_log2 = math.log2(u)
    else:
        verdict_log2 = float(n)
    return UpperBoundCertificate(
        n=n, m=m, f=f, T=T, delta=delta, verdict_log2=verdict_log2,
        event_fired=fired, empty_count=empty, seed=seed,
        outcomes=tuple(1 - y for y in est.outcomes),
        wall_time_s=time.monotonic() - t0,
    )


def sparse_count(problem: CountingProblem, config: SparseCountConfig,
                 seed: int = 0, solver: SolverProfile = None,
                 budget: float = None) -> SparseCountResult:
    """SPARSE-COUNT: raise the constraint count until the median survival
    indicator drops below 1; report i-1 as the log2 estimate.

    Median < 1 means at most half the trials saw a survivor.  A break at
    i = 0 reports "fewer than one solution witnessed" (estimate None);
    running out of levels returns n flagged exhausted.
    """
    n = problem.n
    T = config.trials(n)
    max_i = config.max_i if config.max_i is not None else n
    for i in range(0, max_i + 1):
        f_i = config.density_schedule(i)
        if not 0.0 <= f_i <= 0.5:
            raise ValueError("schedule density %r out of [0, 1/2]" % (f_i,))
        stream = derive_seed(seed, i)
        ones = 0
        for t in range(T):
            ans = _trial(problem, i, f_i, derive_seed(stream, t), solver, budget)
            if ans == "unknown":
                raise OracleUnknownError(1, T)
            ones += ans == "sat"
        if ones * 2 <= T:  # median < 1
            if i == 0:
                return SparseCountResult(None, 0, False, T, n, seed)
            return SparseCountResult(float(i - 1), i, False, T, n, seed)
    return SparseCountResult(float(n), max_i, True, T, n, seed)


def pick_promising_m(problem: CountingProblem, f: float, coarse_T: int,
                     seed: int = 0, solver: SolverProfile = None,
                     budget: float = None) -> int:
    """Coarse sweep for the largest m whose survival estimate clears 1/2.

    Geometric probe first (1, 2, 4, ...), then a linear walk upward from the
    best geometric point.  Falls back to m = 1 when nothing clears 1/2.
    """
    if coarse_T < 3:
        raise ValueError("coarse_T must be at least 3")
    n = problem.n

    def p_at(m: int) -> float:
        return estimate_survival(problem, m, f, coarse_T, seed, solver,
                                 budget).p_est

    best = 0
    m = 1
    while m <= n:
        if p_at(m) >= 0.5:
            best = m
        elif best:
            break
        m *= 2
    if best == 0:
        return 1
    m = best + 1
    while m <= n and m < best * 2:
        if p_at(m) < 0.5:
            break
        best = m
        m += 1
    return best
