"""Closed-form combinatorial quantities behind the hashing bounds.

Everything probability-scale travels through LogNum (a nonnegative real
stored as its natural log) because terms like C(576, 288) overflow binary64
by hundreds of orders of magnitude.  Set-size hypotheses q are arbitrary
Python ints, as are the prefix sums of binomials that define w*.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

__all__ = [
    "LogNum",
    "EpsilonInputs",
    "DensityCertificate",
    "log_binomial",
    "w_star",
    "epsilon",
    "variance_bound_v",
    "upper_bound_threshold",
    "min_density_fstar",
    "asymptotic_density",
]

LN2 = math.log(2.0)

# U-threshold predicate: 1/(1 + 2^(2m) v(z)/z^2) >= 3/4  <=>  ratio <= 1/3
_LOG_ONE_THIRD = math.log(1.0 / 3.0)
_PRED_SLACK = 1e-12  # absorbs log-domain rounding at exact boundaries


class ParameterError(ValueError):
    pass


@dataclass(frozen=True)
class LogNum:
    """Nonnegative real as natural log; -inf is the exact zero."""

    log_value: float

    @classmethod
    def zero(cls) -> "LogNum":
        return cls(float("-inf"))

    @classmethod
    def one(cls) -> "LogNum":
        return cls(0.0)

    @classmethod
    def from_linear(cls, x) -> "LogNum":
        if x < 0:
            raise ValueError("LogNum holds nonnegative reals, got %r" % (x,))
        if x == 0:
            return cls.zero()
        return cls(math.log(x))

    @classmethod
    def from_log(cls, lv: float) -> "LogNum":
        return cls(lv)

    def to_linear(self) -> float:
        if self.is_zero():
            return 0.0
        return math.exp(self.log_value)

    def is_zero(self) -> bool:
        return math.isinf(self.log_value) and self.log_value < 0

    @property
    def log2_value(self) -> float:
        return self.log_value / LN2

    def __add__(self, other: "LogNum") -> "LogNum":
        a, b = self.log_value, other.log_value
        if self.is_zero():
            return other
        if other.is_zero():
            return self
        hi, lo = (a, b) if a >= b else (b, a)
        return LogNum(hi + math.log1p(math.exp(lo - hi)))

    def __mul__(self, other: "LogNum") -> "LogNum":
        if self.is_zero() or other.is_zero():
            return LogNum.zero()
        return LogNum(self.log_value + other.log_value)

    def __truediv__(self, other: "LogNum") -> "LogNum":
        if other.is_zero():
            raise ZeroDivisionError("LogNum division by zero")
        if self.is_zero():
            return LogNum.zero()
        return LogNum(self.log_value - other.log_value)

    def __le__(self, other: "LogNum") -> bool:
        return self.log_value <= other.log_value

    def __lt__(self, other: "LogNum") -> bool:
        return self.log_value < other.log_value


@dataclass(frozen=True)
class EpsilonInputs:
    """Arguments of the collision bound: n variables, m constraints,
    hypothesised set size q, constraint density f."""

    n: int
    m: int
    q: int
    f: float

    def __post_init__(self):
        if not 1 <= self.m <= self.n:
            raise ParameterError("need 1 <= m <= n, got m=%d n=%d" % (self.m, self.n))
        if not 2 <= self.q <= 1 << self.n:
            raise ParameterError("need 2 <= q <= 2^n")
        if not 0.0 <= self.f <= 0.5:
            raise ParameterError("density f must lie in [0, 1/2]")


@dataclass(frozen=True)
class DensityCertificate:
    """Smallest density meeting the shattering sufficiency condition."""

    f_star: float
    n: int
    m: int
    q: int
    delta: float
    condition_value: LogNum  # epsilon at f_star
    threshold_log: float
    tolerance: float
    bracket_lo: float
    bracket_hi: float
    met_at_half: bool  # False: even f = 1/2 fails the condition

    @property
    def c(self) -> float:
        """Slack exponent: q = 2^(m+c)."""
        return math.log2(self.q) - self.m


def log_binomial(n: int, w: int) -> LogNum:
    """ln C(n, w); exact big-int path below n=60, log-gamma above."""
    if w < 0 or w > n:
        raise ParameterError("need 0 <= w <= n, got n=%d w=%d" % (n, w))
    if n <= 60:
        return LogNum.from_linear(math.comb(n, w))
    return LogNum(
        math.lgamma(n + 1) - math.lgamma(w + 1) - math.lgamma(n - w + 1)
    )


def w_star(n: int, q: int) -> int:
    """Largest w with sum_{j=1..w} C(n,j) <= q-1; 0 when even w=1 fails."""
    if q < 2:
        raise ParameterError("q must be at least 2")
    target = q - 1
    prefix = 0
    binom = 1
    w = 0
    while w < n:
        binom = binom * (n - w) // (w + 1)
        if prefix + binom > target:
            break
        prefix += binom
        w += 1
    return w


def _binomial_prefix(n: int, w: int) -> int:
    """Exact sum_{j=1..w} C(n,j)."""
    total = 0
    binom = 1
    for j in range(1, w + 1):
        binom = binom * (n - j + 1) // j
        total += binom
    return total


def epsilon(inputs: EpsilonInputs) -> LogNum:
    """Worst-case average collision bound over sets of size q.

    Two-part sum over Hamming weights: exact terms up to w*, plus the
    remainder r = q-1-prefix at weight w*+1, all divided by q-1.  Evaluated
    entirely in log domain.
    """
    n, m, q, f = inputs.n, inputs.m, inputs.q, inputs.f
    if f == 0.0:
        return LogNum.one()
    if f == 0.5:
        return LogNum(-m * LN2)

    def collide_log(w: int) -> float:
        # ln( (1/2 + 1/2 (1-2f)^w)^m )
        return m * math.log(0.5 + 0.5 * (1.0 - 2.0 * f) ** w)

    target = q - 1
    prefix = 0
    binom = 1
    ws = 0
    terms = []
    while ws < n:
        nxt = binom * (n - ws) // (ws + 1)
        if prefix + nxt > target:
            break
        binom = nxt
        prefix += binom
        ws += 1
        terms.append(math.log(binom) + collide_log(ws))
    r = target - prefix
    if r > 0:
        terms.append(math.log(r) + collide_log(ws + 1))
    hi = max(terms)
    total = hi + math.log(sum(math.exp(t - hi) for t in terms))
    return LogNum(total - math.log(target))


def _log_sub(a: float, b: float) -> float:
    """ln(e^a - e^b) for a > b; -inf when they coincide within rounding."""
    if b == float("-inf"):
        return a
    d = b - a
    if d >= 0:
        return float("-inf")
    return a + math.log1p(-math.exp(d))


def variance_bound_v(q: int, n: int, m: int, f: float) -> LogNum:
    """Variance bound v(q) = (q/2^m) (1 + eps(n,m,q,f) (q-1) - q/2^m).

    q = 1 degenerates to the singleton Bernoulli variance; the inner bracket
    is clamped to zero (with a warning) should rounding drive it negative.
    """
    if q < 1:
        raise ParameterError("q must be positive")
    log_mu = math.log(q) - m * LN2  # ln(q / 2^m)
    if q == 1:
        inner = _log_sub(0.0, log_mu)
    else:
        eps = epsilon(EpsilonInputs(n, m, q, f))
        big = eps.log_value + math.log(q - 1)
        pos = max(0.0, big) + math.log1p(math.exp(-abs(big))) if not eps.is_zero() else 0.0
        inner = _log_sub(pos, log_mu)
    if inner == float("-inf"):
        warnings.warn("variance bound bracket non-positive; clamped to 0")
        return LogNum.zero()
    return LogNum(log_mu + inner)


def _threshold_predicate(z: int, n: int, m: int, f: float) -> bool:
    """1/(1 + 2^(2m) v(z)/z^2) >= 3/4, i.e. the ratio is at most 1/3."""
    v = variance_bound_v(z, n, m, f)
    if v.is_zero():
        return True
    ratio_log = v.log_value + 2 * m * LN2 - 2 * math.log(z)
    return ratio_log <= _LOG_ONE_THIRD + _PRED_SLACK


def upper_bound_threshold(n: int, m: int, f: float) -> int:
    """U(n,m,f): minimal z whose variance-to-mean ratio refutes |S| >= z.

    The predicate is monotone in z (z^2/v(z) is increasing), so an
    exponential probe followed by binary search finds the minimum.  Returns
    the sentinel 2^n when no z <= 2^n qualifies.
    """
    cap = 1 << n
    hi = 1
    while hi <= cap and not _threshold_predicate(hi, n, m, f):
        hi *= 2
    if hi > cap:
        if not _threshold_predicate(cap, n, m, f):
            return cap
        hi = cap
    lo = max(1, hi // 2)
    while lo < hi:
        mid = (lo + hi) // 2
        if _threshold_predicate(mid, n, m, f):
            hi = mid
        else:
            lo = mid + 1
    return hi


def _fstar_threshold_log(q: int, m: int, delta: float) -> float:
    """ln of (mu/(delta-1) + mu - 1) / (q-1) with mu = q/2^m."""
    log_mu = math.log(q) - m * LN2
    k = 1.0 / (delta - 1.0) + 1.0
    if log_mu > 700.0:
        # mu - 1 ~ mu; the dropped 1 is below float resolution here
        num_log = log_mu + math.log(k)
    else:
        mu = math.exp(log_mu)
        num = mu * k - 1.0
        if num <= 0.0:
            return float("-inf")
        num_log = math.log(num)
    return num_log - math.log(q - 1)


def min_density_fstar(
    n: int, m: int, q: int, delta: float, tol: float = 1e-5
) -> DensityCertificate:
    """Smallest f with eps(n,m,q,f) <= (mu/(delta-1) + mu - 1)/(q-1).

    eps is nonincreasing in f, so a plain bisection over [0, 1/2] applies.
    When even f = 1/2 fails, f_star = 1/2 is returned flagged unmet.
    """
    if delta <= 2.0:
        raise ParameterError("delta must exceed 2")
    log_mu = math.log(q) - m * LN2
    if log_mu < 0:
        warnings.warn("q < 2^m (mu < 1): the sufficiency condition is weak here")
    thr = _fstar_threshold_log(q, m, delta)

    def ok(f: float) -> bool:
        return epsilon(EpsilonInputs(n, m, q, f)).log_value <= thr

    if not ok(0.5):
        return DensityCertificate(
            f_star=0.5, n=n, m=m, q=q, delta=delta,
            condition_value=epsilon(EpsilonInputs(n, m, q, 0.5)),
            threshold_log=thr, tolerance=tol,
            bracket_lo=0.5, bracket_hi=0.5, met_at_half=False,
        )
    lo, hi = 0.0, 0.5
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return DensityCertificate(
        f_star=hi, n=n, m=m, q=q, delta=delta,
        condition_value=epsilon(EpsilonInputs(n, m, q, hi)),
        threshold_log=thr, tolerance=tol,
        bracket_lo=lo, bracket_hi=hi, met_at_half=True,
    )


def asymptotic_density(regime: str, m: int, kappa: float = None,
                       alpha: float = None, beta: float = None) -> float:
    """Asymptotic regime formulas for the minimum constraint density.

    All logarithms are natural.  Regimes:
      lower:     log(m) / (kappa m), the necessary density, kappa > 1
      linear:    (3.6 - 5/4 log2 alpha) log(m)/m for m = alpha n, alpha in (0,1)
      sublinear: kappa (1-beta)/(2 beta) log^2(m)/m for m = alpha n^beta
    """
    if m < 1:
        raise ParameterError("m must be positive")
    if regime == "lower":
        if kappa is None or kappa <= 1.0:
            raise ParameterError("lower regime needs kappa > 1")
        return math.log(m) / (kappa * m)
    if regime == "linear":
        if alpha is None or not 0.0 < alpha <= 1.0:
            raise ParameterError("linear regime needs alpha in (0, 1]")
        return (3.6 - 1.25 * math.log2(alpha)) * math.log(m) / m
    if regime == "sublinear":
        if kappa is None or kappa <= 1.0:
            raise ParameterError("sublinear regime needs kappa > 1")
        if beta is None or not 0.0 < beta < 1.0:
            raise ParameterError("sublinear regime needs beta in (0, 1)")
        return kappa * (1.0 - beta) / (2.0 * beta) * math.log(m) ** 2 / m
    raise ParameterError("unknown regime %r" % (regime,))
