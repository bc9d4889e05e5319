"""Sparse random parity (XOR) hash functions over GF(2).

A hash h_{A,b}(x) = Ax + b mod 2 maps {0,1}^n to {0,1}^m.  Rows of A are
drawn entrywise Bernoulli(f) with f <= 1/2, b is a uniform m-bit vector.
Rows and assignments are bit-packed into Python ints; the dot product is
(row & x).bit_count() & 1, which is cheap even for n in the thousands.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

__all__ = [
    "HashParams",
    "ParityHash",
    "Assignment",
    "derive_seed",
    "sample_hash",
    "apply_hash",
    "count_survivors",
    "exact_survival_probability",
]

# enumeration ceiling for the exact brute-force oracle: 2^(m*n+m) hash draws
EXACT_ENUM_BITS = 24


class ParameterError(ValueError):
    pass


class DimensionError(ValueError):
    pass


class CapacityError(ValueError):
    pass


@dataclass(frozen=True)
class HashParams:
    """Parameters of the hash family: n variables, m constraints, density f."""

    n: int
    m: int
    f: float
    seed: int = 0

    def __post_init__(self):
        if self.n < 1 or self.m < 1:
            raise ParameterError("n and m must be positive, got n=%d m=%d" % (self.n, self.m))
        if self.m > self.n:
            raise ParameterError("m=%d exceeds n=%d" % (self.m, self.n))
        if not 0.0 <= self.f <= 0.5:
            raise ParameterError("density f must lie in [0, 1/2], got %r" % (self.f,))


@dataclass(frozen=True)
class Assignment:
    """An element of {0,1}^n, bit j of `bits` holding x_j."""

    bits: int
    n: int

    def __post_init__(self):
        if self.bits < 0 or self.bits >> self.n:
            raise DimensionError("assignment does not fit in %d bits" % self.n)

    @classmethod
    def from_string(cls, s: str) -> "Assignment":
        """Parse a 0/1 string, leftmost character = variable 1 (bit 0)."""
        bits = 0
        for j, ch in enumerate(s):
            if ch == "1":
                bits |= 1 << j
            elif ch != "0":
                raise ValueError("invalid bit %r" % ch)
        return cls(bits, len(s))

    def to_string(self) -> str:
        return "".join("1" if (self.bits >> j) & 1 else "0" for j in range(self.n))


@dataclass(frozen=True)
class ParityHash:
    """A sampled hash: rows[i] packs row i of A, bit i of b_bits is b_i."""

    rows: tuple[int, ...]
    b_bits: int
    params: HashParams

    @property
    def m(self) -> int:
        return self.params.m

    @property
    def n(self) -> int:
        return self.params.n


def derive_seed(master: int, index: int) -> int:
    """Per-trial seed: splitmix64 of master ^ index, so trials are independent
    streams but fully reproducible from the master seed."""
    z = (master ^ (index * 0x9E3779B97F4A7C15)) & 0xFFFFFFFFFFFFFFFF
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & 0xFFFFFFFFFFFFFFFF
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & 0xFFFFFFFFFFFFFFFF
    return z ^ (z >> 31)


def sample_hash(params: HashParams) -> ParityHash:
    """Draw h_{A,b} from the f-sparse family.

    The RNG is Python's Mersenne Twister seeded with params.seed; the draw
    order is row-major over A (one uniform per entry, compared against f),
    then one fair coin per entry of b.  Equal params give identical output.
    """
    rng = random.Random(params.seed)
    n, m, f = params.n, params.m, params.f
    rows = []
    for _ in range(m):
        row = 0
        for j in range(n):
            if rng.random() < f:
                row |= 1 << j
        rows.append(row)
    b_bits = 0
    for i in range(m):
        if rng.random() < 0.5:
            b_bits |= 1 << i
    return ParityHash(tuple(rows), b_bits, params)


def apply_hash(h: ParityHash, x: Assignment) -> int:
    """h(x) = Ax + b mod 2, packed into an int (bit i = output i)."""
    if x.n != h.n:
        raise DimensionError("assignment width %d != hash width %d" % (x.n, h.n))
    out = h.b_bits
    for i, row in enumerate(h.rows):
        out ^= ((row & x.bits).bit_count() & 1) << i
    return out


def count_survivors(h: ParityHash, s) -> int:
    """|S ∩ h^-1(0)| for an explicit iterable of Assignments."""
    return sum(1 for x in s if apply_hash(h, x) == 0)


def _as_exact_fraction(f: float) -> Fraction:
    frac = Fraction(f)  # exact for any binary64
    if frac.denominator > (1 << 20):
        # need a short significand so the per-matrix weights stay small
        raise ParameterError(
            "f=%r needs more than 20 significand bits; pick a coarser grid value" % (f,)
        )
    return frac


def exact_survival_probability(s, m: int, f: float) -> Fraction:
    """Exact Pr[S(h) >= 1] by summing over every (A, b) pair.

    Uses the identity S(h_{A,b}) >= 1  <=>  b in {Ax : x in S}, so only the
    2^(m n) matrices are enumerated and each contributes |image|/2^m.  All
    weights are exact rationals; requires m*n + m <= EXACT_ENUM_BITS.
    """
    xs = list(s)
    if not xs:
        return Fraction(0)
    n = xs[0].n
    if any(x.n != n for x in xs):
        raise DimensionError("mixed assignment widths in S")
    if m * n + m > EXACT_ENUM_BITS:
        raise CapacityError(
            "m*n+m = %d exceeds the enumeration cap %d" % (m * n + m, EXACT_ENUM_BITS)
        )
    frac = _as_exact_fraction(f)
    p, den = frac.numerator, frac.denominator  # f = p / den, den = 2^s
    q = den - p
    mn = m * n
    xbits = [x.bits for x in xs]
    # numerator accumulated over matrices: p^ones * q^(mn-ones) * |image|
    pow_p = [p**k for k in range(mn + 1)]
    pow_q = [q**k for k in range(mn + 1)]
    acc = 0
    for amat in range(1 << mn):
        ones = amat.bit_count()
        rows = [(amat >> (i * n)) & ((1 << n) - 1) for i in range(m)]
        image = set()
        for xb in xbits:
            y = 0
            for i, row in enumerate(rows):
                y |= ((row & xb).bit_count() & 1) << i
            image.add(y)
        acc += pow_p[ones] * pow_q[mn - ones] * len(image)
    return Fraction(acc, den**mn * (1 << m))
