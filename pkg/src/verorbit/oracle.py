"""Ground truth for tests: exact rational orbits and high-precision shadows.

Exact iterates are kept as unreduced-by-gcd integer pairs (reduction only
strips factors shared with the constant ``mu``, which is enough to stay in
lowest terms).  GMP integers keep the doubling bit lengths affordable.
"""

from __future__ import annotations

from fractions import Fraction
from typing import NamedTuple

import gmpy2

from . import mp
from .errors import OracleTooLarge
from .mp import MPFloat

MAX_N = 25
MAX_BITS = 1 << 28


class Rational(NamedTuple):
    num: object
    den: object

    @classmethod
    def of(cls, q) -> "Rational":
        q = Fraction(q)
        return cls(gmpy2.mpz(q.numerator), gmpy2.mpz(q.denominator))

    def to_fraction(self) -> Fraction:
        return Fraction(int(self.num), int(self.den))

    def __str__(self) -> str:
        return f"{self.num}/{self.den}"

    @classmethod
    def parse(cls, s: str) -> "Rational":
        """Read a ``num/den`` fixture string."""
        a, _, b = s.partition("/")
        return cls.of(Fraction(int(a), int(b or 1)))


def _strip_common(num, den, s):
    # every common prime factor of num and den divides s
    while True:
        k = gmpy2.gcd(gmpy2.gcd(num % s, s), gmpy2.gcd(den % s, s)) if s > 1 else 1
        if k == 1:
            return num, den
        num //= k
        den //= k


def rational_orbit(mu, x0, N: int) -> list[Rational]:
    """Exact iterates of ``mu * x * (1 - x)`` for rational ``mu`` and ``x0``.

    All three logistic formulations agree over the rationals, so one
    formula serves every variant.
    """
    mu, x0 = Fraction(mu), Fraction(x0)
    if N > MAX_N:
        raise OracleTooLarge(f"N={N} exceeds the oracle guard of {MAX_N}")
    c, d = gmpy2.mpz(mu.numerator), gmpy2.mpz(mu.denominator)
    s = c * d
    a, b = gmpy2.mpz(x0.numerator), gmpy2.mpz(x0.denominator)
    out = [Rational(a, b)]
    for _ in range(N):
        if 2 * b.bit_length() + d.bit_length() > MAX_BITS:
            raise OracleTooLarge("rational iterate would exceed the bit-length guard")
        num = c * a * (b - a)
        den = d * b * b
        if num == 0:
            a, b = gmpy2.mpz(0), gmpy2.mpz(1)
        else:
            a, b = _strip_common(num, den, s)
        out.append(Rational(a, b))
    return out


def exact_orbit(fmap, x0, N: int) -> list[Fraction]:
    """Exact iterates of any map description; for small ``N`` only."""
    x = Fraction(x0)
    out = [x]
    for _ in range(N):
        x = fmap.eval_exact(x)
        out.append(x)
    return out


def abs_error_within(fl: MPFloat, err: MPFloat, q: Rational) -> bool:
    """Exact test of ``|fl - q| <= err``."""
    nf, ef = gmpy2.mpz(fl.significand), fl.lsb
    ne, ee = gmpy2.mpz(err.significand), err.lsb
    e = min(ef, ee, 0)
    # scale everything by 2**-e * den
    lhs = abs((nf << (ef - e)) * q.den - (q.num << -e))
    rhs = (ne << (ee - e)) * q.den
    return lhs <= rhs


def rel_error_within(fl: MPFloat, q: Rational, p: int) -> bool:
    """Exact test of ``|fl - q| <= 10**-p * |q|``."""
    nf, ef = gmpy2.mpz(fl.significand), fl.lsb
    e = min(ef, 0)
    diff = abs((nf << (ef - e)) * q.den - (q.num << -e))
    scaled_q = abs(q.num) << -e
    if p >= 0:
        return diff * 10**p <= scaled_q
    return diff <= scaled_q * 10 ** (-p)


def reference_orbit(fmap, x0, N: int, m: int) -> list[MPFloat]:
    """Plain correctly rounded iteration at ``m`` bits, no error tracking."""
    x, _ = mp.gl(x0, m)
    out = [x]
    for _ in range(N):
        x = fmap.eval_rounded(x, m)
        out.append(x)
    return out
