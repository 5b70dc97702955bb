"""Binary floating point numbers of arbitrary mantissa length.

A value is stored as ``n * 2**e`` where ``n`` is a signed integer whose
magnitude has exactly ``m`` bits (or is zero).  Exponents are unbounded
Python integers, so there is no overflow, underflow, subnormal range or
infinity.  All arithmetic is exact followed by a single rounding in the
requested direction.
"""

from __future__ import annotations

import enum
import math
import re
from decimal import Decimal
from fractions import Fraction
from typing import Union

from .errors import DomainError, InvalidPrecision, ParseError

# Precision of every error bound and every Lipschitz computation.
ERR_BITS = 64


class RoundingMode(enum.Enum):
    NEAREST_EVEN = "nearest"
    UP = "up"
    DOWN = "down"


NEAREST = RoundingMode.NEAREST_EVEN
UP = RoundingMode.UP
DOWN = RoundingMode.DOWN


class MPFloat:
    """Immutable binary floating point value with mantissa length ``m``.

    ``MPFloat`` instances compare and hash by real value, so ``0.5`` at 24
    bits equals ``0.5`` at 100 bits.  Use :meth:`same_bits` for structural
    identity.
    """

    __slots__ = ("_n", "_e", "m")

    def __init__(self, value: Union[int, str, Fraction, "MPFloat"] = 0, m: int = 53):
        _check_m(m)
        if isinstance(value, MPFloat):
            r = round_to(value, m, NEAREST)
        elif isinstance(value, str):
            r = from_fraction(parse_decimal(value), m, NEAREST)
        elif isinstance(value, (int, Fraction)):
            r = from_fraction(Fraction(value), m, NEAREST)
        else:
            raise TypeError(f"cannot build MPFloat from {type(value).__name__}")
        self._n, self._e, self.m = r._n, r._e, m

    # -- views ----------------------------------------------------------------

    @property
    def sign(self) -> int:
        return (self._n > 0) - (self._n < 0)

    @property
    def mantissa(self) -> int:
        """Magnitude of the significand as an ``m``-bit integer."""
        return abs(self._n)

    @property
    def exponent(self) -> int:
        """Scientific exponent: ``|x| = 1.f * 2**exponent`` for ``x != 0``."""
        if self._n == 0:
            return 0
        return self._e + self.m - 1

    @property
    def significand(self) -> int:
        """Signed integer ``n`` with ``x == n * 2**lsb``."""
        return self._n

    @property
    def lsb(self) -> int:
        return self._e

    def is_zero(self) -> bool:
        return self._n == 0

    # -- conversions -------------------------------------------------------

    def to_fraction(self) -> Fraction:
        if self._e >= 0:
            return Fraction(self._n << self._e)
        return Fraction(self._n, 1 << -self._e)

    def __float__(self) -> float:
        return float(self.to_fraction())

    def hex(self) -> str:
        return to_hex(self)

    def __repr__(self) -> str:
        return f"MPFloat({to_hex(self)!r}, m={self.m})"

    def __str__(self) -> str:
        return to_decimal(self)

    # -- comparison (by value) ---------------------------------------------

    def _cmp(self, other) -> int:
        if isinstance(other, MPFloat):
            a, ea, b, eb = self._n, self._e, other._n, other._e
            sa, sb = (a > 0) - (a < 0), (b > 0) - (b < 0)
            if sa != sb or sa == 0:
                return (sa > sb) - (sa < sb)
            if ea > eb:
                a <<= ea - eb
            else:
                b <<= eb - ea
            return (a > b) - (a < b)
        if isinstance(other, (int, Fraction)):
            q = self.to_fraction()
            return (q > other) - (q < other)
        return NotImplemented

    def __eq__(self, other):
        c = self._cmp(other)
        return c if c is NotImplemented else c == 0

    def __lt__(self, other):
        c = self._cmp(other)
        return c if c is NotImplemented else c < 0

    def __le__(self, other):
        c = self._cmp(other)
        return c if c is NotImplemented else c <= 0

    def __gt__(self, other):
        c = self._cmp(other)
        return c if c is NotImplemented else c > 0

    def __ge__(self, other):
        c = self._cmp(other)
        return c if c is NotImplemented else c >= 0

    def __hash__(self) -> int:
        return hash(self.to_fraction())

    def same_bits(self, other: "MPFloat") -> bool:
        return self._n == other._n and self._e == other._e and self.m == other.m

    def __neg__(self) -> "MPFloat":
        return _mk(-self._n, self._e, self.m)

    def __abs__(self) -> "MPFloat":
        return self if self._n >= 0 else _mk(-self._n, self._e, self.m)

    def __reduce__(self):
        return (_mk, (self._n, self._e, self.m))


_new = object.__new__


def _mk(n: int, e: int, m: int) -> MPFloat:
    x = _new(MPFloat)
    x._n = n
    x._e = e
    x.m = m
    return x


def zero(m: int = ERR_BITS) -> MPFloat:
    return _mk(0, 0, m)


def _check_m(m: int) -> None:
    if not isinstance(m, int) or m < 2:
        raise InvalidPrecision(f"mantissa length must be an integer >= 2, got {m!r}")


def _round(n: int, e: int, m: int, mode: RoundingMode, sticky: bool = False) -> MPFloat:
    # Rounds (n + s) * 2**e where 0 < s < 1 carries the sign of n when sticky.
    # Callers guarantee bit_length(|n|) > m whenever sticky is set.
    if n == 0:
        return _mk(0, 0, m)
    neg = n < 0
    a = -n if neg else n
    shift = a.bit_length() - m
    if shift <= 0:
        return _mk(n << -shift, e + shift, m)
    q = a >> shift
    r = a & ((1 << shift) - 1)
    if r or sticky:
        if mode is NEAREST:
            half = 1 << (shift - 1)
            if r > half or (r == half and (sticky or q & 1)):
                q += 1
        elif (mode is UP) is not neg:
            q += 1
        if q >> m:
            q >>= 1
            shift += 1
    return _mk(-q if neg else q, e + shift, m)


def round_to(x: MPFloat, m: int, mode: RoundingMode = NEAREST) -> MPFloat:
    """Round ``x`` to ``m`` bits in direction ``mode``."""
    return _round(x._n, x._e, m, mode)


def from_fraction(q: Fraction, m: int, mode: RoundingMode = NEAREST) -> MPFloat:
    """Correctly rounded conversion of an exact rational."""
    num, den = q.numerator, q.denominator
    if num == 0:
        return _mk(0, 0, m)
    if den == 1:
        return _round(num, 0, m, mode)
    a = -num if num < 0 else num
    s = m + 2 + den.bit_length() - a.bit_length()
    if s > 0:
        quo, rem = divmod(a << s, den)
    else:
        quo, rem = divmod(a, den << -s)
    return _round(-quo if num < 0 else quo, -s, m, mode, rem != 0)


def from_int(k: int, m: int = ERR_BITS, mode: RoundingMode = NEAREST) -> MPFloat:
    return _round(k, 0, m, mode)


def pow2(k: int, m: int = ERR_BITS) -> MPFloat:
    """Exact ``2**k``."""
    return _mk(1 << (m - 1), k - m + 1, m)


# -- arithmetic ---------------------------------------------------------------


def add(a: MPFloat, b: MPFloat, m: int, mode: RoundingMode = NEAREST) -> MPFloat:
    na, nb = a._n, b._n
    if nb == 0:
        return _round(na, a._e, m, mode)
    if na == 0:
        return _round(nb, b._e, m, mode)
    ea, eb = a._e, b._e
    la, lb = abs(na).bit_length(), abs(nb).bit_length()
    if ea + la < eb + lb:
        na, nb, ea, eb, la, lb = nb, na, eb, ea, lb, la
    # a is the operand of larger magnitude; extend it to >= m+3 bits
    k = m + 3 - la
    if k < 0:
        k = 0
    big_e = ea - k
    if eb + lb <= big_e:
        # |b| < 2**big_e: b only contributes a sticky bit
        A = (abs(na)) << k
        if (na > 0) != (nb > 0):
            A -= 1
        return _round(A if na > 0 else -A, big_e, m, mode, True)
    if ea >= eb:
        return _round((na << (ea - eb)) + nb, eb, m, mode)
    return _round(na + (nb << (eb - ea)), ea, m, mode)


def sub(a: MPFloat, b: MPFloat, m: int, mode: RoundingMode = NEAREST) -> MPFloat:
    return add(a, _mk(-b._n, b._e, b.m), m, mode)


def mul(a: MPFloat, b: MPFloat, m: int, mode: RoundingMode = NEAREST) -> MPFloat:
    return _round(a._n * b._n, a._e + b._e, m, mode)


def div(a: MPFloat, b: MPFloat, m: int, mode: RoundingMode = NEAREST) -> MPFloat:
    nb = b._n
    if nb == 0:
        raise DomainError("division by zero")
    na = a._n
    if na == 0:
        return _mk(0, 0, m)
    neg = (na < 0) != (nb < 0)
    x, y = abs(na), abs(nb)
    s = m + 3 + y.bit_length() - x.bit_length()
    if s < 0:
        s = 0
    quo, rem = divmod(x << s, y)
    return _round(-quo if neg else quo, a._e - b._e - s, m, mode, rem != 0)


def scale2(x: MPFloat, k: int) -> MPFloat:
    """Exact multiplication by ``2**k``."""
    if x._n == 0:
        return x
    return _mk(x._n, x._e + k, x.m)


_OPS = {"+": add, "-": sub, "*": mul, "/": div}


def rounded_op(op: str, a: MPFloat, b: MPFloat, m: int, mode: RoundingMode = NEAREST) -> MPFloat:
    """Exact ``a op b`` rounded to ``m`` bits in direction ``mode``."""
    _check_m(m)
    try:
        fn = _OPS[op]
    except KeyError:
        raise ValueError(f"unknown operation {op!r}") from None
    return fn(a, b, m, mode)


def ulp_half(x: MPFloat) -> MPFloat:
    """Half a unit in the last place of ``x`` at its own mantissa length."""
    if x._n == 0:
        return zero()
    return pow2(x._e - 1)


def max_mp(a: MPFloat, b: MPFloat) -> MPFloat:
    return a if a >= b else b


def min_mp(a: MPFloat, b: MPFloat) -> MPFloat:
    return a if a <= b else b


# -- decimal input ------------------------------------------------------------

_DECIMAL_RE = re.compile(r"[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?\Z")


def parse_decimal(s: str) -> Fraction:
    """Exact rational value of a decimal literal like ``-1.25e-3``."""
    if not isinstance(s, str):
        raise ParseError(f"expected a decimal string, got {type(s).__name__}")
    t = s.strip()
    if not _DECIMAL_RE.match(t):
        raise ParseError(f"malformed decimal string: {s!r}")
    return Fraction(Decimal(t))


def _exact_value(x) -> Fraction:
    if isinstance(x, MPFloat):
        return x.to_fraction()
    if isinstance(x, str):
        return parse_decimal(x)
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    raise TypeError(f"unsupported exact value {x!r}")


def gl(x, m: int) -> tuple[MPFloat, MPFloat]:
    """Round ``x`` to nearest at ``m`` bits.

    Returns ``(fl, err)`` where ``err`` is ``|fl - x|`` rounded upward to
    :data:`ERR_BITS` bits.
    """
    _check_m(m)
    q = _exact_value(x)
    fl = from_fraction(q, m, NEAREST)
    d = abs(fl.to_fraction() - q)
    return fl, from_fraction(d, ERR_BITS, UP)


# -- hex and decimal output ---------------------------------------------------


def to_hex(x: MPFloat) -> str:
    """``±0x1.hhhp±e`` with all ``m - 1`` fraction bits."""
    n = x._n
    if n == 0:
        return "0x0p+0"
    sign = "-" if n < 0 else ""
    a = abs(n)
    frac_bits = x.m - 1
    ndig = (frac_bits + 3) // 4
    frac = (a - (1 << frac_bits)) << (4 * ndig - frac_bits)
    e = x.exponent
    body = f"{frac:0{ndig}x}" if ndig else ""
    dot = "." if ndig else ""
    return f"{sign}0x1{dot}{body}p{e:+d}"


_HEX_RE = re.compile(r"([+-]?)0x([0-9a-fA-F]+)(?:\.([0-9a-fA-F]*))?p([+-]?\d+)\Z")


def from_hex(s: str, m: int | None = None) -> MPFloat:
    """Parse ``to_hex`` output; ``m`` defaults to the digits present."""
    g = _HEX_RE.match(s.strip())
    if not g:
        raise ParseError(f"malformed hex float: {s!r}")
    sign, ip, fp, e = g.group(1), g.group(2), g.group(3) or "", int(g.group(4))
    n = int(ip + fp, 16)
    if sign == "-":
        n = -n
    q = Fraction(n) * Fraction(2) ** (e - 4 * len(fp))
    if m is None:
        m = max(2, int(ip, 16).bit_length() + 4 * len(fp))
    r = from_fraction(q, m, NEAREST)
    if r.to_fraction() != q:
        raise ParseError(f"{s!r} is not representable in {m} bits")
    return r


_LOG10_2 = math.log10(2)


def _digits_of(x: MPFloat, digits: int, ceil: bool) -> tuple[int, int]:
    # Returns (q, k) with q an integer of `digits` digits and |x| ~ q * 10**-k.
    a, e = abs(x._n), x._e
    k = digits - 1 - math.floor((a.bit_length() + e - 1) * _LOG10_2)
    while True:
        num, den = a, 1
        if e >= 0:
            num <<= e
        else:
            den <<= -e
        if k >= 0:
            num *= 10**k
        else:
            den *= 10 ** (-k)
        q, r = divmod(num, den)
        if ceil:
            q += r != 0
        elif 2 * r > den or (2 * r == den and q & 1):
            q += 1
        if q >= 10**digits:
            k -= 1
        elif q < 10 ** (digits - 1):
            k += 1
        else:
            return q, k


def _format_sci(neg: bool, q: int, k: int, digits: int) -> str:
    s = str(Decimal(q))
    exp = len(s) - 1 - k
    mant = s[0] + ("." + s[1:] if len(s) > 1 else "")
    return f"{'-' if neg else ''}{mant}e{exp:+d}"


def roundtrip_digits(m: int) -> int:
    return math.ceil(m * _LOG10_2) + 1


def to_decimal(x: MPFloat, digits: int | None = None) -> str:
    """Scientific decimal string, by default with enough digits to round-trip."""
    if x._n == 0:
        return "0"
    d = digits or roundtrip_digits(x.m)
    q, k = _digits_of(x, d, ceil=False)
    return _format_sci(x._n < 0, q, k, d)


def to_decimal_up(x: MPFloat, digits: int = 3) -> str:
    """Decimal string of a nonnegative bound, rounded upward."""
    if x._n == 0:
        return "0"
    if x._n < 0:
        raise ValueError("upward bound printing expects a nonnegative value")
    q, k = _digits_of(x, digits, ceil=True)
    return _format_sci(False, q, k, digits)
