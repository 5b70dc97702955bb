"""Outward-rounded interval arithmetic over :class:`MPFloat` endpoints."""

from __future__ import annotations

from fractions import Fraction

from . import mp
from .errors import DomainError
from .mp import DOWN, ERR_BITS, UP, MPFloat


class Interval:
    __slots__ = ("lo", "hi")

    def __init__(self, lo: MPFloat, hi: MPFloat):
        if lo > hi:
            raise ValueError(f"empty interval [{lo}, {hi}]")
        self.lo = lo
        self.hi = hi

    @classmethod
    def point(cls, x: MPFloat) -> "Interval":
        return cls(x, x)

    @classmethod
    def enclose(cls, q, w: int = ERR_BITS) -> "Interval":
        """Tightest ``w``-bit interval containing the exact value ``q``."""
        q = mp._exact_value(q)
        return cls(mp.from_fraction(q, w, DOWN), mp.from_fraction(q, w, UP))

    def __repr__(self) -> str:
        return f"Interval({self.lo}, {self.hi})"

    def __contains__(self, q) -> bool:
        if isinstance(q, MPFloat):
            return self.lo <= q <= self.hi
        q = Fraction(q)
        return self.lo.to_fraction() <= q <= self.hi.to_fraction()

    def width(self, w: int = ERR_BITS) -> MPFloat:
        return mp.sub(self.hi, self.lo, w, UP)

    def mag(self, w: int = ERR_BITS) -> MPFloat:
        """Upper bound on ``max |x|`` over the interval."""
        return mp.round_to(mp.max_mp(abs(self.lo), abs(self.hi)), w, UP)

    def mig(self) -> MPFloat:
        """Exact ``min |x|`` over the interval."""
        if self.lo.sign > 0:
            return self.lo
        if self.hi.sign < 0:
            return -self.hi
        return mp.zero()

    def subset_of(self, other: "Interval") -> bool:
        return other.lo <= self.lo and self.hi <= other.hi

    def intersect(self, other: "Interval") -> "Interval | None":
        lo = mp.max_mp(self.lo, other.lo)
        hi = mp.min_mp(self.hi, other.hi)
        return Interval(lo, hi) if lo <= hi else None


def iadd(a: Interval, b: Interval, w: int) -> Interval:
    return Interval(mp.add(a.lo, b.lo, w, DOWN), mp.add(a.hi, b.hi, w, UP))


def isub(a: Interval, b: Interval, w: int) -> Interval:
    return Interval(mp.sub(a.lo, b.hi, w, DOWN), mp.sub(a.hi, b.lo, w, UP))


def imul(a: Interval, b: Interval, w: int) -> Interval:
    al, ah, bl, bh = a.lo, a.hi, b.lo, b.hi
    if al.sign >= 0 and bl.sign >= 0:
        return Interval(mp.mul(al, bl, w, DOWN), mp.mul(ah, bh, w, UP))
    if ah.sign <= 0 and bh.sign <= 0:
        return Interval(mp.mul(ah, bh, w, DOWN), mp.mul(al, bl, w, UP))
    if al.sign >= 0 and bh.sign <= 0:
        return Interval(mp.mul(ah, bl, w, DOWN), mp.mul(al, bh, w, UP))
    if ah.sign <= 0 and bl.sign >= 0:
        return Interval(mp.mul(al, bh, w, DOWN), mp.mul(ah, bl, w, UP))
    pairs = ((al, bl), (al, bh), (ah, bl), (ah, bh))
    lo = min(mp.mul(x, y, w, DOWN) for x, y in pairs)
    hi = max(mp.mul(x, y, w, UP) for x, y in pairs)
    return Interval(lo, hi)


def iscale(c: MPFloat, a: Interval, w: int) -> Interval:
    """Product of a point scalar and an interval."""
    return imul(Interval(c, c), a, w)


def iscale2(a: Interval, k: int) -> Interval:
    return Interval(mp.scale2(a.lo, k), mp.scale2(a.hi, k))


def isqr(a: Interval, w: int) -> Interval:
    """Square without the dependency overestimate of ``a * a``."""
    if a.lo.sign >= 0:
        return Interval(mp.mul(a.lo, a.lo, w, DOWN), mp.mul(a.hi, a.hi, w, UP))
    if a.hi.sign <= 0:
        return Interval(mp.mul(a.hi, a.hi, w, DOWN), mp.mul(a.lo, a.lo, w, UP))
    m = mp.max_mp(-a.lo, a.hi)
    return Interval(mp.zero(w), mp.mul(m, m, w, UP))


_IOPS = {"+": iadd, "-": isub, "*": imul}


def ival_arith(op: str, a, b: Interval, w: int = ERR_BITS) -> Interval:
    """Outward-rounded ``a op b``.

    ``op`` is one of ``+ - *`` or ``scalar`` (``a`` an :class:`MPFloat`).
    """
    mp._check_m(w)
    if op == "scalar":
        return iscale(a, b, w)
    try:
        return _IOPS[op](a, b, w)
    except KeyError:
        raise ValueError(f"unknown interval operation {op!r}") from None


def deriv_range_bound(fmap, center: MPFloat, radius: MPFloat, w: int = ERR_BITS,
                      clamp: bool = True) -> MPFloat:
    """Upward-rounded bound on ``sup |f'|`` over ``[center - radius, center + radius]``.

    The interval is intersected with the hull of the map's domain and
    ``center`` unless ``clamp`` is false.  Raises :class:`DomainError` when that intersection
    is empty.
    """
    if radius.sign < 0:
        raise ValueError("radius must be nonnegative")
    lo = mp.sub(center, radius, w, DOWN)
    hi = mp.add(center, radius, w, UP)
    dom = fmap.domain_interval(w)
    if lo > dom.hi or hi < dom.lo:
        raise DomainError(f"[{lo}, {hi}] does not meet the domain of {fmap.name}")
    if clamp:
        # clamp to hull(D, center): the segment from center to any x in D stays covered
        lo = mp.max_mp(lo, mp.min_mp(dom.lo, mp.round_to(center, w, DOWN)))
        hi = mp.min_mp(hi, mp.max_mp(dom.hi, mp.round_to(center, w, UP)))
    return fmap.deriv_abs_sup(Interval(lo, hi), w)
