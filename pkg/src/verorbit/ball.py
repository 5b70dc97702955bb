"""Finite precision representations ``(fl, err)`` and the verified map step."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from . import mp
from .errors import DomainError, DomainEscape, PrecisionTooSmall
from .interval import deriv_range_bound
from .mp import ERR_BITS, UP, MPFloat

W = ERR_BITS


@dataclass(frozen=True)
class FPRepr:
    """Approximation ``fl`` with a guaranteed absolute bound ``|fl - x| <= err``."""

    fl: MPFloat
    err: MPFloat

    def __post_init__(self):
        if self.err.sign < 0:
            raise ValueError("error bound must be nonnegative")

    def contains(self, q: Fraction) -> bool:
        return abs(self.fl.to_fraction() - Fraction(q)) <= self.err.to_fraction()


@lru_cache(maxsize=None)
def _roundoff_factor(K: int, m: int, wilkinson: bool) -> MPFloat:
    ku = mp.mul(mp.from_int(K), mp.pow2(-m), W, UP)
    if wilkinson:
        c = mp.from_fraction(Fraction(106, 100), W, UP)
        return mp.mul(c, ku, W, UP)
    den = mp.sub(mp.from_int(1), ku, W, mp.DOWN)
    return mp.div(ku, den, W, UP)


@dataclass(frozen=True)
class StepBoundParams:
    """Rounding-operation count ``K`` and mantissa length ``m`` of one step.

    ``wilkinson`` selects the ``1.06 * K * 2**-m`` roundoff factor instead of
    ``K * 2**-m / (1 - K * 2**-m)``.  ``domain_clamp`` intersects the
    derivative range interval with the domain.
    """

    K: int
    m: int
    wilkinson: bool = False
    domain_clamp: bool = True
    factor: MPFloat = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.K < 1:
            raise ValueError(f"K must be >= 1, got {self.K}")
        mp._check_m(self.m)
        if self.K >= (1 << self.m):
            raise PrecisionTooSmall(f"K * 2**-m = {self.K} * 2**-{self.m} is not below 1")
        if self.wilkinson and 10 * self.K > (1 << self.m):
            raise PrecisionTooSmall(f"the 1.06 factor needs K <= 0.1 * 2**m (K={self.K}, m={self.m})")
        object.__setattr__(self, "factor", _roundoff_factor(self.K, self.m, self.wilkinson))


@lru_cache(maxsize=None)
def _prec_ratio(p: int) -> tuple[int, int]:
    # threshold 10**-p / (1 + 10**-p) as the fraction b / a
    if p >= 0:
        return 10**p + 1, 1
    t = 10 ** (-p)
    return t + 1, t


def prec(r: FPRepr, p: int) -> bool:
    """True iff ``err <= 10**-p / (1 + 10**-p) * |fl|`` (compared exactly).

    A true result on a sound representation implies ``|fl - x| <= 10**-p * |x|``.
    """
    a, b = _prec_ratio(p)
    ne, ee = r.err.significand, r.err.lsb
    nf, ef = abs(r.fl.significand), r.fl.lsb
    if ne == 0:
        return True
    lhs, rhs = ne * a, nf * b
    if ee > ef:
        lhs <<= ee - ef
    else:
        rhs <<= ef - ee
    return lhs <= rhs


def roundoff_term(fmap, x: MPFloat, params: StepBoundParams) -> tuple[MPFloat, MPFloat]:
    """``f_hat(x)`` at ``params.m`` bits and a bound on ``|f_hat(x) - f(x)|``."""
    if fmap.product_form:
        v = fmap.eval_rounded(x, params.m)
        return v, mp.mul(params.factor, mp.round_to(abs(v), W, UP), W, UP)
    return fmap.eval_with_roundoff(x, params.m)


def apply_feasible_map(r: FPRepr, fmap, params: StepBoundParams) -> FPRepr:
    """One verified step ``[x] <- [f]([x])``.

    The new bound is ``L * err + roundoff`` with ``L`` an upper bound on
    ``|f'|`` over the error neighbourhood of ``fl``.
    """
    try:
        L = deriv_range_bound(fmap, r.fl, r.err, W, clamp=params.domain_clamp)
    except DomainError as exc:
        raise DomainEscape(str(exc)) from None
    v, R = roundoff_term(fmap, r.fl, params)
    return FPRepr(v, mp.add(mp.mul(L, r.err, W, UP), R, W, UP))


def initial_repr(x0, m: int, params: StepBoundParams) -> FPRepr:
    """``gl(x0, m)`` with the error widened to the roundoff-factor bound."""
    fl, gerr = mp.gl(x0, m)
    term = mp.mul(params.factor, mp.round_to(abs(fl), W, UP), W, UP)
    return FPRepr(fl, mp.max_mp(gerr, term))
