"""Dynamical systems described as small arithmetic expressions.

A map is an expression tree in one variable.  The same tree is evaluated
correctly rounded at any mantissa length, exactly over the rationals, and
in outward-rounded interval arithmetic.  The number of rounding operations
``K`` is counted from the tree rather than declared by hand.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

from . import mp
from .errors import DomainEscape, InvalidParameter, InvalidShift
from .interval import Interval, iadd, imul, iscale2, isqr, isub
from .mp import DOWN, ERR_BITS, NEAREST, UP, MPFloat

W = ERR_BITS


def _bound_add(*terms: MPFloat) -> MPFloat:
    acc = terms[0]
    for t in terms[1:]:
        acc = mp.add(acc, t, W, UP)
    return acc


def _bmul(a: MPFloat, b: MPFloat) -> MPFloat:
    return mp.mul(a, b, W, UP)


class Expr:
    """Node of a map description.

    ``value`` evaluates with every operation rounded to nearest at ``m``
    bits.  ``value_bound`` additionally returns an upward-rounded bound on
    the distance to the exact value of the expression at the (exact) input
    ``x``, given that the input itself is off by at most ``xb``.
    """

    def consts(self) -> set:
        return set()

    def n_ops(self) -> int:
        return 0


@dataclass(frozen=True, eq=False)
class Var(Expr):
    def value(self, x, m):
        return x

    def value_bound(self, x, xb, m):
        return x, xb

    def exact(self, q):
        return q

    def ival(self, X, w):
        return X

    def pf(self, X, k, w):
        return k, X


@dataclass(frozen=True, eq=False)
class Const(Expr):
    """A named exact constant, rounded to nearest at the working precision.

    ``is_exact`` constants must be representable at every precision used; they
    contribute no rounding to ``K``.
    """

    q: Fraction
    label: str = ""
    is_exact: bool = False
    _cache: dict = field(default_factory=dict, repr=False)

    def _at(self, m):
        hit = self._cache.get(m)
        if hit is None:
            fl, err = mp.gl(self.q, m)
            if self.is_exact and not err.is_zero():
                raise InvalidParameter(f"constant {self.label or self.q} is not exact at {m} bits")
            hit = self._cache[m] = (fl, err)
        return hit

    def value(self, x, m):
        return self._at(m)[0]

    def value_bound(self, x, xb, m):
        return self._at(m)

    def exact(self, q):
        return self.q

    def ival(self, X, w):
        key = ("iv", w)
        hit = self._cache.get(key)
        if hit is None:
            hit = self._cache[key] = Interval.enclose(self.q, w)
        return hit

    def pf(self, X, k, w):
        return (0 if self.is_exact else 1), self.ival(X, w)

    def consts(self):
        return set() if self.is_exact else {self}


@dataclass(frozen=True, eq=False)
class _Binary(Expr):
    a: Expr
    b: Expr

    def consts(self):
        return self.a.consts() | self.b.consts()

    def n_ops(self):
        return 1 + self.a.n_ops() + self.b.n_ops()


class Add(_Binary):
    def value(self, x, m):
        return mp.add(self.a.value(x, m), self.b.value(x, m), m, NEAREST)

    def value_bound(self, x, xb, m):
        a, ea = self.a.value_bound(x, xb, m)
        b, eb = self.b.value_bound(x, xb, m)
        v = mp.add(a, b, m, NEAREST)
        return v, _bound_add(ea, eb, mp.ulp_half(v))

    def exact(self, q):
        return self.a.exact(q) + self.b.exact(q)

    def ival(self, X, w):
        return iadd(self.a.ival(X, w), self.b.ival(X, w), w)

    def pf(self, X, k, w):
        ka, A = self.a.pf(X, k, w)
        kb, B = self.b.pf(X, k, w)
        out = iadd(A, B, w)
        if ka is None or kb is None:
            return None, out
        if ka == kb == 0:
            return 1, out
        same_sign = (A.lo.sign >= 0 and B.lo.sign >= 0) or (A.hi.sign <= 0 and B.hi.sign <= 0)
        return (max(ka, kb) + 1 if same_sign else None), out


class Sub(_Binary):
    def value(self, x, m):
        return mp.sub(self.a.value(x, m), self.b.value(x, m), m, NEAREST)

    def value_bound(self, x, xb, m):
        a, ea = self.a.value_bound(x, xb, m)
        b, eb = self.b.value_bound(x, xb, m)
        v = mp.sub(a, b, m, NEAREST)
        return v, _bound_add(ea, eb, mp.ulp_half(v))

    def exact(self, q):
        return self.a.exact(q) - self.b.exact(q)

    def ival(self, X, w):
        return isub(self.a.ival(X, w), self.b.ival(X, w), w)

    def pf(self, X, k, w):
        ka, A = self.a.pf(X, k, w)
        kb, B = self.b.pf(X, k, w)
        out = isub(A, B, w)
        if ka is None or kb is None:
            return None, out
        if ka == kb == 0:
            return 1, out
        opposite = (A.lo.sign >= 0 and B.hi.sign <= 0) or (A.hi.sign <= 0 and B.lo.sign >= 0)
        return (max(ka, kb) + 1 if opposite else None), out


class Mul(_Binary):
    def value(self, x, m):
        return mp.mul(self.a.value(x, m), self.b.value(x, m), m, NEAREST)

    def value_bound(self, x, xb, m):
        a, ea = self.a.value_bound(x, xb, m)
        b, eb = self.b.value_bound(x, xb, m)
        v = mp.mul(a, b, m, NEAREST)
        return v, _bound_add(_bmul(abs(a), eb), _bmul(abs(b), ea), _bmul(ea, eb), mp.ulp_half(v))

    def exact(self, q):
        return self.a.exact(q) * self.b.exact(q)

    def ival(self, X, w):
        return imul(self.a.ival(X, w), self.b.ival(X, w), w)

    def pf(self, X, k, w):
        ka, A = self.a.pf(X, k, w)
        kb, B = self.b.pf(X, k, w)
        out = imul(A, B, w)
        if ka is None or kb is None:
            return None, out
        return ka + kb + 1, out


@dataclass(frozen=True, eq=False)
class Sqr(Expr):
    a: Expr

    def value(self, x, m):
        t = self.a.value(x, m)
        return mp.mul(t, t, m, NEAREST)

    def value_bound(self, x, xb, m):
        t, et = self.a.value_bound(x, xb, m)
        v = mp.mul(t, t, m, NEAREST)
        two_t = mp.scale2(abs(t), 1)
        return v, _bound_add(_bmul(two_t, et), _bmul(et, et), mp.ulp_half(v))

    def exact(self, q):
        t = self.a.exact(q)
        return t * t

    def ival(self, X, w):
        return isqr(self.a.ival(X, w), w)

    def pf(self, X, k, w):
        ka, A = self.a.pf(X, k, w)
        return (None if ka is None else 2 * ka + 1), isqr(A, w)

    def consts(self):
        return self.a.consts()

    def n_ops(self):
        return 1 + self.a.n_ops()


@dataclass(frozen=True, eq=False)
class Scale2(Expr):
    """Exact scaling by ``2**k``; performs no rounding."""

    a: Expr
    k: int

    def value(self, x, m):
        return mp.scale2(self.a.value(x, m), self.k)

    def value_bound(self, x, xb, m):
        v, e = self.a.value_bound(x, xb, m)
        return mp.scale2(v, self.k), mp.scale2(e, self.k)

    def exact(self, q):
        return self.a.exact(q) * Fraction(2) ** self.k

    def ival(self, X, w):
        return iscale2(self.a.ival(X, w), self.k)

    def pf(self, X, k, w):
        ka, A = self.a.pf(X, k, w)
        return ka, iscale2(A, self.k)

    def consts(self):
        return self.a.consts()

    def n_ops(self):
        return self.a.n_ops()


@dataclass(frozen=True, eq=False)
class Compose(Expr):
    """``outer`` evaluated at the value of ``inner`` (computed once)."""

    outer: Expr
    inner: Expr

    def value(self, x, m):
        return self.outer.value(self.inner.value(x, m), m)

    def value_bound(self, x, xb, m):
        y, yb = self.inner.value_bound(x, xb, m)
        return self.outer.value_bound(y, yb, m)

    def exact(self, q):
        return self.outer.exact(self.inner.exact(q))

    def ival(self, X, w):
        return self.outer.ival(self.inner.ival(X, w), w)

    def pf(self, X, k, w):
        ki, Y = self.inner.pf(X, k, w)
        if ki is None:
            return None, self.outer.ival(Y, w)
        return self.outer.pf(Y, ki, w)

    def consts(self):
        return self.outer.consts() | self.inner.consts()

    def n_ops(self):
        return self.outer.n_ops() + self.inner.n_ops()


X = Var()


def literal(q, label: str = "") -> Const:
    """Constant marked exact when it fits in two bits (so at every precision)."""
    q = mp._exact_value(q)
    exact = q == 0 or mp.gl(q, 2)[1].is_zero()
    return Const(q, label, exact)


ONE = literal(1, "1")
HALF = literal(Fraction(1, 2), "1/2")


@dataclass(frozen=True, eq=False)
class FeasibleMap:
    """A self map ``f: D -> D`` with a derivative description.

    ``deriv_monotone`` declares ``f'`` monotone on ``D`` so its range over a
    subinterval is attained at the endpoints.
    """

    name: str
    domain: tuple
    expr: Expr
    deriv: Expr
    params: dict = field(default_factory=dict)
    deriv_monotone: bool = False

    @cached_property
    def K(self) -> int:
        return self.expr.n_ops() + len(self.expr.consts())

    @cached_property
    def product_form(self) -> bool:
        """True when every rounding enters ``f`` as a ``(1 + delta)`` factor.

        Only then is ``K * 2**-m / (1 - K * 2**-m) * |f_hat|`` a valid bound on
        the evaluation roundoff; cancellation-prone expressions get a running
        error bound instead.
        """
        k, _ = self.expr.pf(self.domain_interval(W), 0, W)
        return k is not None and k <= self.K

    def domain_interval(self, w: int = W) -> Interval:
        key = "_dom%d" % w
        hit = self.__dict__.get(key)
        if hit is None:
            lo, hi = self.domain
            hit = Interval(mp.from_fraction(lo, w, DOWN), mp.from_fraction(hi, w, UP))
            self.__dict__[key] = hit
        return hit

    def check_in_domain(self, x: MPFloat, tol: MPFloat) -> None:
        lo, hi = self.domain
        q = x.to_fraction()
        t = tol.to_fraction()
        if q < lo - t or q > hi + t:
            raise DomainEscape(f"{self.name}: {x} is outside {lo}..{hi} by more than {tol}")

    def eval_rounded(self, x: MPFloat, m: int, tol: MPFloat | None = None) -> MPFloat:
        """``f`` at ``x`` with every operation rounded to nearest at ``m`` bits."""
        if tol is not None:
            self.check_in_domain(x, tol)
        return self.expr.value(x, m)

    def eval_with_roundoff(self, x: MPFloat, m: int) -> tuple[MPFloat, MPFloat]:
        """Rounded value plus a rigorous bound on ``|f_hat(x) - f(x)|``."""
        return self.expr.value_bound(x, mp.zero(), m)

    def eval_exact(self, q: Fraction) -> Fraction:
        return self.expr.exact(Fraction(q))

    def deriv_exact(self, q: Fraction) -> Fraction:
        return self.deriv.exact(Fraction(q))

    def eval_interval(self, I: Interval, w: int = W) -> Interval:
        return self.expr.ival(I, w)

    def deriv_interval(self, I: Interval, w: int = W) -> Interval:
        return self.deriv.ival(I, w)

    def deriv_abs_sup(self, I: Interval, w: int = W) -> MPFloat:
        if self.deriv_monotone:
            a = self.deriv.ival(Interval.point(I.lo), w).mag(w)
            b = self.deriv.ival(Interval.point(I.hi), w).mag(w)
            return mp.max_mp(a, b)
        return self.deriv.ival(I, w).mag(w)

    def image_enclosure(self, I: Interval | None = None, w: int = W, depth: int = 6) -> Interval:
        """Enclosure of ``f(I)`` using monotone pieces where ``f'`` keeps its sign."""
        I = I or self.domain_interval(w)
        pieces = [I]
        for _ in range(depth):
            nxt = []
            for P in pieces:
                mid = mp.scale2(mp.add(P.lo, P.hi, w + 1, NEAREST), -1)
                nxt.append(Interval(P.lo, mid))
                nxt.append(Interval(mid, P.hi))
            pieces = nxt
        lo = hi = None
        for P in pieces:
            d = self.deriv.ival(P, w)
            if d.lo.sign >= 0 or d.hi.sign <= 0:
                a = self.expr.ival(Interval.point(P.lo), w)
                b = self.expr.ival(Interval.point(P.hi), w)
                R = Interval(mp.min_mp(a.lo, b.lo), mp.max_mp(a.hi, b.hi))
            else:
                R = self.expr.ival(P, w)
            lo = R.lo if lo is None else mp.min_mp(lo, R.lo)
            hi = R.hi if hi is None else mp.max_mp(hi, R.hi)
        return Interval(lo, hi)

    def self_maps(self, w: int = W) -> bool:
        """Spot-check ``f(D)`` inside ``D`` up to ``w``-bit outward rounding."""
        D = self.domain_interval(w)
        slack = mp.mul(D.mag(w), mp.pow2(-w + 4), w, UP)
        widened = Interval(mp.sub(D.lo, slack, w, DOWN), mp.add(D.hi, slack, w, UP))
        return self.image_enclosure(D, w).subset_of(widened)


class LogisticVariant(enum.Enum):
    FACTORED = "factored"
    EXPANDED = "expanded"
    CENTERED = "centered"


def make_logistic(variant: LogisticVariant | str = LogisticVariant.FACTORED, mu: str = "4",
                  exact_mu: bool = False) -> FeasibleMap:
    """Logistic map ``mu * x * (1 - x)`` on ``[0, 1]`` in one of three formulations.

    With ``exact_mu`` the constant ``mu`` must be dyadic; its rounding is then
    not counted in ``K``.
    """
    variant = LogisticVariant(variant)
    q = mp.parse_decimal(mu) if isinstance(mu, str) else Fraction(mu)
    if not 0 < q <= 4:
        raise InvalidParameter(f"mu must lie in (0, 4], got {mu}")
    if exact_mu and (q.denominator & (q.denominator - 1)):
        raise InvalidParameter(f"--exact-mu needs a dyadic mu, got {mu}")
    c = Const(q, "mu", exact_mu)
    if variant is LogisticVariant.FACTORED:
        f = Mul(Mul(c, X), Sub(ONE, X))
    elif variant is LogisticVariant.EXPANDED:
        f = Mul(c, Sub(X, Sqr(X)))
    else:
        f = Sub(Scale2(c, -2), Mul(c, Sqr(Sub(X, HALF))))
    df = Mul(c, Sub(ONE, Scale2(X, 1)))
    return FeasibleMap(
        name=f"logistic-{variant.value}",
        domain=(Fraction(0), Fraction(1)),
        expr=f,
        deriv=df,
        params={"mu": str(mu), "variant": variant.value},
        deriv_monotone=True,
    )


def shift_system(fmap: FeasibleMap, M: str = "1") -> FeasibleMap:
    """Conjugate by translation: ``g(x) = f(x - M) + M`` on ``D + M``."""
    q = mp.parse_decimal(M) if isinstance(M, str) else Fraction(M)
    lo, hi = fmap.domain[0] + q, fmap.domain[1] + q
    if lo <= 0 <= hi:
        raise InvalidShift(f"shift by {M} leaves 0 inside [{lo}, {hi}]")
    c = literal(q, "M")
    inner = Sub(X, c)
    return FeasibleMap(
        name=f"{fmap.name}+shift",
        domain=(lo, hi),
        expr=Add(Compose(fmap.expr, inner), c),
        deriv=Compose(fmap.deriv, inner),
        params={**fmap.params, "shift": str(M)},
        deriv_monotone=fmap.deriv_monotone,
    )


MAP_NAMES = ("logistic",)


def named_map(name: str = "logistic", variant: str = "factored", mu: str = "4",
              exact_mu: bool = False, shift: str | None = None) -> FeasibleMap:
    """Build a map from command-line style selectors."""
    if name != "logistic":
        raise InvalidParameter(f"unknown map {name!r}; available: {', '.join(MAP_NAMES)}")
    try:
        fmap = make_logistic(variant, mu, exact_mu)
    except ValueError as exc:
        if isinstance(exc, InvalidParameter):
            raise
        raise InvalidParameter(str(exc)) from None
    return fmap if shift is None else shift_system(fmap, shift)
