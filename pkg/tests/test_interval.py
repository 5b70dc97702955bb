import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from verorbit import mp
from verorbit.errors import DomainError
from verorbit.interval import Interval, deriv_range_bound, isqr, ival_arith
from verorbit.mp import DOWN, UP, MPFloat
from verorbit.systems import make_logistic


def iv(a, b, w=64):
    return Interval(mp.from_fraction(Fraction(a), w, DOWN), mp.from_fraction(Fraction(b), w, UP))


def test_point_product():
    q = Interval.point(MPFloat("0.25", 24))
    r = ival_arith("*", q, q, 24)
    assert r.lo == Fraction(1, 16) and r.hi == Fraction(1, 16)


def test_dependency_free_difference():
    r = ival_arith("-", iv(0, 1), iv(0, 1), 24)
    assert r.lo == -1 and r.hi == 1


def test_scalar_third():
    third = Interval.enclose(Fraction(1, 3), 24)
    r = ival_arith("scalar", MPFloat(3, 24), third, 24)
    assert 1 in r
    assert r.width().to_fraction() <= Fraction(4, 2**24)


def test_unknown_op():
    with pytest.raises(ValueError):
        ival_arith("/", iv(1, 2), iv(1, 2))


def test_enclosure_soundness_random():
    rng = random.Random(20240611)
    exact = {"+": lambda a, b: a + b, "-": lambda a, b: a - b, "*": lambda a, b: a * b}

    def rand_interval(w):
        a = Fraction(rng.randint(-10**6, 10**6), rng.randint(1, 10**4))
        b = a + Fraction(rng.randint(0, 10**6), rng.randint(1, 10**6))
        return iv(a, b, w)

    def inside(I):
        t = Fraction(rng.randint(0, 1000), 1000)
        return I.lo.to_fraction() + t * (I.hi.to_fraction() - I.lo.to_fraction())

    for _ in range(10_000):
        w = rng.choice((4, 8, 24, 53))
        A, B = rand_interval(w), rand_interval(w)
        a, b = inside(A), inside(B)
        op = rng.choice(("+", "-", "*", "scalar", "sqr"))
        if op == "scalar":
            c = mp.from_fraction(a, w)
            assert c.to_fraction() * b in ival_arith("scalar", c, B, w)
        elif op == "sqr":
            assert b * b in isqr(B, w)
        else:
            assert exact[op](a, b) in ival_arith(op, A, B, w)


def test_deriv_bound_critical_point():
    f = make_logistic("factored", "4")
    assert deriv_range_bound(f, MPFloat("0.5"), mp.zero()).is_zero()


def test_deriv_bound_affine_endpoint():
    f = make_logistic("factored", "4")
    L = deriv_range_bound(f, MPFloat("0.25", 64), mp.from_fraction(Fraction(1, 20), 64, UP))
    q = L.to_fraction()
    assert Fraction(12, 5) <= q <= Fraction(12, 5) * (1 + Fraction(1, 2**58))


@pytest.mark.parametrize("w", [24, 53, 64])
def test_deriv_bound_full_domain(w):
    f = make_logistic("factored", "3")
    L = deriv_range_bound(f, MPFloat("0.5", w), MPFloat("0.5", w), w)
    assert 3 <= L.to_fraction() <= 3 + Fraction(2) ** (-w + 4)


def test_deriv_bound_outside_domain():
    f = make_logistic("factored", "4")
    with pytest.raises(DomainError):
        deriv_range_bound(f, MPFloat(2), MPFloat("0.5"))
    with pytest.raises(ValueError):
        deriv_range_bound(f, MPFloat("0.5"), MPFloat("-0.1"))


def test_clamp_covers_center_outside_domain():
    # fl sits just above 1; the clamped interval must still contain it
    f = make_logistic("factored", "4")
    c = mp.add(MPFloat(1, 53), mp.pow2(-52), 53)
    L = deriv_range_bound(f, c, mp.pow2(-40))
    assert L.to_fraction() >= abs(f.deriv_exact(c.to_fraction()))


@given(st.fractions(0, 1, max_denominator=10**6), st.fractions(0, 1, max_denominator=10**6),
       st.fractions(0, 1, max_denominator=10**6), st.sampled_from(["1.5", "2.8", "3.7", "4"]))
def test_deriv_bound_monotone_in_radius(c, r1, r2, mu):
    f = make_logistic("factored", mu)
    r1, r2 = sorted((r1, r2))
    center = mp.from_fraction(c, 53)
    b1 = deriv_range_bound(f, center, mp.from_fraction(r1, 64, UP))
    b2 = deriv_range_bound(f, center, mp.from_fraction(r2, 64, UP))
    assert b1 <= b2
    # and it bounds |f'| at the interval ends that lie in D
    c = center.to_fraction()
    for y in (c - r1, c + r1):
        if 0 <= y <= 1:
            assert abs(f.deriv_exact(y)) <= b1.to_fraction()


def _widths(mu, n, w):
    f = make_logistic("factored", mu)
    I = Interval.enclose("0.22", w)
    out = [I]
    for _ in range(n):
        I = f.eval_interval(I, w)
        out.append(I)
    return [(J.hi.to_fraction() - J.lo.to_fraction(), J) for J in out]


def test_natural_extension_doubles_width():
    w = 200
    ws = _widths("2", 100, w)
    for (d, I), (d1, _) in zip(ws, ws[1:]):
        if not (0 < I.lo.to_fraction() and I.hi.to_fraction() < 1):
            break
        assert abs(d1 - 2 * d) <= Fraction(2) ** (-w + 4)
    assert ws[-1][0] > 2**90 * ws[0][0]


def test_natural_extension_mu1_non_expanding():
    w = 100
    ws = _widths("1", 100, w)
    for (d, _), (d1, _) in zip(ws, ws[1:]):
        assert abs(d1 - d) <= Fraction(2) ** (-w + 1)


def test_interval_basics():
    I = iv(Fraction(-1, 2), 2)
    assert I.mig().is_zero()
    assert I.mag() == 2
    assert iv(1, 2).intersect(iv(3, 4)) is None
    assert iv(1, 3).intersect(iv(2, 4)).lo == 2
    assert iv(1, 2).subset_of(iv(0, 3))
    with pytest.raises(ValueError):
        Interval(MPFloat(2), MPFloat(1))
