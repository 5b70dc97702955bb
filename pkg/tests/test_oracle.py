from fractions import Fraction

import pytest

from verorbit import mp, oracle
from verorbit.engine import trajectory
from verorbit.errors import OracleTooLarge
from verorbit.oracle import Rational
from verorbit.systems import make_logistic

F4 = make_logistic("factored", "4")


def test_critical_point_orbit():
    assert [q.to_fraction() for q in oracle.rational_orbit(4, Fraction(1, 2), 4)] == [
        Fraction(1, 2), 1, 0, 0, 0]


def test_first_iterate_lowest_terms():
    x1 = oracle.rational_orbit(4, Fraction(11, 50), 1)[1]
    assert str(x1) == "429/625"
    assert Rational.parse("429/625") == x1


def test_denominator_doubling():
    orbit = oracle.rational_orbit(4, Fraction(11, 50), 12)
    bits = [int(q.den).bit_length() for q in orbit]
    for a, b in zip(bits[2:], bits[3:]):
        assert 1.9 <= b / a <= 2.1


@pytest.mark.parametrize("mu", [Fraction(1), Fraction(5, 2), Fraction(7, 2), Fraction(15, 4),
                                Fraction(37, 10), Fraction(4)])
def test_lowest_terms_and_variant_independence(mu):
    orbit = oracle.rational_orbit(mu, Fraction(11, 50), 8)
    for variant in ("factored", "expanded", "centered"):
        f = make_logistic(variant, mu)
        assert [q.to_fraction() for q in orbit] == oracle.exact_orbit(f, Fraction(11, 50), 8)
    for q in orbit:
        frac = q.to_fraction()
        assert (int(q.num), int(q.den)) == (frac.numerator, frac.denominator)


def test_size_guard():
    with pytest.raises(OracleTooLarge):
        oracle.rational_orbit(4, Fraction(11, 50), oracle.MAX_N + 1)


def test_error_predicates_exact():
    q = Rational.of(Fraction(1, 3))
    fl = mp.from_fraction(Fraction(1, 3), 53)
    d = abs(fl.to_fraction() - Fraction(1, 3))
    assert oracle.abs_error_within(fl, mp.from_fraction(d, 64, mp.UP), q)
    assert not oracle.abs_error_within(fl, mp.from_fraction(d / 2, 64), q)
    assert oracle.rel_error_within(fl, q, 15)
    assert not oracle.rel_error_within(fl, q, 17)
    assert oracle.rel_error_within(mp.from_int(30), Rational.of(10), -1)
    assert not oracle.rel_error_within(mp.from_int(30), Rational.of(1), -1)


def test_reference_fixed_point():
    f = make_logistic("factored", "2")
    for m in (2, 24, 53, 200):
        assert all(x == Fraction(1, 2) for x in oracle.reference_orbit(f, "0.5", 50, m))


def test_reference_reproducible():
    a = oracle.reference_orbit(F4, "0.22", 10, 53)
    b = oracle.reference_orbit(F4, "0.22", 10, 53)
    assert all(x.same_bits(y) for x, y in zip(a, b))
    assert mp.to_hex(a[10]) == "0x1.43d8af26d527cp-3"


def test_low_precision_divergence_index():
    a = oracle.reference_orbit(F4, "0.22", 60, 24)
    b = oracle.reference_orbit(F4, "0.22", 60, 53)
    first = next(n for n, (x, y) in enumerate(zip(a, b))
                 if abs(x.to_fraction() - y.to_fraction()) > abs(y.to_fraction()) / 10**6)
    assert first == 5


@pytest.mark.parametrize("mu,m", [("3.7", 300), ("4", 260)])
def test_shadow_agreement(mu, m):
    f = make_logistic("factored", mu)
    N = 200
    lo = trajectory(f, "0.22", N, m)
    hi = trajectory(f, "0.22", N, m + 64)
    ref = oracle.reference_orbit(f, "0.22", N, m + 64)
    for r, s, x in zip(lo, hi, ref):
        assert s.fl == x
        # s.err bounds the shadow's own distance to the true orbit
        slack = s.err.to_fraction()
        assert abs(r.fl.to_fraction() - x.to_fraction()) <= r.err.to_fraction() + slack
