from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from verorbit import mp, oracle
from verorbit.ball import FPRepr, StepBoundParams, apply_feasible_map, initial_repr, prec
from verorbit.engine import trajectory
from verorbit.errors import DomainEscape, PrecisionTooSmall
from verorbit.mp import DOWN, UP, MPFloat
from verorbit.systems import make_logistic, shift_system

P_GRID = (-2, 0, 3, 6, 12)


def rep(fl, err, m=64):
    return FPRepr(mp.from_fraction(Fraction(fl), m), mp.from_fraction(Fraction(err), 64, UP))


def threshold(p):
    t = Fraction(10) ** -p
    return t / (1 + t)


def next_up(x: MPFloat) -> MPFloat:
    return mp.add(x, mp.pow2(x.lsb), x.m, UP)


def test_prec_examples():
    assert prec(FPRepr(mp.zero(), mp.zero()), 6)
    for p in P_GRID:
        assert prec(FPRepr(MPFloat(1), mp.zero()), p)
    assert not prec(rep(1, Fraction(2, 10**6)), 6)


@pytest.mark.parametrize("p", P_GRID)
def test_prec_sharp_at_integer_threshold(p):
    if p >= 0:
        fl, err = 10**p + 1, 1
    else:
        fl, err = 10**-p + 1, 10**-p
    r = FPRepr(MPFloat(fl, 64), MPFloat(err, 64))
    assert prec(r, p)
    assert not prec(FPRepr(r.fl, next_up(r.err)), p)
    assert prec(FPRepr(-r.fl, r.err), p)


@pytest.mark.parametrize("p", P_GRID)
@given(st.fractions(Fraction(1, 10**9), 10**9, max_denominator=10**12), st.integers(2, 120))
def test_prec_bracketing(p, q, m):
    fl = mp.from_fraction(q, m)
    below = mp.from_fraction(threshold(p) * fl.to_fraction(), 64, DOWN)
    above = next_up(mp.from_fraction(threshold(p) * fl.to_fraction(), 64, UP))
    assert prec(FPRepr(fl, below), p)
    assert not prec(FPRepr(fl, above), p)


def test_prec_zero_fl_nonzero_err():
    assert not prec(rep(0, Fraction(1, 2**80)), 6)


@pytest.mark.parametrize("mu", ["1", "2.5", "3.5", "4"])
def test_prec_soundness_on_oracle_orbits(mu):
    f = make_logistic("factored", mu)
    exact = oracle.rational_orbit(Fraction(mu), Fraction(11, 50), 14)
    checked = 0
    for m in (24, 53, 100):
        for r, q in zip(trajectory(f, "0.22", 14, m), exact):
            for p in P_GRID:
                if q.num != 0 and prec(r, p):
                    assert oracle.rel_error_within(r.fl, q, p)
                    checked += 1
    assert checked > 0


def test_fixed_point_step():
    f = make_logistic("factored", "2")
    params = StepBoundParams(f.K, 53)
    r = apply_feasible_map(FPRepr(MPFloat("0.5", 53), mp.zero()), f, params)
    assert r.fl == Fraction(1, 2)
    u = Fraction(4, 2**53)
    expect = u / (1 - u) / 2
    assert expect <= r.err.to_fraction() <= expect * (1 + Fraction(1, 2**60))
    assert r.err == mp.mul(params.factor, MPFloat("0.5"), 64, UP)


def test_maximum_step():
    f = make_logistic("factored", "4")
    r = apply_feasible_map(FPRepr(MPFloat("0.5", 24), mp.zero()), f, StepBoundParams(f.K, 24))
    assert r.fl == 1 and r.fl.m == 24


@given(st.fractions(Fraction(1, 100), Fraction(99, 100), max_denominator=10**6),
       st.integers(0, 40), st.sampled_from(["2.8", "3.6", "4"]), st.integers(24, 80))
def test_error_growth_lower_bound(x, k, mu, m):
    f = make_logistic("factored", mu)
    fl = mp.from_fraction(x, m)
    err = mp.pow2(-k - 10)
    r = apply_feasible_map(FPRepr(fl, err), f, StepBoundParams(f.K, m))
    c, e = fl.to_fraction(), err.to_fraction()
    lo, hi = max(c - e, Fraction(0)), min(c + e, Fraction(1))
    inf_deriv = min(abs(f.deriv_exact(lo)), abs(f.deriv_exact(hi)))
    if lo < Fraction(1, 2) < hi:
        inf_deriv = Fraction(0)
    assert r.err.to_fraction() >= inf_deriv * e


@pytest.mark.parametrize("variant", ["factored", "expanded", "centered"])
@given(st.fractions(0, 1, max_denominator=10**6), st.fractions(0, Fraction(1, 2**20)),
       st.sampled_from(["1.5", "3.3", "4"]), st.integers(12, 90))
def test_one_step_soundness(variant, x, d, mu, m):
    f = make_logistic(variant, mu)
    fl = mp.from_fraction(x, m)
    err = mp.from_fraction(d, 64, UP)
    r = apply_feasible_map(FPRepr(fl, err), f, StepBoundParams(f.K, m))
    for y in (x - d, x, x + d, fl.to_fraction() - err.to_fraction()):
        if 0 <= y <= 1 and abs(y - fl.to_fraction()) <= err.to_fraction():
            assert r.contains(f.eval_exact(y))


def test_initial_repr_examples():
    r = initial_repr("0.5", 24, StepBoundParams(4, 24))
    u = Fraction(4, 2**24)
    assert r.fl == Fraction(1, 2)
    assert u / (1 - u) / 2 <= r.err.to_fraction() <= u / (1 - u) / 2 * (1 + Fraction(1, 2**60))
    r = initial_repr("0.22", 53, StepBoundParams(4, 53))
    assert r.contains(Fraction(11, 50))


def test_initial_repr_monotone_in_m():
    errs = [initial_repr("0.22", m, StepBoundParams(4, m)).err for m in range(4, 200)]
    assert all(a >= b for a, b in zip(errs, errs[1:]))


def test_precision_too_small():
    with pytest.raises(PrecisionTooSmall):
        StepBoundParams(4, 2)
    StepBoundParams(3, 2)
    with pytest.raises(PrecisionTooSmall):
        StepBoundParams(4, 5, wilkinson=True)


def test_wilkinson_factor():
    p = StepBoundParams(4, 53, wilkinson=True)
    expect = Fraction(106, 100) * 4 / 2**53
    assert expect <= p.factor.to_fraction() <= expect * (1 + Fraction(1, 2**60))


def test_domain_escape():
    f = make_logistic("factored", "4")
    with pytest.raises(DomainEscape):
        apply_feasible_map(FPRepr(MPFloat(3), mp.zero()), f, StepBoundParams(f.K, 53))


def test_shifted_system_soundness():
    g = shift_system(make_logistic("factored", "3.5"), "1")
    exact = [q.to_fraction() + 1 for q in oracle.rational_orbit(Fraction(7, 2), Fraction(11, 50), 12)]
    for r, q in zip(trajectory(g, "1.22", 12, 30), exact):
        assert r.contains(q)
