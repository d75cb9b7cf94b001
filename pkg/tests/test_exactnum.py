from fractions import Fraction as Q

import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from hkcalc.exactnum import (
    ExactnumError,
    Measure,
    PiecewisePoly,
    Poly,
    fmt_q,
    interpolate_piecewise,
    measure_pair,
    neg_dh_measure,
    parse_rational,
    pp_derivative_side,
    pp_integral,
)

from conftest import unit_rationals


def min_nt(n):
    return PiecewisePoly([0, Q(1, n)], [Poly([0, n])], 0, 1)


QUADRIC = PiecewisePoly([0, 1], [Poly([0, 2, -1])], 0, 1)


def test_eval_examples():
    assert min_nt(3)(Q(1, 3)) == 1
    assert QUADRIC(Q(1, 2)) == Q(3, 4)


def test_ambiguous_breakpoint_named():
    f = PiecewisePoly([0, 1], [Poly([1])], 0, 0)
    with pytest.raises(ExactnumError, match="breakpoint 1"):
        f(1)


def test_integrals():
    assert pp_integral(QUADRIC, 0, 1) == Q(2, 3)
    assert pp_integral(PiecewisePoly.constant(0), 0, 1) == 0
    assert pp_integral(PiecewisePoly([0, Q(1, 2)], [Poly([0, 2])], 0, 1), 0, 1) == Q(3, 4)


def test_one_sided_derivatives():
    assert pp_derivative_side(min_nt(3), 0, "+") == 3
    assert pp_derivative_side(min_nt(3), Q(1, 3), "-") == 3
    assert pp_derivative_side(min_nt(3), Q(1, 3), "+") == 0
    assert pp_derivative_side(QUADRIC, 1, "-") == 0


def test_measure_of_pure_power():
    mu = neg_dh_measure(min_nt(4).simplify())
    atoms = {a: m for a, m in mu.atoms if m}
    assert atoms == {Q(0): -4, Q(1, 4): 4}
    assert all(p.is_zero() for p in mu.density.pieces)


def test_measure_of_quadric():
    mu = neg_dh_measure(QUADRIC)
    assert dict(mu.atoms) == {Q(0): -2, Q(1): 0}
    assert mu.density(Q(1, 3)) == 2


def test_pairings():
    assert measure_pair(Poly([0, 1]), neg_dh_measure(min_nt(5))) == 1
    assert measure_pair(Poly([0, 1]), neg_dh_measure(QUADRIC)) == 1
    assert measure_pair(Poly([7]), neg_dh_measure(QUADRIC)) == 0
    assert measure_pair(Poly([0, 1]), Measure.zero()) == 0


@pytest.mark.parametrize("text,val", [("3/4", Q(3, 4)), ("-2", Q(-2)), (" 6/8 ", Q(3, 4))])
def test_parse(text, val):
    assert parse_rational(text) == val


@pytest.mark.parametrize("text", ["1/0", "", "x", "1/2/3", "0.5"])
def test_parse_rejects(text):
    with pytest.raises(ExactnumError):
        parse_rational(text)


@given(st.fractions(), st.fractions())
def test_fmt_roundtrip(a, b):
    assert parse_rational(fmt_q(a)) == a
    assert parse_rational(fmt_q(a + b)) == a + b


polys = st.lists(st.fractions(min_value=-5, max_value=5, max_denominator=12), min_size=1, max_size=4).map(Poly)


@given(polys, polys, unit_rationals())
def test_poly_ring_ops(p, q, x):
    assert (p + q)(x) == p(x) + q(x)
    assert (p * q)(x) == p(x) * q(x)
    assert (p - q)(x) == p(x) - q(x)


@given(polys, unit_rationals(), unit_rationals())
def test_poly_integral_additive(p, a, b):
    lo, hi = min(a, b), max(a, b)
    mid = (lo + hi) / 2
    assert p.integrate(lo, hi) == p.integrate(lo, mid) + p.integrate(mid, hi)


@given(polys, polys, unit_rationals(12))
def test_piecewise_integral_matches_quadrature(p, q, cut):
    if cut in (0, 1):
        return
    f = PiecewisePoly([0, cut, 1], [p, q], 0, 0)
    exact = pp_integral(f, 0, 1)
    approx, _ = integrate.quad(lambda x: float(f(Q(x)) if x not in (0.0, float(cut), 1.0) else 0), 0, 1,
                               points=[float(cut)])
    assert abs(float(exact) - approx) < 1e-8


@given(polys, polys, unit_rationals(12))
def test_interpolation_recovers_pieces(p, q, cut):
    if cut in (0, 1):
        return
    q = q + Poly([p(cut) - q(cut)])  # continuous at the cut
    f = PiecewisePoly([0, cut, 1], [p, q], p(0), q(1))
    g = interpolate_piecewise(f, [0, cut, 1], 3, left=p(0), right=q(1))
    assert g.same_function(f)


@given(st.integers(1, 9), st.integers(1, 9))
def test_sum_and_scale(m, n):
    f, g = min_nt(m), min_nt(n)
    s = f + g
    for t in (Q(0), Q(1, 7), Q(1, 2), Q(1), Q(3, 2)):
        assert s(t) == f(t) + g(t)
        assert (f * Q(3))(t) == 3 * f(t)
