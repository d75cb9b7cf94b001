import math
from fractions import Fraction as Q

import pytest
from hypothesis import given
from hypothesis import strategies as st

from hkcalc.compose import ehk, fsig
from hkcalc.exactnum import InternalError
from hkcalc.fermat import (
    QS3,
    SQRT3,
    AlgebraicSeries,
    char2_cubic,
    char2_cubic_h,
    char2_sum_two_cubes,
    char2_v,
    closed_phi_d2,
    closed_phi_d3,
    cos_s,
    d3_boundary_report,
    fermat_phi,
    geometric,
    series_d2,
    series_d3,
    sin_s,
    verify_phi_consistency,
    zigzag,
)
from hkcalc.fforacle import h_e_point

from conftest import unit_rationals

fracs = st.fractions(min_value=-4, max_value=4, max_denominator=9)
qs3 = st.builds(QS3, fracs, fracs)


@given(qs3, qs3, qs3)
def test_qs3_field(a, b, c):
    assert (a + b) * c == a * c + b * c
    assert a * b == b * a
    if not a.is_zero():
        assert (a * a.inverse()) == QS3(Q(1))
    assert SQRT3 * SQRT3 == QS3(Q(3))


def _series(coeffs, order=8):
    return AlgebraicSeries([QS3(a, b) for a, b in coeffs], 0, order)


series = st.lists(st.tuples(fracs, fracs), min_size=8, max_size=8).map(_series)


@given(series, series)
def test_series_division_inverts_multiplication(f, g):
    if g.coeff(0).is_zero():
        return
    back = (f * g) / g
    assert all(back.coeff(k) == f.coeff(k) for k in range(8))


@given(st.fractions(min_value=-3, max_value=3, max_denominator=7))
def test_pythagoras(c):
    s, co = sin_s(c, 12, True), cos_s(c, 12, True)
    one = s * s + co * co
    assert one.coeff(0) == QS3(Q(1)) and all(one.coeff(k).is_zero() for k in range(1, 12))


def test_laurent_division_by_alpha():
    a = AlgebraicSeries.alpha(6)
    inv = 1 / a
    assert inv.low == -1
    with pytest.raises(InternalError):
        inv.rational_coeffs(3)


def test_zigzag():
    assert zigzag(7) == [1, 1, 1, 2, 5, 16, 61, 272]
    assert zigzag(0) == [1]


def test_zigzag_against_series_expansion():
    sympy = pytest.importorskip("sympy")
    x = sympy.symbols("x")
    expansion = sympy.series(sympy.sec(x) + sympy.tan(x), x, 0, 12).removeO()
    assert [int(expansion.coeff(x, n) * math.factorial(n)) for n in range(12)] == zigzag(11)


def test_series_d2():
    e, s = series_d2(10)
    assert e[:5] == [2, 2, Q(3, 2), Q(4, 3), Q(29, 24)]
    assert s[0] == 0
    assert all(a + b == 2 for a, b in zip(e, s))
    z = zigzag(9)
    assert all(e[n] == 1 + Q(z[n], math.factorial(n)) for n in range(1, 10))


def test_series_d3():
    c, cp = series_d3(10)
    assert c[0] == 2 and cp[0] == 0


def test_towers():
    assert all(fermat_phi(2, 1)(t) == 2 * t - t * t for t in (Q(1, 5), Q(1, 2), Q(7, 8)))
    assert ehk(fermat_phi(2, 2)) == Q(3, 2)
    assert fermat_phi(3, 0)(Q(1, 6)) == Q(1, 2) and fermat_phi(3, 0)(Q(1, 2)) == 1
    c, _ = series_d3(6)
    assert [ehk(fermat_phi(3, n)) - 1 for n in range(6)] == c


def test_cubic_fsig_against_c_prime():
    # the engine F-signatures are the negatives of the c' coefficients
    _, cp = series_d3(6)
    assert [fsig(fermat_phi(3, n)) for n in range(6)] == [-v for v in cp]


@given(unit_rationals(24))
def test_closed_phi_d2(x):
    coeffs = closed_phi_d2(7, x)
    assert coeffs == [fermat_phi(2, n)(x) for n in range(7)]


@given(unit_rationals(18))
def test_closed_phi_d3(x):
    coeffs = closed_phi_d3(5, x)
    assert coeffs == [fermat_phi(3, n)(x) for n in range(5)]


def test_closed_phi_endpoints():
    assert closed_phi_d2(8, 1) == [1] * 8
    assert closed_phi_d2(8, 0) == [0] * 8


def test_boundary_conditions():
    assert all(d3_boundary_report(8).values())


@pytest.mark.parametrize("d,N", [(2, 8), (3, 6), (2, 0)])
def test_verify_phi(d, N):
    assert verify_phi_consistency(d, N).ok


def test_char2_two_cubes():
    assert char2_v(1, 1) == Q(1, 9)
    assert char2_sum_two_cubes(1) == 1
    for k in range(8, 17):
        assert char2_v(1, Q(k, 16)) == Q(1, 9)
    for k in range(17):
        t = Q(k, 16)
        assert char2_sum_two_cubes(t) == h_e_point(2, 4, 2, "x^3+y^3", t)


@given(unit_rationals(40))
def test_char2_two_cubes_monotone(t):
    assert 0 <= char2_sum_two_cubes(t) <= char2_sum_two_cubes(min(t + Q(1, 40), 1)) <= 1


def test_char2_cubic():
    data = char2_cubic()
    assert data["h"][2] == Q(9, 16)
    assert data["e_hk"] == Q(9, 4)
    assert data["hks"] == data["hks_closed"]
    assert char2_cubic_h(Q(1, 8)) == h_e_point(2, 3, 3, "x^3+y^3+z^3", Q(1, 8))


def test_geometric():
    g = geometric(5)
    assert (g * (1 - AlgebraicSeries.alpha(5))).coeff(0) == QS3(Q(1))
