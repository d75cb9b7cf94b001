from fractions import Fraction as Q

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hkcalc.fforacle import (
    OracleError,
    StaircaseQuotient,
    d_integer,
    discrete_multilinear_check,
    f_threshold_at_q,
    h_e_point,
    han_data,
    jordan_profile,
    parse_poly,
    quotient_length,
    rank_exact,
    rank_mod_p,
)


def test_quotient_length_examples():
    assert quotient_length(StaircaseQuotient(2, (1, 1)), "x+y", 1) == 1
    assert quotient_length(StaircaseQuotient(5, (2, 2)), "x+y", 2) == 3
    assert quotient_length(StaircaseQuotient(3, (4, 2)), "x+y", 0) == 0


def test_unit_rejected():
    with pytest.raises(OracleError):
        quotient_length(StaircaseQuotient(3, (2, 2)), "1+x", 1)


def test_parse_poly():
    assert parse_poly("x^3+y^3") == {(3, 0): 1, (0, 3): 1}
    assert parse_poly("2*x0*x1 - x1^2") == {(1, 1): 2, (0, 2): -1}
    with pytest.raises(OracleError):
        parse_poly("(x+y)^2")


def test_jordan_profiles():
    assert jordan_profile(StaircaseQuotient(2, (1, 1)), "x+y").multiplicities == {1: 1}
    prof = jordan_profile(StaircaseQuotient(2, (2, 2)), "x+y")
    assert prof.dimension == 4
    assert d_integer(2, (2, 2), 2) == 4
    assert jordan_profile(StaircaseQuotient(3, (3, 3)), "x+y").dimension == 9


def test_h_e_point_examples():
    assert h_e_point(2, 3, 3, "x^3+y^3+z^3", Q(1, 8)) == Q(9, 32)
    assert h_e_point(3, 2, 1, "x^4", Q(1, 3)) == 1
    assert h_e_point(3, 1, 2, "x^2+y^2", Q(1, 3)) == Q(5, 9)
    with pytest.raises(OracleError):
        h_e_point(3, 1, 2, "x^2+y^2", Q(1, 2))


@pytest.mark.parametrize("q", [2, 3, 4, 9])
def test_threshold_of_xy(q):
    p = 2 if q in (2, 4) else 3
    # (xy)^i lies in (x^q, y^q) exactly when i >= q
    assert f_threshold_at_q(StaircaseQuotient(p, (q, q)), "x*y") == 1


@pytest.mark.parametrize("n,q", [(2, 4), (3, 9), (4, 8)])
def test_threshold_of_pure_power(n, q):
    p = 2 if q in (4, 8) else 3
    assert f_threshold_at_q(StaircaseQuotient(p, (q,)), f"x^{n}") == Q(-(-q // n), q)


def test_integer_kernel_values():
    assert d_integer(0, (1, 2), 2) == 2
    assert d_integer(0, (1, 1), 1) == 1
    assert d_integer(5, (3, 4), 0) == 0


def test_corner_data_examples():
    d = han_data(0, (1, 1, 1))
    assert d.l == 1
    assert {m: c for m, c in d.phi.items() if c} == {(0, 0, 0): 1, (1, 1, 0): 1, (1, 0, 1): 1}
    z = han_data(0, (0, 0, 0))
    assert z.l == 1 and not any(z.phi.values())
    assert han_data(3, (1, 1, 1)) == d.__class__((1, 1, 1), 1, d.phi)


def test_discrete_multilinear_examples():
    assert discrete_multilinear_check(2, 1, [(1, "x^2"), (1, "x^2")])
    assert discrete_multilinear_check(3, 1, [(1, "x^3"), (1, "x^3")])
    assert discrete_multilinear_check(3, 1, [(1, "x^2"), (1, "x")], rs=[0])


small_int_matrices = st.integers(1, 6).flatmap(
    lambda r: st.integers(1, 6).flatmap(
        lambda c: st.lists(st.lists(st.integers(-4, 4), min_size=c, max_size=c), min_size=r, max_size=r)))


@given(small_int_matrices)
def test_rank_exact_matches_numpy(M):
    assert rank_exact(M) == np.linalg.matrix_rank(np.array(M, dtype=float))


@given(small_int_matrices, st.sampled_from([2, 3, 5, 7]))
def test_rank_mod_p_matches_sympy(M, p):
    sympy = pytest.importorskip("sympy")
    from sympy.polys.matrices import DomainMatrix

    dm = DomainMatrix([[sympy.GF(p)(v) for v in row] for row in M], (len(M), len(M[0])), sympy.GF(p))
    assert rank_mod_p(np.array(M), p) == dm.rank()


@given(st.integers(1, 5), st.integers(1, 5), st.integers(0, 10), st.sampled_from([2, 3, 5]))
def test_addition_kernel_symmetric(a, b, r, p):
    assert d_integer(p, (a, b), r) == d_integer(p, (b, a), r)
    assert d_integer(p, (a, b), r) <= a * b
