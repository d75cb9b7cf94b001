from fractions import Fraction as Q

import pytest
from hypothesis import given
from hypothesis import strategies as st

from hkcalc.compose import (
    ComposeError,
    compose_diag_inf,
    compose_diag_p,
    compose_diagonal_inf,
    binomial_poly,
    ehk,
    fsig,
    h_a_type,
    h_binomial,
    h_d_inner,
    h_monomial_volume,
    h_pure_power,
    oracle_compare,
    quadric_tower,
    segre_product_h,
    threshold,
)
from hkcalc.exactnum import Poly, measure_pair
from hkcalc.fforacle import h_e_point
from hkcalc.kernels import dp_eval

from conftest import unit_rationals

H = Q(1, 2)


def test_pure_power():
    h = h_pure_power(3)
    assert h(Q(1, 6)) == H and h(Q(1, 3)) == 1 and h(2) == 1
    assert ehk(h) == 3 and fsig(h) == 0 and threshold(h) == Q(1, 3)
    assert {a: m for a, m in h_pure_power(2).mu.atoms if m} == {Q(0): -2, H: 2}
    assert h_pure_power(1)(Q(2, 3)) == Q(2, 3)


@pytest.mark.parametrize("l,e", [(1, 2), (2, 4), (3, 8)])
def test_segre(l, e):
    assert ehk(segre_product_h(l)) == e


def test_monomial_volume_xy():
    for t in (Q(1, 5), H, Q(7, 8)):
        assert h_monomial_volume([(1, 0), (0, 1)], [(1, 1)], [t]) == 2 * t - t * t
    assert h_monomial_volume([(1, 0), (0, 1)], [(1, 1)], [0]) == 0
    with pytest.raises(ComposeError):
        h_monomial_volume([(1, 0)], [(1, 0)], [H])


def test_quadric_and_a_types():
    q = compose_diag_inf(h_pure_power(2), 2)
    for t in (Q(1, 7), H, Q(5, 6)):
        assert q(t) == 2 * t - t * t
    for n in range(2, 8):
        h = h_a_type(n)
        assert ehk(h) == Q(2 * n - 1, n)
        assert h.h.pieces[0] == Poly([0, Q(2 * n - 1, n), 0, Q(-n, 3)])
    assert h_a_type(2)(H) == Q(2, 3)


def test_char_p_diagonals():
    two_cubes = compose_diag_p(2, h_pure_power(3), 3)
    for t in (Q(1, 5), H, Q(3, 4), 1):
        assert two_cubes(t) == 9 * dp_eval(2, (Q(1, 3), Q(1, 3), t))
    for t in (H, Q(2, 3), Q(9, 10)):
        assert two_cubes(t) == 1
    sq = compose_diag_p(3, h_pure_power(2), 2)
    for t in (Q(1, 5), Q(1, 3), Q(4, 7)):
        assert sq(t) == 2 * t - t * t
    assert compose_diag_p(2, h_pure_power(2), 2)(H) == 1


def test_compose_p_rejects_density():
    with pytest.raises(ComposeError):
        compose_diag_p(3, quadric_tower(1), 2)


def test_binomial_examples():
    lin = h_binomial(None, 0, 0, 1, 1, 1)
    assert all(lin(t) == t for t in (Q(1, 3), H, 1))
    for n in (3, 4, 6):
        d = h_d_inner(n)
        assert all(d(t) == 3 * t - 2 * t * t for t in (Q(1, 8), Q(1, 3), H))
    rep = oracle_compare(h_binomial(3, 1, 1, 1, 1, 1), 3, 2, 2, binomial_poly(1, 1, 1, 1, 1))
    assert rep.max_abs_discrepancy == 0


def test_quadric_tower_gap():
    f = {(2, 0, 0, 0): 1, (0, 2, 0, 0): 1, (0, 0, 2, 0): 1, (0, 0, 0, 2): 1}
    rep = oracle_compare(quadric_tower(3), 3, 2, 4, f)
    assert rep.min_gap >= 0 and rep.max_gap > 0


degree_lists = st.lists(st.integers(1, 6), min_size=1, max_size=3)


@given(degree_lists)
def test_diagonal_invariants(ds):
    h = compose_diagonal_inf(ds)
    assert h(0) == 0 and h.h.right == 1
    assert measure_pair(1, h.mu) == 0
    assert measure_pair(Poly([0, 1]), h.mu) == 1
    assert h.h.is_continuous()
    # concave: slopes do not increase across breakpoints
    bps = h.h.breakpoints
    slopes = [h.h.pieces[i].deriv()((bps[i] + bps[i + 1]) / 2) for i in range(len(bps) - 1)]
    assert all(a >= b for a, b in zip(slopes, slopes[1:]))


@given(st.permutations([2, 3, 4]))
def test_diagonal_order_free(ds):
    assert compose_diagonal_inf(ds).h.same_function(compose_diagonal_inf([2, 3, 4]).h)


binomials = st.tuples(st.integers(0, 2), st.integers(0, 2), st.integers(1, 3), st.integers(1, 3), st.integers(1, 2))


@given(binomials)
def test_binomial_measure(case):
    h = h_binomial(None, *case)
    assert measure_pair(1, h.mu) == 0
    assert measure_pair(Poly([0, 1]), h.mu) == h.h.right


@given(binomials, unit_rationals(24), st.sampled_from([2, 3, 5]))
def test_binomial_char_p_dominates_limit(case, t, p):
    assert h_binomial(p, *case)(t) >= h_binomial(None, *case)(t)


@given(binomials, st.integers(0, 4), st.sampled_from([2, 3]))
def test_binomial_char_p_matches_oracle(case, k, p):
    q = p * p
    t = Q(k, 4) if q % 4 == 0 else Q(min(k, 3), 3)
    assert h_binomial(p, *case)(t) == h_e_point(p, 2, 2, binomial_poly(*case), t)
