import itertools
from fractions import Fraction as Q

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st
from scipy.optimize import linprog

from hkcalc.fforacle import han_data
from hkcalc.kernels import (
    KernelError,
    dinf_eval,
    dinf_partial_r,
    dinf_slice,
    dp_char2,
    dp_char3,
    dp_eval,
    dp_mid_slice_integral,
    ds_inf_eval,
    in_t0,
    is_attached,
    syzygy_gap,
    theta_dist,
    upright_eventually_attached,
)

from conftest import cube_points, unit_rationals

H = Q(1, 2)


def test_dinf_examples():
    assert dinf_eval(H, H, H) == Q(3, 16)
    assert dinf_eval(Q(1, 4), Q(1, 4), Q(3, 4)) == Q(1, 16)
    assert dinf_eval(0, 1, 1) == 0


@given(st.tuples(unit_rationals(), unit_rationals(), unit_rationals()))
def test_dinf_above_unit_corner(r):
    assume(sum(r) <= 1)
    r1, r2, r3 = r
    assert dinf_eval(1 + r1, 1 + r2, 1 + r3) == 1 + r1 * r2 + r1 * r3 + r2 * r3


def test_dp_examples():
    assert dp_eval(2, (H, H, H)) == Q(1, 4)
    assert dp_eval(2, (Q(1, 3), Q(1, 3), 1)) == Q(1, 9)
    assert dp_char2((Q(3, 4),) * 3) == Q(7, 16)
    assert dp_char2((Q(1, 4), H, Q(3, 4))) == Q(1, 8)
    assert dp_char3((H, H, H)) == Q(3, 16)


@given(unit_rationals(60))
def test_half_half_segment_attached_for_odd_p(r):
    assert dp_eval(3, (H, H, r)) == dinf_eval(H, H, r)
    assert syzygy_gap(3, (H, H, r)) == 0


def test_rejects_composite():
    with pytest.raises(KernelError):
        dp_eval(4, (H, H, H))


@given(cube_points(), st.sampled_from([2, 3, 5]))
def test_dp_symmetric(x, p):
    a = dp_eval(p, x)
    for perm in itertools.permutations(x):
        assert dp_eval(p, perm) == a


@given(cube_points(24), st.sampled_from([2, 3]))
def test_dp_scaling(x, p):
    assert dp_eval(p, tuple(p * v for v in x)) == p * p * dp_eval(p, x)


@given(cube_points())
def test_char2_system(x):
    assert dp_char2(x) == dp_eval(2, x)


@given(cube_points())
def test_char3_system(x):
    assert dp_char3(x) == dp_eval(3, x)


@given(cube_points(), st.sampled_from([2, 3, 5, 7]))
def test_gap_squared_is_kernel_difference_on_t0(x, p):
    assume(in_t0(x))
    diff = dp_eval(p, x) - dinf_eval(*x)
    assert diff == syzygy_gap(p, x) ** 2
    assert 0 <= diff <= Q(1, p * p)


def _theta_lp(x):
    """1-norm distance from x to the complement of the octahedron around the nearest odd-sum point, by LP."""
    best = 0.0
    fl = [int(np.floor(float(v))) for v in x]
    xf = np.array([float(v) for v in x])
    for bits in itertools.product((0, 1), repeat=3):
        c = np.array([f + b for f, b in zip(fl, bits)], dtype=float)
        if int(c.sum()) % 2 == 0 or np.abs(xf - c).sum() >= 1:
            continue
        dist = np.inf
        for s in itertools.product((-1, 1), repeat=3):
            s = np.array(s, dtype=float)
            # variables (y, u): minimise sum u with |x - y| <= u and s.(y - c) >= 1
            cost = np.r_[np.zeros(3), np.ones(3)]
            A = np.block([[np.eye(3), -np.eye(3)], [-np.eye(3), -np.eye(3)], [-s[None, :], np.zeros((1, 3))]])
            b = np.r_[xf, -xf, -1 - s @ c]
            res = linprog(cost, A_ub=A, b_ub=b, bounds=[(None, None)] * 6)
            dist = min(dist, res.fun)
        best = max(best, dist)
    return best


@given(st.tuples(*[st.fractions(0, 2, max_denominator=12)] * 3))
def test_theta_dist_matches_lp(x):
    assert abs(float(theta_dist(x)) - _theta_lp(x)) < 1e-9


def test_theta_examples():
    assert theta_dist((0, 0, 0)) == 0
    assert theta_dist((1, 1, 1)) == 1
    assert theta_dist((H, H, 0)) == 0


def test_gap_examples():
    assert syzygy_gap(2, (H, H, H)) == Q(1, 4)
    assert syzygy_gap(5, (0, H, H)) == 0


def test_attached():
    assert is_attached(3, (H, H, Q(1, 7)))
    assert not is_attached(2, (H, H, H))
    assert upright_eventually_attached(3, H, H)
    assert not upright_eventually_attached(3, Q(1, 3), H)
    with pytest.raises(KernelError):
        upright_eventually_attached(2, H, H)


@given(unit_rationals(), unit_rationals())
def test_partial_derivative_rules(t1, t2):
    assert dinf_partial_r(t1, t2, 0, "+") == min(t1, t2)
    assert dinf_partial_r(t1, t2, 1, "-") == max(0, t1 + t2 - 1)


def test_partial_derivative_interior():
    assert dinf_partial_r(H, H, H, "+") == dinf_partial_r(H, H, H, "-") == Q(1, 4)


def test_slice_delta0_pieces():
    K = dinf_slice(H)
    x, t = Q(2, 5), Q(3, 7)
    assert K(x, t) == x * t / 2 + x / 4 + t / 4 - x * x / 4 - t * t / 4 - Q(1, 16)
    K3 = dinf_slice(Q(1, 3))
    x, t = Q(1, 2), Q(5, 9)
    assert K3(x, t) == x * t / 2 + x / 6 + t / 6 - x * x / 4 - t * t / 4 - Q(1, 36)


@given(unit_rationals(), unit_rationals(), st.sampled_from([Q(1, 2), Q(1, 3), Q(1, 5), Q(2, 3), Q(1)]))
def test_slice_matches_pointwise(x, t, c):
    assert dinf_slice(c)(x, t) == dinf_eval(x, t, c)


@given(st.tuples(unit_rationals(12), unit_rationals(12)), unit_rationals(12))
def test_two_fold_kernel_is_dinf(t, r):
    assert ds_inf_eval(2, t, r) == dinf_eval(t[0], t[1], r)


def test_multi_fold_values():
    assert ds_inf_eval(3, (H, H, H), H) == Q(1, 12)
    assert ds_inf_eval(3, (0, H, H), H) == 0


@pytest.mark.parametrize("p", [3, 5])
def test_mid_slice_integral_against_midpoint_sum(p):
    n = 40
    pts = [Q(2 * i + 1, 2 * n) for i in range(n)]
    approx = sum(dp_eval(p, (s, H, t)) for s in pts for t in pts) / n ** 2
    assert abs(float(dp_mid_slice_integral(p) - approx)) < 1e-3


def test_translation_identity():
    # D_p(k + r) = l D_p(r') + phi(r) on a sample of integer shifts
    for p, k in ((3, (1, 1, 0)), (3, (1, 2, 1)), (5, (2, 1, 3))):
        d = han_data(p, k)
        r = (Q(1, 3), Q(2, 7), Q(3, 5))
        rr = ((1 - r[0],) + r[1:]) if d.odd else r
        lhs = dp_eval(p, tuple(a + b for a, b in zip(k, r)))
        assert lhs == d.l * dp_eval(p, rr) + d.phi_eval(r)
