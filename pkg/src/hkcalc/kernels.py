"""Kernel functions of addition: D_p (a p-fractal) and its limit D_inf.

``D(t1, t2, t3)`` is the h-function of T1 + T2 in k[T1, T2] against the
fractional powers (T1^t1, T2^t2), evaluated at t3.  It is symmetric, so the
third slot is not special.

Evaluation strategy for D_p is a chain of affine rules
``value(x) = c * value(next) + b``; rational points whose denominators are not
powers of p give a finite cycle that is solved exactly.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

from .exactnum import (
    ExactnumError,
    InternalError,
    Measure,
    PiecewisePoly,
    Piecewise2D,
    Poly,
    Poly2,
    Region,
    as_q,
    interpolate_piecewise,
    measure_pair,
    neg_dh_measure,
    pp_derivative_side,
    slice_pair,
)
from .fforacle import d_integer, han_data

DEFAULT_ORBIT_CAP = 10_000


class KernelError(ValueError):
    """User-facing precondition failure in the kernel module."""


# ---------------------------------------------------------------------------
# The unit-cube table of D_inf
# ---------------------------------------------------------------------------

# polynomials in (t1, t2, t3) as {(i, j, k): coeff}
_HALF = Fraction(1, 2)
_QUARTER = Fraction(1, 4)


@dataclass(frozen=True)
class CubeRegion:
    label: str
    constraints: tuple  # (a1, a2, a3, b): a.t + b >= 0
    poly: dict


_BOX = ((1, 0, 0, 0), (-1, 0, 0, 1), (0, 1, 0, 0), (0, -1, 0, 1), (0, 0, 1, 0), (0, 0, -1, 1))

CUBE_REGIONS: tuple[CubeRegion, ...] = (
    CubeRegion("B1", ((1, -1, -1, 0),) + _BOX, {(0, 1, 1): 1}),
    CubeRegion("B2", ((-1, 1, -1, 0),) + _BOX, {(1, 0, 1): 1}),
    CubeRegion("B3", ((-1, -1, 1, 0),) + _BOX, {(1, 1, 0): 1}),
    CubeRegion("B4", ((1, 1, 1, -2),) + _BOX,
               {(0, 0, 0): 1, (1, 0, 0): -1, (0, 1, 0): -1, (0, 0, 1): -1,
                (1, 1, 0): 1, (1, 0, 1): 1, (0, 1, 1): 1}),
    CubeRegion("T0", ((-1, 1, 1, 0), (1, -1, 1, 0), (1, 1, -1, 0), (-1, -1, -1, 2)) + _BOX,
               {(1, 1, 0): _HALF, (1, 0, 1): _HALF, (0, 1, 1): _HALF,
                (2, 0, 0): -_QUARTER, (0, 2, 0): -_QUARTER, (0, 0, 2): -_QUARTER}),
)


def _poly3_eval(poly: dict, t: Sequence[Fraction]) -> Fraction:
    return sum((c * t[0] ** i * t[1] ** j * t[2] ** k for (i, j, k), c in poly.items()), Fraction(0))


def _in_region(reg: CubeRegion, t: Sequence[Fraction]) -> bool:
    return all(a1 * t[0] + a2 * t[1] + a3 * t[2] + b >= 0 for a1, a2, a3, b in reg.constraints)


def cube_region(t: Sequence) -> CubeRegion:
    t = [as_q(v) for v in t]
    for reg in CUBE_REGIONS:
        if _in_region(reg, t):
            return reg
    raise KernelError(f"{tuple(t)} is not in the unit cube")


def in_t0(t: Sequence) -> bool:
    t = [as_q(v) for v in t]
    return _in_region(CUBE_REGIONS[-1], t)


def dinf_cube(t: Sequence) -> Fraction:
    t = [as_q(v) for v in t]
    return _poly3_eval(cube_region(t).poly, t)


def _split_integer(x: Sequence[Fraction]) -> tuple[tuple[int, ...], tuple[Fraction, ...]]:
    k = tuple(math.floor(v) for v in x)
    return k, tuple(v - kv for v, kv in zip(x, k))


def _han_step(data, r: Sequence[Fraction]) -> tuple[tuple[Fraction, ...], Fraction]:
    rr = tuple(r)
    nxt = ((1 - rr[0],) + rr[1:]) if data.odd else rr
    return nxt, data.phi_eval(rr)


def dinf_eval(t1, t2, t3) -> Fraction:
    """Exact value of the limit kernel D_inf at a nonnegative rational point."""
    x = tuple(as_q(v) for v in (t1, t2, t3))
    if any(v <= 0 for v in x):
        return Fraction(0)
    if all(v <= 1 for v in x):
        return dinf_cube(x)
    k, r = _split_integer(x)
    data = han_data(0, k)
    nxt, b = _han_step(data, r)
    return data.l * dinf_cube(nxt) + b if data.l else b


# ---------------------------------------------------------------------------
# Generic affine-chain solver for p-fractals
# ---------------------------------------------------------------------------


def solve_chain(start, step: Callable, cap: int = DEFAULT_ORBIT_CAP) -> Fraction:
    """Evaluate v(start) where step(s) is ('value', v) or ('link', c, b, s')."""
    states = []
    coeffs = []
    index = {}
    s = start
    while True:
        if s in index:
            j = index[s]
            C, B = Fraction(1), Fraction(0)
            for c, b in reversed(coeffs[j:]):
                C, B = c * C, c * B + b
            if C == 1:
                raise InternalError("singular orbit system")
            value = B / (1 - C)
            for c, b in reversed(coeffs[:j]):
                value = c * value + b
            return value
        if len(states) >= cap:
            raise KernelError(f"orbit exceeds {cap} states; raise the cap (orbit_cap)")
        index[s] = len(states)
        states.append(s)
        out = step(s)
        if out[0] == "value":
            value = out[1]
            for c, b in reversed(coeffs):
                value = c * value + b
            return value
        _, c, b, s = out
        coeffs.append((as_q(c), as_q(b)))


def _canon(x: Sequence[Fraction]) -> tuple:
    return tuple(sorted(x))


def dp_eval(p: int, x: Sequence, orbit_cap: int = DEFAULT_ORBIT_CAP) -> Fraction:
    """Exact D_p(x) for rational x >= 0 via the digit recursion with char-p corner data."""
    if p < 2 or any(p % d == 0 for d in range(2, int(p ** 0.5) + 1)):
        raise KernelError(f"p must be prime, got {p}")
    pt = _canon(as_q(v) for v in x)
    psq = p * p

    def step(s):
        if s[0] <= 0:
            return ("value", Fraction(0))
        if all(v.denominator == 1 for v in s):
            return ("value", Fraction(d_integer(p, (int(s[0]), int(s[1])), int(s[2]))))
        if s[-1] > 1:
            k, r = _split_integer(s)
            data = han_data(p, k)
            nxt, b = _han_step(data, r)
            if data.l == 0:
                return ("value", b)
            return ("link", data.l, b, _canon(nxt))
        y = [p * v for v in s]
        k = tuple(min(math.floor(v), p - 1) for v in y)
        r = tuple(v - kv for v, kv in zip(y, k))
        data = han_data(p, k)
        nxt, b = _han_step(data, r)
        if data.l == 0:
            return ("value", b / psq)
        return ("link", Fraction(data.l, psq), b / psq, _canon(nxt))

    return solve_chain(pt, step, orbit_cap)


def _cube_point(x: Sequence) -> tuple:
    pt = tuple(as_q(v) for v in x)
    if len(pt) != 3 or any(v < 0 or v > 1 for v in pt):
        raise KernelError("point must lie in [0,1]^3")
    return pt


def dp_char2(x: Sequence, orbit_cap: int = DEFAULT_ORBIT_CAP) -> Fraction:
    """D_2 on [0,1]^3 from the explicit eight-cube system."""
    pt = _canon(_cube_point(x))

    def step(s):
        t1, t2, t3 = s
        if t1 == 0:
            return ("value", Fraction(0))
        a = tuple(min(math.floor(2 * v), 1) for v in s)
        if a == (0, 0, 0):
            return ("link", _QUARTER, 0, _canon(2 * v for v in s))
        if a == (0, 0, 1):
            return ("value", t1 * t2)
        if a == (1, 1, 1):
            return ("value", 1 - t1 - t2 - t3 + t1 * t2 + t1 * t3 + t2 * t3)
        # a == (0, 1, 1): peel off half a unit from the two large coordinates
        return ("link", 1, t1 / 2, _canon((t1, t2 - _HALF, t3 - _HALF)))

    return solve_chain(pt, step, orbit_cap)


def dp_char3(x: Sequence, orbit_cap: int = DEFAULT_ORBIT_CAP) -> Fraction:
    """D_3 on [0,1]^3 from the explicit 27-cube system (deletion, reflection, centre lemma)."""
    pt = _canon(_cube_point(x))
    third = Fraction(1, 3)

    def step(s):
        t1, t2, t3 = s
        if t1 == 0:
            return ("value", Fraction(0))
        a = tuple(min(math.floor(3 * v), 2) for v in s)
        if a == (0, 0, 0):
            return ("link", Fraction(1, 9), 0, _canon(3 * v for v in s))
        if a[0] == 0 and a[1] == 0:
            return ("value", t1 * t2)
        if a[0] == 0 and a[1] >= 1 and a != (0, 2, 2):
            return ("link", 1, t1 / 3, _canon((t1, t2 - third, t3 - third)))
        if a == (1, 1, 1):
            b = Fraction(1, 9) + (t1 - third) * (t2 + t3 - 2 * third)
            return ("link", 1, b, _canon((2 * third - t1, t2 - third, t3 - third)))
        # (0,2,2), (1,1,2), (1,2,2), (2,2,2): reflect the two larger coordinates
        return ("link", 1, t1 * (t2 + t3 - 1), _canon((t1, 1 - t2, 1 - t3)))

    return solve_chain(pt, step, orbit_cap)


# ---------------------------------------------------------------------------
# Theta geometry
# ---------------------------------------------------------------------------


def _odd_corner_distance(x: Sequence[Fraction]) -> Fraction:
    best = None
    fl = [math.floor(v) for v in x]
    for bits in itertools.product((0, 1), repeat=3):
        c = [f + b for f, b in zip(fl, bits)]
        if sum(c) % 2 == 1:
            d = sum(abs(v - cv) for v, cv in zip(x, c))
            best = d if best is None else min(best, d)
    return best


def theta_dist(x: Sequence) -> Fraction:
    """1-norm distance from x to the union of closed tetrahedral cells.

    The complement of the tetrahedra is the union of open unit 1-norm balls
    around integer points with odd coordinate sum, so the distance is
    max(0, 1 - distance to the nearest such centre).
    """
    pt = [as_q(v) for v in x]
    return max(Fraction(0), 1 - _odd_corner_distance(pt))


def _check_triangle(pt: Sequence[Fraction]) -> None:
    if not in_t0(pt):
        raise KernelError(f"{tuple(pt)} is not in the closed tetrahedron T0")


def syzygy_gap(p: int, x: Sequence) -> Fraction:
    """max over n >= 1 of theta_dist(p^n x) / (2 p^n); its square is D_p - D_inf on T0."""
    pt = tuple(as_q(v) for v in x)
    _check_triangle(pt)
    best = Fraction(0)
    seen = set()
    scale = 1
    n = 0
    while True:
        n += 1
        scale *= p
        y = tuple(v * scale for v in pt)
        key = tuple(v - 2 * math.floor(v / 2) for v in y)
        if key in seen:
            return best
        seen.add(key)
        best = max(best, theta_dist(key) / (2 * scale))
        if Fraction(1, 2 * scale * p) <= best:
            return best


def is_attached(p: int, x: Sequence) -> bool:
    pt = tuple(as_q(v) for v in x)
    if all(0 <= v <= 1 for v in pt):
        if not in_t0(pt):
            return True
        return syzygy_gap(p, pt) == 0
    return dp_eval(p, pt) == dinf_eval(*pt)


def _half_odd_exponent(p: int, a: Fraction) -> int | None:
    """Least m with a * p^m in 1/2 + Z, or None."""
    d = a.denominator
    if d % 2 != 0:
        return None
    rest = d // 2
    m = 0
    while rest % p == 0:
        rest //= p
        m += 1
    return m if rest == 1 else None


def upright_eventually_attached(p: int, a, b) -> bool:
    if p == 2:
        raise KernelError("the upright criterion assumes an odd prime p")
    ma = _half_odd_exponent(p, as_q(a))
    mb = _half_odd_exponent(p, as_q(b))
    return ma is not None and mb is not None


# ---------------------------------------------------------------------------
# Slices of D_inf
# ---------------------------------------------------------------------------


def _affine_power(a: Fraction, b: Fraction, n: int) -> dict:
    """(a*u + b)^n as {power: coeff}."""
    return {i: math.comb(n, i) * a ** i * b ** (n - i) for i in range(n + 1)}


def _cell_regions(kx: int, kt: int, c: Fraction) -> list[Region]:
    """Regions of (x, t) -> D_inf(x, t, c) on [kx, kx+1] x [kt, kt+1], with 0 <= c <= 1."""
    data = han_data(0, (kx, kt, 0))
    # r = (x - kx, t - kt, c); reflected first coordinate when the cell parity is odd
    if data.odd:
        ax, bx = Fraction(-1), Fraction(1 + kx)
    else:
        ax, bx = Fraction(1), Fraction(-kx)
    at, bt = Fraction(1), Fraction(-kt)
    box = ((1, 0, -kx), (-1, 0, kx + 1), (0, 1, -kt), (0, -1, kt + 1))
    phi = {}
    for mask, coef in data.phi.items():
        if not coef:
            continue
        poly = {(0, 0): Fraction(coef)}
        if mask[0]:
            poly = _p2_mul(poly, {(1, 0): Fraction(1), (0, 0): Fraction(-kx)})
        if mask[1]:
            poly = _p2_mul(poly, {(0, 1): Fraction(1), (0, 0): Fraction(-kt)})
        if mask[2]:
            poly = _p2_mul(poly, {(0, 0): c})
        phi = _p2_add(phi, poly)
    regions = []
    for reg in CUBE_REGIONS:
        cons = []
        for a1, a2, a3, b in reg.constraints:
            # a1*(ax x + bx) + a2*(at t + bt) + a3*c + b >= 0
            cons.append((a1 * ax, a2 * at, a1 * bx + a2 * bt + a3 * c + b))
        if any(a == 0 and bb == 0 and cc < 0 for a, bb, cc in cons):
            continue
        cons = [k for k in cons if not (k[0] == 0 and k[1] == 0)]
        poly = {}
        if data.l:
            for (i, j, k), coef in reg.poly.items():
                term = {(0, 0): Fraction(coef) * c ** k * data.l}
                px = _affine_power(ax, bx, i)
                term = _p2_mul(term, {(e, 0): v for e, v in px.items()})
                pt_ = _affine_power(at, bt, j)
                term = _p2_mul(term, {(0, e): v for e, v in pt_.items()})
                poly = _p2_add(poly, term)
        poly = _p2_add(poly, phi)
        regions.append(Region(tuple(cons) + box, Poly2(poly), f"{reg.label}@({kx},{kt})"))
    return regions


def _p2_mul(a: dict, b: dict) -> dict:
    out: dict = {}
    for (i1, j1), v1 in a.items():
        for (i2, j2), v2 in b.items():
            k = (i1 + i2, j1 + j2)
            out[k] = out.get(k, 0) + Fraction(v1) * Fraction(v2)
    return {k: v for k, v in out.items() if v != 0}


def _p2_add(a: dict, b: dict) -> dict:
    out = dict(a)
    for k, v in b.items():
        out[k] = out.get(k, 0) + Fraction(v)
    return {k: v for k, v in out.items() if v != 0}


def _drop_empty(regions: list[Region]) -> list[Region]:
    """Remove regions with empty interior (checked through the region's vertices)."""
    kept = []
    for reg in regions:
        lines = list(reg.constraints)
        verts = set()
        for i in range(len(lines)):
            for j in range(i + 1, len(lines)):
                a1, b1, c1 = lines[i]
                a2, b2, c2 = lines[j]
                det = a1 * b2 - a2 * b1
                if det == 0:
                    continue
                x = (-c1 * b2 + c2 * b1) / det
                t = (-a1 * c2 + a2 * c1) / det
                if reg.contains(x, t):
                    verts.add((x, t))
        if len(verts) < 3:
            continue
        # nonzero area: not all collinear
        vs = sorted(verts)
        x0, t0 = vs[0]
        if any((x1 - x0) * (t2 - t0) - (x2 - x0) * (t1 - t0) != 0
               for (x1, t1), (x2, t2) in itertools.combinations(vs[1:], 2)):
            kept.append(reg)
    return kept


def dinf_slice(c, fixed_axis: int = 3, x_max: int = 1, t_max: int = 1) -> Piecewise2D:
    """Region table of (x, t) -> D_inf(x, t, c) on [0, x_max] x [0, t_max].

    Beyond t_max the slice is taken constant in t, which is exact whenever
    t_max >= x_max + c (the product rule holds there).  The default
    [0,1] x [0,1] table is exact for t >= 1 because D_inf(x, t, c) = x c there.
    """
    c = as_q(c)
    if fixed_axis not in (1, 2, 3):
        raise KernelError("fixed_axis must be 1, 2 or 3")
    if not (0 < c <= 1):
        raise KernelError("slice level c must satisfy 0 < c <= 1")
    if t_max < x_max and t_max != 1:
        raise KernelError("t_max must be at least x_max")
    if not (t_max >= x_max + c or (x_max == 1 and t_max >= 1)):
        raise KernelError("t_max too small for a constant extension in t")
    regions: list[Region] = []
    for kx in range(x_max):
        for kt in range(t_max):
            regions.extend(_cell_regions(kx, kt, c))
    return Piecewise2D(_drop_empty(regions), (0, x_max), (0, t_max))


def dinf_along(base: Sequence, direction: Sequence, lo, hi) -> PiecewisePoly:
    """s -> D_inf(base + s * direction) on [lo, hi] as an exact PiecewisePoly.

    Breakpoints can only sit where the path crosses a plane t_i in Z or
    (+-t1 +- t2 +- t3) in Z, which covers every region boundary of the cube
    table and of its integer translates.
    """
    base = [as_q(v) for v in base]
    dirn = [as_q(v) for v in direction]
    lo, hi = as_q(lo), as_q(hi)
    cuts = {lo, hi}
    normals = [(1, 0, 0), (0, 1, 0), (0, 0, 1)] + [
        (1, s2, s3) for s2 in (1, -1) for s3 in (1, -1)
    ]
    for n in normals:
        n0 = sum(a * b for a, b in zip(n, base))
        n1 = sum(a * b for a, b in zip(n, dirn))
        if n1 == 0:
            continue
        v_lo, v_hi = sorted((n0 + n1 * lo, n0 + n1 * hi))
        for k in range(math.floor(v_lo), math.ceil(v_hi) + 1):
            s = (k - n0) / n1
            if lo < s < hi:
                cuts.add(s)

    def f(s):
        return dinf_eval(*(b + s * d for b, d in zip(base, dirn)))

    return interpolate_piecewise(f, cuts, 2, checks=3)


def dinf_partial_r(t1, t2, r, side: str) -> Fraction:
    """One-sided partial derivative of D_inf(t1, t2, .) at r."""
    t1, t2, r = as_q(t1), as_q(t2), as_q(r)
    if side not in ("+", "-"):
        raise KernelError("side must be '+' or '-'")
    if side == "-" and r <= 0:
        raise KernelError("left derivative needs r > 0")
    if t1 < 0 or t2 < 0 or r < 0:
        raise KernelError("arguments must be nonnegative")
    hi = max(r + 1, t1 + t2 + 1)
    f = dinf_along((t1, t2, 0), (0, 0, 1), 0, hi)
    return pp_derivative_side(f, r, side)


def dinf_r_slice(t1, t2) -> PiecewisePoly:
    """r -> D_inf(t1, t2, r); constant t1*t2 from r = t1 + t2 on."""
    t1, t2 = as_q(t1), as_q(t2)
    if t1 <= 0 or t2 <= 0:
        return PiecewisePoly.constant(0, 0, 1)
    f = dinf_along((t1, t2, 0), (0, 0, 1), 0, t1 + t2)
    return PiecewisePoly(f.breakpoints, f.pieces, 0, t1 * t2)


# ---------------------------------------------------------------------------
# s-fold addition kernels in the limit
# ---------------------------------------------------------------------------


def ds_inf_slice(t: Sequence) -> PiecewisePoly:
    """r -> limit kernel of T_1 + ... + T_s at (t, r), for t_i in [0, 1]."""
    ts = [as_q(v) for v in t]
    if len(ts) < 2 or len(ts) > 5:
        raise KernelError("supported number of summands is 2..5")
    if any(v < 0 or v > 1 for v in ts):
        raise KernelError("each t_i must lie in [0, 1]")
    if any(v == 0 for v in ts):
        return PiecewisePoly.constant(0, 0, 1)
    h = dinf_r_slice(ts[0], ts[1])
    for j in range(2, len(ts)):
        mu = neg_dh_measure(h)
        width = math.ceil(sum(ts[: j + 1]))
        K = dinf_slice(ts[j], x_max=width, t_max=width + 1)
        new = slice_pair(K, mu)
        prod = Fraction(1)
        for v in ts[: j + 1]:
            prod *= v
        h = PiecewisePoly(new.breakpoints, new.pieces, 0, new.right).simplify()
        if h.right != prod:
            raise InternalError("s-fold kernel does not reach the product of its arguments")
    return h


def ds_inf_eval(s: int, t: Sequence, r) -> Fraction:
    if len(t) != s:
        raise KernelError(f"expected {s} coordinates, got {len(t)}")
    return ds_inf_slice(t)(as_q(r))


def dp_mid_slice_integral(p: int) -> Fraction:
    """Exact double integral of D_p(s, 1/2, t) over s, t in [0, 1] for odd p.

    Scaling by p sends the slice y = 1/2 to y = p/2, whose fractional part is
    again 1/2, so the integral satisfies a single linear equation.
    """
    if p < 3 or p % 2 == 0 or any(p % d == 0 for d in range(3, int(p ** 0.5) + 1)):
        raise KernelError("need an odd prime")
    half = Fraction(1, 2)
    mid = (p - 1) // 2
    lsum = 0
    b = Fraction(0)
    for k1 in range(p):
        for k3 in range(p):
            data = han_data(p, (k1, mid, k3))
            lsum += data.l
            # phi is multilinear, so its average over r1, r3 is its value at r1 = r3 = 1/2
            b += data.phi_eval((half, half, half))
    return b / (p ** 4 - lsum)


__all__ = [
    "CUBE_REGIONS", "DEFAULT_ORBIT_CAP", "KernelError", "cube_region", "dinf_along", "dinf_cube",
    "dinf_eval", "dinf_partial_r", "dp_mid_slice_integral", "dinf_r_slice", "dinf_slice", "dp_char2", "dp_char3", "dp_eval",
    "ds_inf_eval", "ds_inf_slice", "in_t0", "is_attached", "solve_chain", "syzygy_gap", "theta_dist",
    "upright_eventually_attached", "measure_pair", "Measure", "Poly", "ExactnumError",
]
