"""Fermat towers sum x_i^d, their generating functions, and two char-2 cubics.

Series live in Q(sqrt3)((alpha)), truncated at a fixed order.  Every trig
series is built from exact factorials; apparent poles must cancel and are
checked rather than dropped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

from .compose import HFunction, compose_diag_inf, ehk, fsig, h_pure_power
from .exactnum import InternalError, as_q, fmt_q
from .kernels import KernelError, solve_chain

MAX_ORDER = 64


class FermatError(ValueError):
    """Unsupported request in the Fermat module."""


# ---------------------------------------------------------------------------
# Q(sqrt3) numbers and truncated Laurent series over them
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QS3:
    """a + b*sqrt(3) with rational a, b."""

    a: Fraction = Fraction(0)
    b: Fraction = Fraction(0)

    @staticmethod
    def of(v) -> "QS3":
        return v if isinstance(v, QS3) else QS3(as_q(v), Fraction(0))

    def __add__(self, o):
        if isinstance(o, AlgebraicSeries):
            return NotImplemented
        o = QS3.of(o)
        return QS3(self.a + o.a, self.b + o.b)

    __radd__ = __add__

    def __neg__(self):
        return QS3(-self.a, -self.b)

    def __sub__(self, o):
        if isinstance(o, AlgebraicSeries):
            return NotImplemented
        return self + (-QS3.of(o))

    def __rsub__(self, o):
        return QS3.of(o) - self

    def __mul__(self, o):
        if isinstance(o, AlgebraicSeries):
            return NotImplemented
        o = QS3.of(o)
        return QS3(self.a * o.a + 3 * self.b * o.b, self.a * o.b + self.b * o.a)

    __rmul__ = __mul__

    def inverse(self) -> "QS3":
        n = self.a * self.a - 3 * self.b * self.b
        if n == 0:
            raise ZeroDivisionError("zero in Q(sqrt3)")
        return QS3(self.a / n, -self.b / n)

    def __truediv__(self, o):
        if isinstance(o, AlgebraicSeries):
            return NotImplemented
        return self * QS3.of(o).inverse()

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    def __repr__(self) -> str:
        if self.b == 0:
            return str(self.a)
        return f"({self.a} + {self.b}*sqrt3)"


SQRT3 = QS3(Fraction(0), Fraction(1))
_ZERO = QS3()


class AlgebraicSeries:
    """Truncated Laurent series sum_{k >= low} c_k alpha^k, known for k < order."""

    __slots__ = ("low", "coeffs", "order")

    def __init__(self, coeffs: Sequence, low: int = 0, order: int | None = None):
        cs = [QS3.of(c) for c in coeffs]
        self.order = low + len(cs) if order is None else order
        cs = cs[: max(0, self.order - low)]
        # normalize: strip leading zeros
        while cs and cs[0].is_zero():
            cs.pop(0)
            low += 1
        self.low = low
        self.coeffs = cs

    @classmethod
    def const(cls, c, order: int) -> "AlgebraicSeries":
        return cls([c], 0, order)

    @classmethod
    def alpha(cls, order: int, power: int = 1) -> "AlgebraicSeries":
        return cls([1], power, order)

    def coeff(self, k: int) -> QS3:
        if k >= self.order:
            raise InternalError(f"coefficient {k} beyond truncation order {self.order}")
        i = k - self.low
        return self.coeffs[i] if 0 <= i < len(self.coeffs) else _ZERO

    def _lift(self, o) -> "AlgebraicSeries":
        if isinstance(o, AlgebraicSeries):
            return o
        return AlgebraicSeries([o], 0, self.order)

    def __add__(self, o):
        o = self._lift(o)
        order = min(self.order, o.order)
        low = min(self.low, o.low)
        return AlgebraicSeries([self.coeff(k) + o.coeff(k) for k in range(low, order)], low, order)

    __radd__ = __add__

    def __neg__(self):
        return AlgebraicSeries([-c for c in self.coeffs], self.low, self.order)

    def __sub__(self, o):
        return self + (-self._lift(o))

    def __rsub__(self, o):
        return self._lift(o) - self

    def __mul__(self, o):
        if not isinstance(o, AlgebraicSeries):
            c = QS3.of(o)
            return AlgebraicSeries([c * x for x in self.coeffs], self.low, self.order)
        low = self.low + o.low
        # precision: the product is known below min(order_a + low_b, order_b + low_a)
        order = min(self.order + o.low, o.order + self.low)
        out = [_ZERO] * max(0, order - low)
        for i, x in enumerate(self.coeffs):
            for j, y in enumerate(o.coeffs):
                k = i + j
                if k >= len(out):
                    break
                out[k] = out[k] + x * y
        return AlgebraicSeries(out, low, order)

    __rmul__ = __mul__

    def inverse(self) -> "AlgebraicSeries":
        if not self.coeffs:
            raise ZeroDivisionError("series is zero to the known precision")
        n = self.order - self.low
        c0inv = self.coeffs[0].inverse()
        inv = [c0inv]
        for k in range(1, n):
            s = _ZERO
            for j in range(1, min(k, len(self.coeffs) - 1) + 1):
                s = s + self.coeffs[j] * inv[k - j]
            inv.append(-(s * c0inv))
        return AlgebraicSeries(inv, -self.low, n - self.low)

    def __truediv__(self, o):
        if not isinstance(o, AlgebraicSeries):
            return self * QS3.of(o).inverse()
        return self * o.inverse()

    def __rtruediv__(self, o):
        return self._lift(o) * self.inverse()

    def rational_coeffs(self, n: int) -> list[Fraction]:
        """Coefficients of alpha^0..alpha^{n-1}; requires no pole and no sqrt3 part."""
        if self.low < 0:
            raise InternalError(f"series keeps a pole of order {-self.low}")
        out = []
        for k in range(n):
            c = self.coeff(k)
            if c.b != 0:
                raise InternalError(f"coefficient {k} has a nonzero sqrt3 component")
            out.append(c.a)
        return out


def _trig(kind: str, c: Fraction, sqrt3: bool, order: int) -> AlgebraicSeries:
    """sin or cos of (c * s * alpha), s = sqrt3 or 1."""
    c = as_q(c)
    out = []
    for k in range(order):
        if (kind == "sin") != (k % 2 == 1):
            out.append(_ZERO)
            continue
        sign = -1 if (k // 2) % 2 else 1
        val = QS3(Fraction(sign) * c ** k / math.factorial(k))
        if sqrt3:
            val = val * QS3(Fraction(3) ** (k // 2)) * (SQRT3 if k % 2 else QS3(Fraction(1)))
        out.append(val)
    return AlgebraicSeries(out, 0, order)


def sin_s(c, order: int, sqrt3: bool = False) -> AlgebraicSeries:
    return _trig("sin", c, sqrt3, order)


def cos_s(c, order: int, sqrt3: bool = False) -> AlgebraicSeries:
    return _trig("cos", c, sqrt3, order)


def geometric(order: int) -> AlgebraicSeries:
    """1 / (1 - alpha)."""
    return AlgebraicSeries([1] * order, 0, order)


def _check_order(N: int) -> None:
    if N < 0 or N > MAX_ORDER:
        raise FermatError(f"order must lie in 0..{MAX_ORDER}")


# ---------------------------------------------------------------------------
# Towers
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def fermat_phi(d: int, n: int) -> HFunction:
    """Limit h-function of x_0^d + ... + x_n^d."""
    if d < 1 or n < 0:
        raise FermatError("need d >= 1 and n >= 0")
    if n == 0:
        return h_pure_power(d)
    h = compose_diag_inf(fermat_phi(d, n - 1), d)
    return HFunction(h.h, None, f"fermat d={d} n={n}")


def fermat_tower(d: int, levels: int) -> list[HFunction]:
    return [fermat_phi(d, n) for n in range(levels)]


def zigzag(N: int) -> list[int]:
    """Zigzag numbers E_0..E_N from the boustrophedon triangle."""
    if N < 0:
        raise FermatError("N must be nonnegative")
    row = [1]
    out = [1]
    for n in range(1, N + 1):
        new = [0]
        for k in range(1, n + 1):
            new.append(new[k - 1] + row[n - k])
        row = new
        out.append(row[-1])
    return out


def _tan_sec(order: int) -> AlgebraicSeries:
    # extra terms: the product/division steps below keep full precision
    s, c = sin_s(1, order), cos_s(1, order)
    return (s + 1) / c


def series_d2(N: int) -> tuple[list[Fraction], list[Fraction]]:
    """(e_HK, F-signature) coefficient lists of the quadric tower, alpha^0..alpha^{N-1}."""
    _check_order(N)
    ts = _tan_sec(N)
    g = geometric(N)
    return (g + ts).rational_coeffs(N), (g - ts).rational_coeffs(N)


def _d3_parts(order: int):
    sin_h = sin_s(Fraction(1, 2), order, True)   # sin(sqrt3 a / 2)
    cos_h = cos_s(Fraction(1, 2), order, True)
    sin_1 = sin_s(1, order, True)                # sin(sqrt3 a)
    cos_1 = cos_s(1, order, True)
    return sin_h, cos_h, sin_1, cos_1


def series_d3(N: int) -> tuple[list[Fraction], list[Fraction]]:
    """(c_n, c'_n) for the cubic tower from the closed generating functions."""
    _check_order(N)
    sin_h, cos_h, sin_1, cos_1 = _d3_parts(N)
    den = 1 + 2 * cos_1
    c = (2 * SQRT3) * (SQRT3 * cos_h + sin_1) / den
    cp = -geometric(N) + SQRT3 * (2 * sin_h + SQRT3) / den
    return c.rational_coeffs(N), cp.rational_coeffs(N)


def closed_phi_d2(N: int, x) -> list[Fraction]:
    """Coefficients of alpha^0..alpha^{N-1} in the closed form of the quadric generating function."""
    _check_order(N)
    x = as_q(x)
    if not (0 <= x <= 1):
        raise FermatError("x must lie in [0, 1]")
    M = N + 2
    g = geometric(M)
    ts = _tan_sec(M)
    a = AlgebraicSeries.alpha(M)
    if x <= Fraction(1, 2):
        num = cos_s(2 * x, M) - 1 + ts * sin_s(2 * x, M)
        series = x * g + num / (2 * a)
    else:
        y = x - Fraction(1, 2)
        num = (2 * a - 1) * g - sin_s(2 * y, M) + ts * cos_s(2 * y, M)
        series = y * g + num / (2 * a)
    return series.rational_coeffs(N)


# ---------------------------------------------------------------------------
# Degree 3 closed form (three pieces on [0, 1/3], [1/3, 2/3], [2/3, 1])
# ---------------------------------------------------------------------------


def d3_constants(order: int) -> dict[str, AlgebraicSeries]:
    sin_h, cos_h, sin_1, cos_1 = _d3_parts(order)
    a = AlgebraicSeries.alpha(order)
    den = a + 2 * a * cos_1
    B = 2 * (SQRT3 * cos_h + sin_1) / den
    return {
        "A": (6 * cos_1 - 2 * SQRT3 * sin_h) / (3 * den),
        "B": B,
        "C": B / SQRT3,
        "D": 2 * (2 + cos_1 + SQRT3 * sin_h) / (SQRT3 * den),
        "D1": AlgebraicSeries.const(0, order),
        "D2": geometric(order),
    }


def d3_pieces(order: int, x) -> dict[str, AlgebraicSeries]:
    """F1, F2, F3, G1, G2, G3 at local coordinate x in [0, 1/3]."""
    x = as_q(x)
    k = _const = d3_constants(order)
    A, B, C, D, D1, D2 = (k[n] for n in ("A", "B", "C", "D", "D1", "D2"))
    a = AlgebraicSeries.alpha(order)
    g = geometric(order)
    inv_a = 1 / a
    cs = cos_s(Fraction(3, 2) * x, order, True)
    sn = sin_s(Fraction(3, 2) * x, order, True)
    r3 = SQRT3
    third = Fraction(1, 3)
    base1 = -third * inv_a + third * g
    cross = third * inv_a * g
    F1 = x * g + D1 * third + base1 - cross + (A + D / r3) * cs * Fraction(1, 2) + (B + C / r3) * sn * Fraction(1, 2)
    F2 = x * g - D2 * third + 2 * base1 + (B / r3) * cs - (A / r3) * sn
    F3 = x * g + D1 * third + base1 + cross + (D / r3 - A) * cs * Fraction(1, 2) + (C / r3 - B) * sn * Fraction(1, 2)
    G1 = -x * g + D2 * third + base1 - cross + (C + B / r3) * cs * Fraction(1, 2) - (D + A / r3) * sn * Fraction(1, 2)
    G2 = -x * g - D1 * third + 2 * base1 + (D / r3) * cs + (C / r3) * sn
    G3 = -x * g + D2 * third + base1 + cross + (B / r3 - C) * cs * Fraction(1, 2) + (D - A / r3) * sn * Fraction(1, 2)
    return {"F1": F1, "F2": F2, "F3": F3, "G1": G1, "G2": G2, "G3": G3}


def closed_phi_d3(N: int, x) -> list[Fraction]:
    _check_order(N)
    x = as_q(x)
    if not (0 <= x <= 1):
        raise FermatError("x must lie in [0, 1]")
    third = Fraction(1, 3)
    M = N + 3
    if x <= third:
        return d3_pieces(M, x)["F1"].rational_coeffs(N)
    if x <= 2 * third:
        return d3_pieces(M, x - third)["F2"].rational_coeffs(N)
    return d3_pieces(M, x - 2 * third)["F3"].rational_coeffs(N)


def d3_boundary_report(N: int) -> dict[str, bool]:
    """The ten gluing relations between the six pieces, as truncated series identities."""
    M = N + 3
    third = Fraction(1, 3)
    at0 = d3_pieces(M, 0)
    at1 = d3_pieces(M, third)
    g = geometric(M)
    zero = AlgebraicSeries.const(0, M)

    def eq(s, t) -> bool:
        diff = s - t
        return all(diff.coeff(k).is_zero() for k in range(min(diff.low, 0), N))

    return {
        "F1(0)=0": eq(at0["F1"], zero),
        "G1(1/3)=0": eq(at1["G1"], zero),
        "F1(1/3)=F2(0)": eq(at1["F1"], at0["F2"]),
        "F2(0)=G1(0)": eq(at0["F2"], at0["G1"]),
        "G1(0)=G2(1/3)": eq(at0["G1"], at1["G2"]),
        "F2(1/3)=F3(0)": eq(at1["F2"], at0["F3"]),
        "F3(0)=G2(0)": eq(at0["F3"], at0["G2"]),
        "G2(0)=G3(1/3)": eq(at0["G2"], at1["G3"]),
        "F3(1/3)=1/(1-a)": eq(at1["F3"], g),
        "G3(0)=1/(1-a)": eq(at0["G3"], g),
    }


@dataclass(frozen=True)
class ConsistencyReport:
    d: int
    order: int
    ok: bool
    first_mismatch: tuple | None  # (n, x, iterated, closed)
    boundary: dict

    def to_json(self) -> dict:
        fm = None
        if self.first_mismatch:
            n, x, it, cl = self.first_mismatch
            fm = {"n": n, "x": fmt_q(x), "iterated": fmt_q(it), "closed": fmt_q(cl)}
        return {"d": self.d, "order": self.order, "ok": self.ok, "first_mismatch": fm,
                "boundary": self.boundary}


def verify_phi_consistency(d: int, N: int, samples: Iterable | None = None) -> ConsistencyReport:
    """Iterated tower versus the closed generating function, order by order."""
    if d not in (2, 3):
        raise FermatError("closed forms exist for d = 2 and d = 3 only")
    _check_order(N)
    xs = [as_q(x) for x in samples] if samples is not None else [Fraction(k, 12) for k in range(13)]
    closed = closed_phi_d2 if d == 2 else closed_phi_d3
    mismatch = None
    for x in xs:
        coeffs = closed(N, x)
        for n in range(N):
            it = fermat_phi(d, n)(x)
            if it != coeffs[n]:
                mismatch = (n, x, it, coeffs[n])
                break
        if mismatch:
            break
    boundary = d3_boundary_report(N) if d == 3 else {}
    ok = mismatch is None and all(boundary.values())
    return ConsistencyReport(d, N, ok, mismatch, boundary)


# ---------------------------------------------------------------------------
# Characteristic 2: x^3 + y^3 and x^3 + y^3 + z^3
# ---------------------------------------------------------------------------


def _unit(t) -> Fraction:
    t = as_q(t)
    if not (0 <= t <= 1):
        raise FermatError("argument must lie in [0, 1]")
    return t


def _dyadic_split(t: Fraction) -> tuple[int, Fraction]:
    """t = (a + s) / 2 with a in {0, 1} and s in [0, 1]."""
    if t <= Fraction(1, 2):
        return 0, 2 * t
    return 1, 2 * t - 1


def char2_v(which: int, t, orbit_cap: int = 10_000) -> Fraction:
    """v_1(t) = D_2(1/3, 1/3, t) and v_2(t) = D_2(2/3, 2/3, t) from their coupled system."""
    t = _unit(t)

    def step(state):
        k, s = state
        if s == 0:
            return ("value", Fraction(0))
        a, r = _dyadic_split(s)
        if k == 1:
            if a == 0:
                return ("link", Fraction(1, 4), 0, (2, r))
            return ("value", Fraction(1, 9))
        if a == 0:
            return ("link", Fraction(1, 4), r / 4, (1, r))
        return ("value", Fraction(1, 9) + (r + 1) / 6)

    return solve_chain((which, t), step, orbit_cap)


def char2_sum_two_cubes(t) -> Fraction:
    """h of x^3 + y^3 over F_2 at t >= 0."""
    t = as_q(t)
    if t <= 0:
        return Fraction(0)
    if t >= 1:
        return Fraction(1)
    return 9 * char2_v(1, t)


def char2_lw(which: int, x, orbit_cap: int = 10_000) -> Fraction:
    """The t-integrals Lw_1, Lw_2 of the product densities, from their coupled system."""
    x = _unit(x)

    def step(state):
        k, s = state
        a, r = _dyadic_split(s)
        if k == 1:
            if a == 0:
                return ("link", Fraction(1, 8), 0, (2, r))
            return ("value", Fraction(1, 27))
        if a == 0:
            return ("value", r / 6)
        return ("link", Fraction(1, 8), r / 8 + Fraction(1, 6), (1, r))

    return solve_chain((which, x), step, orbit_cap)


def char2_cubic_h(x) -> Fraction:
    """h of x^3 + y^3 + z^3 over F_2."""
    x = as_q(x)
    if x <= 0:
        return Fraction(0)
    if x >= 1:
        return Fraction(1)
    return 27 * char2_lw(1, x)


def hks_closed(order: int) -> list[Fraction]:
    """Coefficients of 1 + a + (9/16) a^2 / (1 - a/2)."""
    out = []
    for i in range(order):
        if i < 2:
            out.append(Fraction(1))
        else:
            out.append(Fraction(9, 16) / 2 ** (i - 2))
    return out


def char2_cubic(order: int = 9) -> dict:
    values = {i: char2_cubic_h(Fraction(1, 2 ** i)) for i in range(order)}
    # the IFS makes h linear on [0, 1/4]: its slope there is the HK multiplicity
    slope = char2_cubic_h(Fraction(1, 4)) * 4
    if char2_cubic_h(Fraction(1, 8)) * 8 != slope:
        raise InternalError("h is not linear near 0")
    return {
        "h": values,
        "hks": [values[i] for i in range(order)],
        "hks_closed": hks_closed(order),
        "e_hk": slope,
        "fsig": Fraction(0) if char2_cubic_h(Fraction(7, 8)) == 1 else None,
    }


__all__ = [
    "AlgebraicSeries", "ConsistencyReport", "FermatError", "QS3", "SQRT3", "char2_cubic", "char2_cubic_h",
    "char2_lw", "char2_sum_two_cubes", "char2_v", "closed_phi_d2", "closed_phi_d3", "cos_s", "d3_boundary_report",
    "d3_constants", "d3_pieces", "fermat_phi", "fermat_tower", "geometric", "hks_closed", "series_d2",
    "series_d3", "sin_s", "verify_phi_consistency", "zigzag",
]
