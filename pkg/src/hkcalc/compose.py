"""h-functions built by Stieltjes composition against addition kernels.

An h-function here is the limit h_{R, m, f}(t) for a polynomial f in a
polynomial ring, normalized so that h(t) = 1 past the F-threshold.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .exactnum import (
    ExactnumError,
    InternalError,
    Measure,
    PiecewisePoly,
    Poly,
    as_q,
    fmt_q,
    interpolate_piecewise,
    neg_dh_measure,
    pp_derivative_side,
    slice_pair,
)
from .fforacle import MPoly, h_e_point, poly_mul
from .kernels import dinf_along, dinf_slice, dp_eval


class ComposeError(ValueError):
    """Unsupported or ill-posed composition request."""


def _char_label(char: int | None) -> str:
    return "inf" if char is None else str(char)


@dataclass(frozen=True)
class HFunction:
    """Exact piecewise h-function; ``char`` is None for the limit characteristic."""

    h: PiecewisePoly
    char: int | None = None
    label: str = ""
    mu: Measure = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        if self.h.left != 0:
            raise ComposeError("an h-function vanishes for t <= 0")
        object.__setattr__(self, "mu", neg_dh_measure(self.h))

    def __call__(self, t) -> Fraction:
        return self.h(as_q(t))

    @property
    def e_hk(self) -> Fraction:
        return ehk(self)

    @property
    def threshold(self) -> Fraction:
        return threshold(self)

    @property
    def fsig(self) -> Fraction | None:
        return fsig(self)

    def to_json(self) -> dict:
        fs = self.fsig
        return {
            "label": self.label,
            "char": _char_label(self.char),
            "h": self.h.to_json(),
            "measure": self.mu.to_json(),
            "e_hk": fmt_q(self.e_hk),
            "fsig": None if fs is None else fmt_q(fs),
            "threshold": fmt_q(self.threshold),
        }


@dataclass(frozen=True)
class LazyHEvaluator:
    """Exact pointwise h in a fixed characteristic p."""

    p: int
    func: Callable[[Fraction], Fraction] = field(compare=False)
    label: str = ""

    def __call__(self, t) -> Fraction:
        return self.func(as_q(t))


def ehk(h: HFunction) -> Fraction:
    return pp_derivative_side(h.h, 0, "+")


def threshold(h: HFunction) -> Fraction:
    return h.mu.support_sup()


def fsig(h: HFunction) -> Fraction | None:
    if threshold(h) > 1:
        return None
    return pp_derivative_side(h.h, 1, "-")


# ---------------------------------------------------------------------------
# Base h-functions
# ---------------------------------------------------------------------------


def h_pure_power(n: int) -> HFunction:
    if n < 1:
        raise ComposeError("exponent must be positive")
    h = PiecewisePoly([0, Fraction(1, n)], [Poly([0, n])], 0, 1)
    return HFunction(h, None, f"x^{n}")


def segre_product_h(l: int) -> HFunction:
    if l < 1:
        raise ComposeError("l must be positive")
    k = 2 ** l
    return HFunction(PiecewisePoly([0, 1], [Poly([0, k])], 0, k), None, f"segre^{l}")


def h_monomial_volume(ideal_exps: Sequence[Sequence[int]], gen_exps: Sequence[Sequence[int]],
                      t: Sequence) -> Fraction:
    """Volume of the positive orthant minus the upper sets of a_i and t_j * b_j."""
    ts = [as_q(v) for v in t]
    if len(ts) != len(gen_exps):
        raise ComposeError("need one t per generator exponent")
    if any(v <= 0 for v in ts):
        return Fraction(0)
    corners = [tuple(as_q(c) for c in a) for a in ideal_exps]
    corners += [tuple(tj * as_q(c) for c in b) for tj, b in zip(ts, gen_exps)]
    if not corners:
        raise ComposeError("empty ideal has infinite colength")
    n = len(corners[0])
    if any(len(c) != n for c in corners):
        raise ComposeError("exponent vectors must share one length")
    axes = [sorted({Fraction(0)} | {c[i] for c in corners}) for i in range(n)]
    vol = Fraction(0)
    for idx in itertools.product(*(range(len(ax)) for ax in axes)):
        lower = tuple(axes[i][j] for i, j in enumerate(idx))
        if any(all(lower[i] >= c[i] for i in range(n)) for c in corners):
            continue
        if any(j == len(axes[i]) - 1 for i, j in enumerate(idx)):
            raise ComposeError("the monomial ideal is not primary to the maximal ideal")
        cell = Fraction(1)
        for i, j in enumerate(idx):
            cell *= axes[i][j + 1] - axes[i][j]
        vol += cell
    return vol


# ---------------------------------------------------------------------------
# Composition with a new diagonal summand x^d
# ---------------------------------------------------------------------------


def _finish(values: PiecewisePoly, char, label) -> HFunction:
    h = PiecewisePoly(values.breakpoints, values.pieces, 0, values.right).simplify()
    if not h.is_continuous():
        raise InternalError(f"composed h-function for {label} is discontinuous")
    return HFunction(h, char, label)


def compose_diag_inf(h: HFunction, d: int, label: str | None = None) -> HFunction:
    """h-function of g + x^d in the limit, where h is that of g (x a new variable)."""
    if h.char is not None:
        raise ComposeError("compose_diag_inf expects a limit-characteristic h-function")
    if d < 1:
        raise ComposeError("degree must be positive")
    if threshold(h) > 1:
        raise ComposeError("threshold above 1 is not supported")
    K = dinf_slice(Fraction(1, d)).scale(d)
    out = slice_pair(K, h.mu)
    return _finish(out, None, label or f"{h.label}+x^{d}")


def compose_diagonal_inf(degrees: Sequence[int]) -> HFunction:
    """Limit h-function of x_1^{d_1} + ... + x_s^{d_s}."""
    if not degrees:
        raise ComposeError("need at least one degree")
    h = h_pure_power(degrees[0])
    for d in degrees[1:]:
        h = compose_diag_inf(h, d)
    return HFunction(h.h, None, "+".join(f"x{i}^{d}" for i, d in enumerate(degrees)))


def _atoms_only(mu: Measure) -> list[tuple]:
    if any(not p.is_zero() for p in mu.density.pieces):
        raise ComposeError("char-p composition supports purely atomic measures only")
    return [(loc, m) for loc, m in mu.atoms if m != 0 and mu.includes_atom(loc)]


def compose_diag_p(p: int, h: HFunction, d: int) -> LazyHEvaluator:
    """Evaluator r -> sum of mass * d * D_p(loc, 1/d, r) over the atoms of -dh'."""
    atoms = _atoms_only(h.mu)
    inv = Fraction(1, d)

    def f(r: Fraction) -> Fraction:
        if r <= 0:
            return Fraction(0)
        return sum((m * d * dp_eval(p, (loc, inv, r)) for loc, m in atoms), Fraction(0))

    return LazyHEvaluator(p, f, f"{h.label}+x^{d} (p={p})")


def diagonal_p(p: int, degrees: Sequence[int]) -> LazyHEvaluator:
    if len(degrees) == 1:
        d = degrees[0]
        return LazyHEvaluator(p, lambda r: min(max(d * r, Fraction(0)), Fraction(1)), f"x^{d}")
    if len(degrees) != 2:
        raise ComposeError("char-p diagonal evaluation supports one or two summands")
    return compose_diag_p(p, h_pure_power(degrees[0]), degrees[1])


# ---------------------------------------------------------------------------
# Binomials x^a y^b (x^u + y^v)^c
# ---------------------------------------------------------------------------


def _binomial_end(a: int, b: int, u: int, v: int, c: int) -> Fraction:
    ends = [(Fraction(1, u) + Fraction(1, v)) / c]
    if a:
        ends.append(Fraction(1, a))
    if b:
        ends.append(Fraction(1, b))
    return min(ends)


def _check_binomial(a, b, u, v, c):
    if min(u, v, c) < 1 or min(a, b) < 0:
        raise ComposeError("need u, v, c >= 1 and a, b >= 0")


def binomial_poly(a: int, b: int, u: int, v: int, c: int) -> MPoly:
    """x^a y^b (x^u + y^v)^c as an integer polynomial in two variables."""
    _check_binomial(a, b, u, v, c)
    f: MPoly = {(a, b): 1}
    for _ in range(c):
        f = poly_mul(f, {(u, 0): 1, (0, v): 1})
    return f


def h_binomial(char: int | None, a: int, b: int, u: int, v: int, c: int):
    """h-function of x^a y^b (x^u + y^v)^c in k[x, y]."""
    _check_binomial(a, b, u, v, c)
    end = _binomial_end(a, b, u, v, c)
    label = f"x^{a}y^{b}(x^{u}+y^{v})^{c}"
    base = (Fraction(1, u), Fraction(1, v), Fraction(0))
    step = (Fraction(-a, u), Fraction(-b, v), Fraction(c))
    uv = u * v

    def outer(r: Fraction) -> Fraction:
        return 1 - (1 - r * a) * (1 - r * b)

    if char is None:
        path = dinf_along(base, step, 0, end)

        def value(r: Fraction) -> Fraction:
            return outer(r) + uv * path(r)

        h = interpolate_piecewise(value, path.breakpoints, 2, left=0, right=1, checks=3)
        return _finish(h, None, label)

    def f(r: Fraction) -> Fraction:
        if r <= 0:
            return Fraction(0)
        if r >= end:
            return Fraction(1)
        pt = tuple(b0 + r * s for b0, s in zip(base, step))
        return outer(r) + uv * dp_eval(char, pt)

    return LazyHEvaluator(char, f, label)


# ---------------------------------------------------------------------------
# Named examples
# ---------------------------------------------------------------------------


def quadric_tower(n: int) -> HFunction:
    """Limit h-function of x_0^2 + ... + x_n^2 (n + 1 squares)."""
    return compose_diagonal_inf([2] * (n + 1))


def h_a_type(n: int) -> HFunction:
    """x^2 + y^2 + z^n, the A_{n-1} surface singularity."""
    if n < 2:
        raise ComposeError("n must be at least 2")
    h = compose_diag_inf(compose_diag_inf(h_pure_power(n), 2), 2)
    return HFunction(h.h, None, f"A{n - 1}: x^2+y^2+z^{n}")


def h_e7_inner() -> HFunction:
    """y^3 + y z^3 = y (y^2 + z^3)."""
    return h_binomial(None, 1, 0, 2, 3, 1)


def h_e7() -> HFunction:
    h = compose_diag_inf(h_e7_inner(), 2)
    return HFunction(h.h, None, "E7: x^2+y^3+yz^3")


def h_d_inner(n: int) -> HFunction:
    """y z^2 + z^n = z^2 (y + z^{n-2})."""
    if n < 3:
        raise ComposeError("n must be at least 3")
    return h_binomial(None, 0, 2, 1, n - 2, 1)


def h_d_type(n: int) -> HFunction:
    """x^2 + y z^2 + z^n, the D_{n+1} surface singularity."""
    h = compose_diag_inf(h_d_inner(n), 2)
    return HFunction(h.h, None, f"D{n + 1}: x^2+yz^2+z^{n}")


# ---------------------------------------------------------------------------
# Oracle comparison
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OracleReport:
    p: int
    e: int
    points: tuple  # (t, engine, oracle)

    @property
    def max_abs_discrepancy(self) -> Fraction:
        return max((abs(o - v) for _, v, o in self.points), default=Fraction(0))

    @property
    def min_gap(self) -> Fraction:
        return min((o - v for _, v, o in self.points), default=Fraction(0))

    @property
    def max_gap(self) -> Fraction:
        return max((o - v for _, v, o in self.points), default=Fraction(0))

    def to_json(self) -> dict:
        return {
            "p": self.p, "e": self.e,
            "max_abs_discrepancy": fmt_q(self.max_abs_discrepancy),
            "min_gap": fmt_q(self.min_gap), "max_gap": fmt_q(self.max_gap),
            "points": [{"t": fmt_q(t), "engine": fmt_q(v), "oracle": fmt_q(o)} for t, v, o in self.points],
        }


def oracle_compare(engine, p: int, e: int, nvars: int, f, grid: Iterable | None = None) -> OracleReport:
    """Compare an engine h (HFunction or evaluator) with the finite-field oracle.

    The gap columns are oracle - engine, which is the signed h_p - h_inf when
    ``engine`` is a limit h-function.
    """
    q = p ** e
    ts = [Fraction(k, q) for k in range(q + 1)] if grid is None else [as_q(t) for t in grid]
    for t in ts:
        if (t * q).denominator != 1:
            raise ComposeError(f"grid point {t} is not a multiple of 1/{q}")
    rows = []
    for t in ts:
        rows.append((t, engine(t), h_e_point(p, e, nvars, f, t)))
    return OracleReport(p, e, tuple(rows))


__all__ = [
    "ComposeError", "HFunction", "LazyHEvaluator", "OracleReport", "compose_diag_inf", "compose_diag_p",
    "compose_diagonal_inf", "diagonal_p", "ehk", "fsig", "h_a_type", "binomial_poly", "h_binomial", "h_d_inner", "h_d_type",
    "h_e7", "h_e7_inner", "h_monomial_volume", "h_pure_power", "oracle_compare", "quadric_tower",
    "segre_product_h", "threshold",
]
