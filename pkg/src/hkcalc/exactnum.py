"""Exact rationals, univariate polynomials, piecewise polynomials and measures.

Everything here is built on :class:`fractions.Fraction`; no floating point is
used anywhere.  The Stieltjes pairing ``measure_pair`` and the kernel slicer
``slice_pair`` are the engine behind every composed h-function.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence

Q = Fraction


class ExactnumError(ValueError):
    """Raised for malformed exact-arithmetic input."""


class InternalError(RuntimeError):
    """An internal invariant was violated (indicates a bug, not bad input)."""


def as_q(value) -> Fraction:
    """Coerce ints, Fractions and ``"p/q"`` strings to a Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ExactnumError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return parse_rational(value)
    raise ExactnumError(f"cannot interpret {value!r} as an exact rational")


def parse_rational(text: str) -> Fraction:
    s = text.strip()
    if not s:
        raise ExactnumError("empty rational")
    try:
        if "/" in s:
            num, den = s.split("/", 1)
            n, d = int(num), int(den)
            if d == 0:
                raise ExactnumError(f"zero denominator in {text!r}")
            return Fraction(n, d)
        return Fraction(int(s))
    except ValueError as exc:
        if isinstance(exc, ExactnumError):
            raise
        raise ExactnumError(f"malformed rational {text!r}") from None


def fmt_q(x: Fraction) -> str:
    x = as_q(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


# ---------------------------------------------------------------------------
# Univariate polynomials
# ---------------------------------------------------------------------------


class Poly:
    """Polynomial with Fraction coefficients in ascending degree order."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable = ()):
        cs = [as_q(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs: tuple[Fraction, ...] = tuple(cs)

    @classmethod
    def const(cls, c) -> "Poly":
        return cls([c])

    @classmethod
    def x(cls) -> "Poly":
        return cls([0, 1])

    @classmethod
    def interpolate(cls, points: Sequence[tuple]) -> "Poly":
        """Lagrange interpolation through exact points."""
        pts = [(as_q(a), as_q(b)) for a, b in points]
        result = Poly()
        for i, (xi, yi) in enumerate(pts):
            if yi == 0:
                continue
            basis = Poly([1])
            denom = Fraction(1)
            for j, (xj, _) in enumerate(pts):
                if j == i:
                    continue
                basis = basis * Poly([-xj, 1])
                denom *= xi - xj
            result = result + basis * (yi / denom)
        return result

    @property
    def degree(self) -> int:
        """Degree; the zero polynomial has degree -1."""
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def __call__(self, x) -> Fraction:
        x = as_q(x)
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def __add__(self, other) -> "Poly":
        other = _to_poly(other)
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (Fraction(0),) * (n - len(self.coeffs))
        b = other.coeffs + (Fraction(0),) * (n - len(other.coeffs))
        return Poly(x + y for x, y in zip(a, b))

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        return Poly(-c for c in self.coeffs)

    def __sub__(self, other) -> "Poly":
        return self + (-_to_poly(other))

    def __rsub__(self, other) -> "Poly":
        return _to_poly(other) - self

    def __mul__(self, other) -> "Poly":
        if not isinstance(other, Poly):
            k = as_q(other)
            return Poly(c * k for c in self.coeffs)
        if not self.coeffs or not other.coeffs:
            return Poly()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return Poly(out)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "Poly":
        out = Poly([1])
        for _ in range(n):
            out = out * self
        return out

    def deriv(self) -> "Poly":
        return Poly(i * c for i, c in enumerate(self.coeffs) if i > 0)

    def antideriv(self) -> "Poly":
        return Poly([0] + [c / (i + 1) for i, c in enumerate(self.coeffs)])

    def integrate(self, a, b) -> Fraction:
        F = self.antideriv()
        return F(b) - F(a)

    def compose_affine(self, a, b) -> "Poly":
        """Return x -> self(a*x + b)."""
        inner = Poly([b, a])
        out = Poly()
        for c in reversed(self.coeffs):
            out = out * inner + c
        return out

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = Poly([other])
        return isinstance(other, Poly) and self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def __repr__(self) -> str:
        if not self.coeffs:
            return "Poly(0)"
        terms = []
        for i, c in enumerate(self.coeffs):
            if c == 0:
                continue
            terms.append(f"{c}" if i == 0 else f"{c}*x^{i}")
        return "Poly(" + " + ".join(terms) + ")"

    def to_json(self) -> list[str]:
        return [fmt_q(c) for c in self.coeffs]

    @classmethod
    def from_json(cls, data) -> "Poly":
        return cls(as_q(c) for c in data)


def _to_poly(v) -> Poly:
    return v if isinstance(v, Poly) else Poly([as_q(v)])


# ---------------------------------------------------------------------------
# Piecewise polynomials
# ---------------------------------------------------------------------------


class PiecewisePoly:
    """Piecewise polynomial on [b0, bk] with constant extensions outside.

    Piece ``i`` lives on ``[breakpoints[i], breakpoints[i+1]]``.
    """

    __slots__ = ("breakpoints", "pieces", "left", "right")

    def __init__(self, breakpoints, pieces, left=0, right=None):
        bps = tuple(as_q(b) for b in breakpoints)
        pcs = tuple(p if isinstance(p, Poly) else Poly(p) for p in pieces)
        if len(bps) < 2 or len(pcs) != len(bps) - 1:
            raise ExactnumError("need k+1 breakpoints for k >= 1 pieces")
        if any(b0 >= b1 for b0, b1 in zip(bps, bps[1:])):
            raise ExactnumError("breakpoints must be strictly increasing")
        self.breakpoints = bps
        self.pieces = pcs
        self.left = as_q(left)
        self.right = pcs[-1](bps[-1]) if right is None else as_q(right)

    # -- construction helpers -------------------------------------------------
    @classmethod
    def constant(cls, c, lo=0, hi=1) -> "PiecewisePoly":
        return cls([lo, hi], [Poly([c])], left=c, right=c)

    @property
    def lo(self) -> Fraction:
        return self.breakpoints[0]

    @property
    def hi(self) -> Fraction:
        return self.breakpoints[-1]

    def is_continuous(self) -> bool:
        if self.pieces[0](self.lo) != self.left or self.pieces[-1](self.hi) != self.right:
            return False
        return all(
            self.pieces[i](b) == self.pieces[i + 1](b)
            for i, b in enumerate(self.breakpoints[1:-1])
        )

    def _locate(self, x: Fraction) -> int:
        # index of a piece whose closed interval contains x (lowest index)
        lo, hi = 0, len(self.pieces) - 1
        while lo < hi:
            mid = (lo + hi) // 2
            if x <= self.breakpoints[mid + 1]:
                hi = mid
            else:
                lo = mid + 1
        return lo

    def __call__(self, x) -> Fraction:
        return pp_eval(self, x)

    def piece_at(self, x, side: str) -> Poly | None:
        """Polynomial governing x from the given side ('+' or '-'); None outside."""
        x = as_q(x)
        if side == "+":
            if x >= self.hi or x < self.lo:
                return None
            i = self._locate(x)
            if x == self.breakpoints[i + 1]:
                i += 1
            return self.pieces[i]
        if x <= self.lo or x > self.hi:
            return None
        return self.pieces[self._locate(x)]

    def refine(self, extra: Iterable) -> "PiecewisePoly":
        """Insert extra breakpoints inside the domain (same function)."""
        pts = sorted(set(self.breakpoints) | {as_q(e) for e in extra if self.lo < as_q(e) < self.hi})
        pieces = [self.pieces[self._locate((a + b) / 2)] for a, b in zip(pts, pts[1:])]
        return PiecewisePoly(pts, pieces, self.left, self.right)

    def simplify(self) -> "PiecewisePoly":
        """Merge equal adjacent pieces and trim pieces equal to the extensions."""
        bps = list(self.breakpoints)
        pcs = list(self.pieces)
        i = 0
        while i < len(pcs) - 1:
            if pcs[i] == pcs[i + 1]:
                del pcs[i + 1]
                del bps[i + 1]
            else:
                i += 1
        while len(pcs) > 1 and pcs[-1] == Poly([self.right]):
            pcs.pop()
            bps.pop()
        while len(pcs) > 1 and pcs[0] == Poly([self.left]):
            pcs.pop(0)
            bps.pop(0)
        return PiecewisePoly(bps, pcs, self.left, self.right)

    def _binary(self, other: "PiecewisePoly", op) -> "PiecewisePoly":
        pts = sorted(set(self.breakpoints) | set(other.breakpoints))
        pieces = []
        for a, b in zip(pts, pts[1:]):
            m = (a + b) / 2
            pieces.append(op(self._poly_near(m), other._poly_near(m)))
        return PiecewisePoly(pts, pieces, op(Poly([self.left]), Poly([other.left]))(0),
                             op(Poly([self.right]), Poly([other.right]))(0))

    def _poly_near(self, m: Fraction) -> Poly:
        if m < self.lo:
            return Poly([self.left])
        if m > self.hi:
            return Poly([self.right])
        return self.pieces[self._locate(m)]

    def __add__(self, other) -> "PiecewisePoly":
        if not isinstance(other, PiecewisePoly):
            c = as_q(other)
            return PiecewisePoly(self.breakpoints, [p + c for p in self.pieces],
                                 self.left + c, self.right + c)
        return self._binary(other, lambda a, b: a + b)

    __radd__ = __add__

    def __sub__(self, other) -> "PiecewisePoly":
        return self + (other * -1 if isinstance(other, PiecewisePoly) else -as_q(other))

    def __mul__(self, k) -> "PiecewisePoly":
        if isinstance(k, PiecewisePoly):
            return self._binary(k, lambda a, b: a * b)
        k = as_q(k)
        return PiecewisePoly(self.breakpoints, [p * k for p in self.pieces],
                             self.left * k, self.right * k)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if not isinstance(other, PiecewisePoly):
            return NotImplemented
        return (self.breakpoints == other.breakpoints and self.pieces == other.pieces
                and self.left == other.left and self.right == other.right)

    def same_function(self, other: "PiecewisePoly") -> bool:
        """Equality as functions on the real line (ignores representation)."""
        diff = (self - other).simplify()
        return all(p.is_zero() for p in diff.pieces) and diff.left == 0 and diff.right == 0

    def __hash__(self) -> int:
        return hash((self.breakpoints, self.pieces, self.left, self.right))

    def __repr__(self) -> str:
        parts = ", ".join(
            f"[{a},{b}]: {p!r}" for a, b, p in zip(self.breakpoints, self.breakpoints[1:], self.pieces)
        )
        return f"PiecewisePoly(left={self.left}, {parts}, right={self.right})"

    def to_json(self) -> dict:
        return {
            "breakpoints": [fmt_q(b) for b in self.breakpoints],
            "pieces": [p.to_json() for p in self.pieces],
            "left": fmt_q(self.left),
            "right": fmt_q(self.right),
        }

    @classmethod
    def from_json(cls, data: dict) -> "PiecewisePoly":
        return cls([as_q(b) for b in data["breakpoints"]],
                   [Poly.from_json(p) for p in data["pieces"]],
                   as_q(data["left"]), as_q(data["right"]))


def pp_eval(f: PiecewisePoly, x) -> Fraction:
    x = as_q(x)
    if x < f.lo:
        return f.left
    if x > f.hi:
        return f.right
    vals = set()
    if x == f.lo:
        vals.add(f.left)
    if x == f.hi:
        vals.add(f.right)
    for side in "+-":
        p = f.piece_at(x, side)
        if p is not None:
            vals.add(p(x))
    if len(vals) != 1:
        raise ExactnumError(f"ambiguous evaluation at breakpoint {x} of a discontinuous function")
    return vals.pop()


def pp_integral(f: PiecewisePoly, a, b) -> Fraction:
    a, b = as_q(a), as_q(b)
    if a > b:
        raise ExactnumError("pp_integral needs a <= b")
    total = Fraction(0)
    # left extension
    if a < f.lo:
        total += f.left * (min(b, f.lo) - a)
    if b > f.hi:
        total += f.right * (b - max(a, f.hi))
    for lo, hi, p in zip(f.breakpoints, f.breakpoints[1:], f.pieces):
        u, v = max(lo, a), min(hi, b)
        if u < v:
            total += p.integrate(u, v)
    return total


def pp_derivative_side(f: PiecewisePoly, x, side: str) -> Fraction:
    x = as_q(x)
    if side not in ("+", "-"):
        raise ExactnumError("side must be '+' or '-'")
    p = f.piece_at(x, side)
    if p is None:
        return Fraction(0)  # constant extension
    return p.deriv()(x)


# ---------------------------------------------------------------------------
# Measures
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SignedEndpoint:
    """Integration bound; '-' at a lower bound or '+' at an upper bound swallows an atom there."""

    value: Fraction
    sign: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "value", as_q(self.value))
        if self.sign not in ("+", "-", None):
            raise ExactnumError("sign must be '+', '-' or None")


@dataclass(frozen=True)
class Measure:
    atoms: tuple  # ((loc, mass), ...) sorted by loc
    density: PiecewisePoly
    lo: SignedEndpoint
    hi: SignedEndpoint

    def __post_init__(self):
        atoms = tuple(sorted((as_q(a), as_q(m)) for a, m in self.atoms))
        locs = [a for a, _ in atoms]
        if len(set(locs)) != len(locs):
            raise ExactnumError("atom locations must be distinct")
        for a in locs:
            if not (self.lo.value <= a <= self.hi.value):
                raise ExactnumError(f"atom at {a} lies outside the measure's domain")
        if self.density.left != 0 or self.density.right != 0:
            raise ExactnumError("density must vanish outside its breakpoints")
        object.__setattr__(self, "atoms", atoms)

    @classmethod
    def zero(cls, lo=0, hi=1) -> "Measure":
        return cls((), PiecewisePoly.constant(0, lo, hi),
                   SignedEndpoint(lo, "-"), SignedEndpoint(hi, "+"))

    def includes_atom(self, loc: Fraction) -> bool:
        if loc == self.lo.value:
            return self.lo.sign == "-"
        if loc == self.hi.value:
            return self.hi.sign == "+"
        return self.lo.value < loc < self.hi.value

    def support_sup(self) -> Fraction:
        """Largest point carrying mass."""
        best = None
        for loc, m in self.atoms:
            if m != 0 and self.includes_atom(loc):
                best = loc if best is None else max(best, loc)
        for a, b, p in zip(self.density.breakpoints, self.density.breakpoints[1:], self.density.pieces):
            if not p.is_zero():
                hi = min(b, self.hi.value)
                if hi > max(a, self.lo.value):
                    best = hi if best is None else max(best, hi)
        return Fraction(0) if best is None else best

    def to_json(self) -> dict:
        return {
            "atoms": [{"t": fmt_q(a), "mass": fmt_q(m)} for a, m in self.atoms],
            "density": self.density.to_json(),
            "lo": {"t": fmt_q(self.lo.value), "sign": self.lo.sign},
            "hi": {"t": fmt_q(self.hi.value), "sign": self.hi.sign},
        }

    @classmethod
    def from_json(cls, data: dict) -> "Measure":
        dens = PiecewisePoly.from_json(data["density"])
        lo = data.get("lo", {"t": fmt_q(dens.lo), "sign": "-"})
        hi = data.get("hi", {"t": fmt_q(dens.hi), "sign": "+"})
        return cls(tuple((as_q(a["t"]), as_q(a["mass"])) for a in data["atoms"]), dens,
                   SignedEndpoint(as_q(lo["t"]), lo["sign"]), SignedEndpoint(as_q(hi["t"]), hi["sign"]))


def neg_dh_measure(h: PiecewisePoly) -> Measure:
    """The distribution -h'' as atoms (jumps of h') plus the density -h''."""
    atoms = []
    for b in h.breakpoints:
        left = pp_derivative_side(h, b, "-")
        right = pp_derivative_side(h, b, "+")
        atoms.append((b, left - right))
    density = PiecewisePoly(h.breakpoints, [-(p.deriv().deriv()) for p in h.pieces], 0, 0)
    return Measure(tuple(atoms), density, SignedEndpoint(h.lo, "-"), SignedEndpoint(h.hi, "+"))


def _pair_density(f, density: PiecewisePoly, lo: Fraction, hi: Fraction) -> Fraction:
    total = Fraction(0)
    if isinstance(f, Poly):
        f = PiecewisePoly([min(lo, density.lo) - 1, max(hi, density.hi) + 1], [f])
    pts = sorted({b for b in density.breakpoints} | {b for b in f.breakpoints if density.lo < b < density.hi})
    for a, b in zip(pts, pts[1:]):
        u, v = max(a, lo), min(b, hi)
        if u >= v:
            continue
        m = (a + b) / 2
        dp = density.pieces[density._locate(m)]
        if dp.is_zero():
            continue
        fp = f._poly_near(m)
        total += (fp * dp).integrate(u, v)
    return total


def measure_pair(f, mu: Measure) -> Fraction:
    """Exact Stieltjes pairing of a continuous piecewise polynomial with mu."""
    if isinstance(f, (int, Fraction)):
        f = Poly([f])
    total = Fraction(0)
    for loc, mass in mu.atoms:
        if mass != 0 and mu.includes_atom(loc):
            total += mass * (f(loc))
    if any(not p.is_zero() for p in mu.density.pieces):
        if not isinstance(f, (Poly, PiecewisePoly)):
            raise ExactnumError("pairing against a density needs a polynomial integrand")
        total += _pair_density(f, mu.density, mu.lo.value, mu.hi.value)
    return total


# ---------------------------------------------------------------------------
# Interpolation of exactly-evaluable piecewise polynomial functions
# ---------------------------------------------------------------------------


def interpolate_piecewise(func: Callable[[Fraction], Fraction], breaks: Iterable, degree: int,
                          left=None, right=None, checks: int = 2) -> PiecewisePoly:
    """Rebuild a piecewise polynomial from exact point values.

    ``breaks`` must contain every genuine breakpoint; each interval is sampled at
    ``degree + 1`` interior points and the fit is confirmed at ``checks`` more
    points (the endpoints first).  A failed confirmation means a missing
    breakpoint or an understated degree and raises InternalError.
    """
    pts = sorted({as_q(b) for b in breaks})
    pieces = []
    for a, b in zip(pts, pts[1:]):
        n = degree + 1
        xs = [a + (b - a) * Fraction(j + 1, n + 1) for j in range(n)]
        poly = Poly.interpolate([(x, func(x)) for x in xs])
        probes = [a, b] + [a + (b - a) * Fraction(2 * j + 1, 2 * n + 3) for j in range(max(0, checks - 2))]
        for x in probes[:max(checks, 0)]:
            if poly(x) != func(x):
                raise InternalError(f"piecewise fit failed on [{a}, {b}] at {x}")
        pieces.append(poly)
    lft = pieces[0](pts[0]) if left is None else as_q(left)
    rgt = pieces[-1](pts[-1]) if right is None else as_q(right)
    return PiecewisePoly(pts, pieces, lft, rgt).simplify()


# ---------------------------------------------------------------------------
# Bivariate piecewise polynomials with slope-restricted boundaries
# ---------------------------------------------------------------------------

ALLOWED_DIRECTIONS = {(1, 0), (0, 1), (1, 1), (1, -1)}


class Poly2:
    """Bivariate polynomial in (x, t) stored as {(i, j): coeff}."""

    __slots__ = ("terms",)

    def __init__(self, terms: dict | None = None):
        self.terms = {k: as_q(v) for k, v in (terms or {}).items() if as_q(v) != 0}

    @property
    def degree(self) -> int:
        return max((i + j for i, j in self.terms), default=-1)

    def __call__(self, x, t) -> Fraction:
        x, t = as_q(x), as_q(t)
        return sum((c * x ** i * t ** j for (i, j), c in self.terms.items()), Fraction(0))

    def at_x(self, x) -> Poly:
        x = as_q(x)
        deg = max((j for _, j in self.terms), default=0)
        cs = [Fraction(0)] * (deg + 1)
        for (i, j), c in self.terms.items():
            cs[j] += c * x ** i
        return Poly(cs)

    def scale(self, k) -> "Poly2":
        k = as_q(k)
        return Poly2({m: c * k for m, c in self.terms.items()})

    def __eq__(self, other) -> bool:
        return isinstance(other, Poly2) and self.terms == other.terms

    def __repr__(self) -> str:
        return "Poly2(" + " + ".join(f"{c}*x^{i}*t^{j}" for (i, j), c in sorted(self.terms.items())) + ")"

    def to_json(self) -> list[list[str]]:
        """Coefficient grid, rows indexed by the power of x."""
        dx = max((i for i, _ in self.terms), default=0)
        dt = max((j for _, j in self.terms), default=0)
        return [[fmt_q(self.terms.get((i, j), Fraction(0))) for j in range(dt + 1)] for i in range(dx + 1)]


@dataclass(frozen=True)
class Region:
    """Convex polygon {a*x + b*t + c >= 0 for each (a, b, c)} carrying a polynomial."""

    constraints: tuple
    poly: Poly2
    label: str = ""

    def contains(self, x: Fraction, t: Fraction) -> bool:
        return all(a * x + b * t + c >= 0 for a, b, c in self.constraints)


def _normalize_direction(a: Fraction, b: Fraction) -> tuple:
    if a == 0 and b == 0:
        return (0, 0)
    if a == 0:
        return (0, 1)
    if b == 0:
        return (1, 0)
    r = b / a
    if r == 1:
        return (1, 1)
    if r == -1:
        return (1, -1)
    return (None, None)


class Piecewise2D:
    """Piecewise polynomial K(x, t) on [x_lo, x_hi] x [t_lo, t_hi].

    For t > t_hi the value is K(x, t_hi) (the kernel slices used here are
    constant in t there).
    """

    def __init__(self, regions: Sequence[Region], x_range, t_range):
        self.x_lo, self.x_hi = (as_q(v) for v in x_range)
        self.t_lo, self.t_hi = (as_q(v) for v in t_range)
        regs = []
        for r in regions:
            cons = tuple((as_q(a), as_q(b), as_q(c)) for a, b, c in r.constraints)
            for a, b, _ in cons:
                if _normalize_direction(a, b) not in ALLOWED_DIRECTIONS:
                    raise ExactnumError(f"unsupported boundary slope for constraint {a}x + {b}t")
            regs.append(Region(cons, r.poly, r.label))
        self.regions = tuple(regs)

    def lines(self) -> list[tuple]:
        seen = []
        for r in self.regions:
            for a, b, c in r.constraints:
                if (a, b, c) not in seen and (-a, -b, -c) not in seen:
                    seen.append((a, b, c))
        return seen

    def region_at(self, x, t) -> Region:
        x, t = as_q(x), min(as_q(t), self.t_hi)
        for r in self.regions:
            if r.contains(x, t):
                return r
        raise InternalError(f"no region contains ({x}, {t})")

    def __call__(self, x, t) -> Fraction:
        x, t = as_q(x), as_q(t)
        t = max(min(t, self.t_hi), self.t_lo)
        return self.region_at(x, t).poly(x, t)

    def scale(self, k) -> "Piecewise2D":
        return Piecewise2D([Region(r.constraints, r.poly.scale(k), r.label) for r in self.regions],
                           (self.x_lo, self.x_hi), (self.t_lo, self.t_hi))

    @property
    def degree(self) -> int:
        return max(r.poly.degree for r in self.regions)

    def slice_at_x(self, x) -> PiecewisePoly:
        """t -> K(x, t) as an exact PiecewisePoly."""
        x = as_q(x)
        cuts = {self.t_lo, self.t_hi}
        for a, b, c in self.lines():
            if b != 0:
                t = -(a * x + c) / b
                if self.t_lo < t < self.t_hi:
                    cuts.add(t)
        pts = sorted(cuts)
        pieces = [self.region_at(x, (u + v) / 2).poly.at_x(x) for u, v in zip(pts, pts[1:])]
        right = pieces[-1](self.t_hi)
        return PiecewisePoly(pts, pieces, pieces[0](self.t_lo), right)

    def vertices(self) -> list[tuple]:
        """Pairwise intersections of boundary lines (plus domain corners)."""
        ls = self.lines() + [(1, 0, -self.x_lo), (1, 0, -self.x_hi), (0, 1, -self.t_lo), (0, 1, -self.t_hi)]
        out = []
        for i in range(len(ls)):
            for j in range(i + 1, len(ls)):
                a1, b1, c1 = ls[i]
                a2, b2, c2 = ls[j]
                det = a1 * b2 - a2 * b1
                if det == 0:
                    continue
                x = (-c1 * b2 + c2 * b1) / det
                t = (-a1 * c2 + a2 * c1) / det
                out.append((x, t))
        return out

    def to_json(self) -> dict:
        return {
            "x_range": [fmt_q(self.x_lo), fmt_q(self.x_hi)],
            "t_range": [fmt_q(self.t_lo), fmt_q(self.t_hi)],
            "regions": [
                {
                    "label": r.label,
                    "inequalities": [[fmt_q(a), fmt_q(b), fmt_q(c)] for a, b, c in r.constraints],
                    "poly": r.poly.to_json(),
                }
                for r in self.regions
            ],
        }


def slice_pair(K: Piecewise2D, mu: Measure) -> PiecewisePoly:
    """x -> integral of K(x, t) d mu(t), returned as an exact PiecewisePoly on K's x-range."""
    taus = {loc for loc, _ in mu.atoms} | set(mu.density.breakpoints) | {mu.lo.value, mu.hi.value}
    crit = {K.x_lo, K.x_hi}
    for x, _ in K.vertices():
        crit.add(x)
    for a, b, c in K.lines():
        if a != 0 and b != 0:
            for tau in taus:
                crit.add(-(b * tau + c) / a)
    crit = {x for x in crit if K.x_lo <= x <= K.x_hi}
    dens_deg = max((p.degree for p in mu.density.pieces), default=-1)
    # linear integration limits add one degree to the density part
    degree = K.degree + dens_deg + 1 if dens_deg >= 0 else K.degree

    def value(x: Fraction) -> Fraction:
        return measure_pair(K.slice_at_x(x), mu)

    return interpolate_piecewise(value, crit, degree, checks=3)
