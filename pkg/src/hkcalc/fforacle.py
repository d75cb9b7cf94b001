"""Finite-field ground truth: lengths of monomial-staircase quotients.

All lengths are computed by exact linear algebra.  Multiplication by a
quasi-homogeneous polynomial is block-diagonal with respect to the weighted
degree, so ranks are taken block by block (numpy int64 elimination mod p, or
fraction-free Bareiss over the integers in characteristic 0).
"""

from __future__ import annotations

import itertools
import re
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .exactnum import ExactnumError, InternalError, as_q

# ---------------------------------------------------------------------------
# Sparse multivariate polynomials: {exponent tuple: int coefficient}
# ---------------------------------------------------------------------------

MPoly = dict

_LETTERS = {"x": 0, "y": 1, "z": 2, "w": 3}
_TERM = re.compile(r"^(?:(\d+)\*?)?((?:[a-z]\d*(?:\^\d+)?\*?)*)$")
_FACTOR = re.compile(r"([a-z])(\d*)(?:\^(\d+))?")


class OracleError(ValueError):
    """Bad input to the finite-field oracle."""


def parse_poly(text: str, nvars: int | None = None) -> MPoly:
    """Parse e.g. ``"x0^3+x1^3+x2^3"`` or ``"2*x0*x1 - x1^2"`` (letters x,y,z,w also accepted)."""
    s = text.replace(" ", "")
    if not s:
        raise OracleError("empty polynomial")
    if s[0] not in "+-":
        s = "+" + s
    terms = re.findall(r"[+-][^+-]+", s)
    if "".join(terms) != s:
        raise OracleError(f"cannot parse polynomial {text!r}")
    parsed = []
    width = 0
    for term in terms:
        sign = -1 if term[0] == "-" else 1
        body = term[1:]
        m = _TERM.match(body)
        if not m or (m.group(1) is None and not m.group(2)):
            raise OracleError(f"cannot parse term {term!r}")
        coef = sign * int(m.group(1) or 1)
        exps: dict[int, int] = {}
        for letter, idx, power in _FACTOR.findall(m.group(2)):
            if idx:
                if letter != "x":
                    raise OracleError(f"indexed variables must be x<i>, got {letter}{idx}")
                var = int(idx)
            elif letter in _LETTERS:
                var = _LETTERS[letter]
            else:
                raise OracleError(f"unknown variable {letter!r}")
            exps[var] = exps.get(var, 0) + int(power or 1)
            width = max(width, var + 1)
        parsed.append((exps, coef))
    n = width if nvars is None else nvars
    if n < width:
        raise OracleError(f"polynomial uses {width} variables but only {n} declared")
    out: MPoly = {}
    for exps, coef in parsed:
        key = tuple(exps.get(i, 0) for i in range(n))
        out[key] = out.get(key, 0) + coef
    return {k: v for k, v in out.items() if v != 0}


def poly_to_str(f: MPoly) -> str:
    parts = []
    for exps, c in sorted(f.items(), reverse=True):
        mono = "*".join(f"x{i}" + (f"^{e}" if e > 1 else "") for i, e in enumerate(exps) if e)
        if not mono:
            parts.append(str(c))
        elif c == 1:
            parts.append(mono)
        elif c == -1:
            parts.append("-" + mono)
        else:
            parts.append(f"{c}*{mono}")
    return "+".join(parts).replace("+-", "-") or "0"


def poly_mul(f: MPoly, g: MPoly) -> MPoly:
    out: MPoly = {}
    for a, ca in f.items():
        for b, cb in g.items():
            k = tuple(x + y for x, y in zip(a, b))
            out[k] = out.get(k, 0) + ca * cb
    return {k: v for k, v in out.items() if v != 0}


def poly_embed(f: MPoly, offset: int, total: int) -> MPoly:
    """Place f's variables at positions offset.. in a ring with ``total`` variables."""
    out = {}
    for exps, c in f.items():
        key = [0] * total
        key[offset:offset + len(exps)] = exps
        out[tuple(key)] = c
    return out


def poly_substitute(phi: MPoly, parts: Sequence[MPoly], total: int) -> MPoly:
    """phi(parts[0], parts[1], ...) where parts already live in a ``total``-variable ring."""
    out: MPoly = {}
    one = {tuple([0] * total): 1}
    for exps, c in phi.items():
        term = dict(one)
        for part, e in zip(parts, exps):
            for _ in range(e):
                term = poly_mul(term, part)
        for k, v in term.items():
            out[k] = out.get(k, 0) + c * v
    return {k: v for k, v in out.items() if v != 0}


def addition_poly(s: int) -> MPoly:
    """T_1 + ... + T_s."""
    return {tuple(1 if j == i else 0 for j in range(s)): 1 for i in range(s)}


# ---------------------------------------------------------------------------
# Staircase quotients
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StaircaseQuotient:
    """k[x_1..x_n]/(x_i^{a_i}) over F_p (p prime) or Q (p = 0)."""

    p: int
    bounds: tuple

    def __post_init__(self):
        object.__setattr__(self, "bounds", tuple(int(b) for b in self.bounds))
        if any(b < 0 for b in self.bounds):
            raise OracleError("bounds must be nonnegative")
        if self.p != 0 and not _is_prime(self.p):
            raise OracleError(f"characteristic must be 0 or a prime, got {self.p}")

    @property
    def n_vars(self) -> int:
        return len(self.bounds)

    @property
    def dim(self) -> int:
        return int(np.prod(self.bounds)) if self.bounds else 1

    def basis(self) -> list[tuple]:
        return list(itertools.product(*(range(b) for b in self.bounds)))


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    i = 2
    while i * i <= n:
        if n % i == 0:
            return False
        i += 1
    return True


def _grading(exps: Sequence[tuple]) -> tuple | None:
    """Positive integer weights making all monomials of f the same weighted degree."""
    n = len(exps[0])
    rows = [[Fraction(a - b) for a, b in zip(e, exps[0])] for e in exps[1:]]
    # reduced row echelon form
    pivots = []
    r = 0
    for c in range(n):
        piv = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = 1 / rows[r][c]
        rows[r] = [v * inv for v in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                k = rows[i][c]
                rows[i] = [a - k * b for a, b in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for fc in free:
        v = [Fraction(0)] * n
        v[fc] = Fraction(1)
        for i, pc in enumerate(pivots):
            v[pc] = -rows[i][fc]
        basis.append(v)
    if not basis:
        return None
    for combo in itertools.product(range(1, 4), *[range(-3, 4)] * (len(basis) - 1)):
        w = [sum(k * b[i] for k, b in zip(combo, basis)) for i in range(n)]
        if all(x > 0 for x in w):
            den = np.lcm.reduce([int(x.denominator) for x in w])
            ints = [int(x * den) for x in w]
            g = np.gcd.reduce(ints)
            return tuple(i // g for i in ints)
        if all(x < 0 for x in w):
            w = [-x for x in w]
            den = np.lcm.reduce([int(x.denominator) for x in w])
            ints = [int(x * den) for x in w]
            g = np.gcd.reduce(ints)
            return tuple(i // g for i in ints)
    return None


def _dense(f: MPoly, bounds: tuple, p: int) -> np.ndarray:
    dtype = object if p == 0 else np.int64
    arr = np.zeros(bounds, dtype=dtype)
    if p == 0:
        arr[...] = 0
    for exps, c in f.items():
        if all(e < b for e, b in zip(exps, bounds)):
            arr[exps] = (arr[exps] + c) if p == 0 else (int(arr[exps]) + c) % p
    return arr


def _mul_sparse(g: np.ndarray, f: MPoly, p: int) -> np.ndarray:
    """Truncated product of dense g with sparse f."""
    out = np.zeros_like(g)
    if p == 0:
        out[...] = 0
    shape = g.shape
    for exps, c in f.items():
        if any(e >= b for e, b in zip(exps, shape)):
            continue
        src = tuple(slice(0, b - e) for e, b in zip(exps, shape))
        dst = tuple(slice(e, b) for e, b in zip(exps, shape))
        out[dst] = out[dst] + c * g[src]
    if p:
        out %= p
    return out


def rank_mod_p(M: np.ndarray, p: int) -> int:
    """Rank of an integer matrix over F_p by Gaussian elimination."""
    A = np.array(M, dtype=np.int64) % p
    rows, cols = A.shape
    rank = 0
    for c in range(cols):
        if rank == rows:
            break
        nz = np.nonzero(A[rank:, c])[0]
        if nz.size == 0:
            continue
        piv = rank + nz[0]
        if piv != rank:
            A[[rank, piv]] = A[[piv, rank]]
        inv = pow(int(A[rank, c]), -1, p)
        A[rank] = (A[rank] * inv) % p
        below = A[rank + 1:, c]
        mask = below != 0
        if mask.any():
            idx = np.nonzero(mask)[0] + rank + 1
            A[idx] = (A[idx] - np.outer(A[idx, c], A[rank])) % p
        rank += 1
    return rank


def rank_exact(M) -> int:
    """Rank over Q via fraction-free (Bareiss) elimination on Python ints."""
    A = [[int(v) for v in row] for row in M]
    if not A:
        return 0
    rows, cols = len(A), len(A[0])
    rank = 0
    prev = 1
    for c in range(cols):
        piv = next((i for i in range(rank, rows) if A[i][c] != 0), None)
        if piv is None:
            continue
        A[rank], A[piv] = A[piv], A[rank]
        for i in range(rank + 1, rows):
            for j in range(c + 1, cols):
                A[i][j] = (A[rank][c] * A[i][j] - A[i][c] * A[rank][j]) // prev
            A[i][c] = 0
        prev = A[rank][c]
        rank += 1
        if rank == rows:
            break
    return rank


def _block_rank(g: np.ndarray, bounds: tuple, p: int, weights: tuple | None) -> int:
    """Rank of multiplication by dense g on the staircase quotient."""
    nz = np.argwhere(g != 0) if p else np.argwhere(np.vectorize(lambda v: v != 0, otypes=[bool])(g))
    if nz.size == 0:
        return 0
    basis = np.array(list(itertools.product(*(range(b) for b in bounds))), dtype=np.int64)
    flat_g = g.reshape(-1)
    bvec = np.array(bounds, dtype=np.int64)
    if weights is not None:
        w = np.array(weights, dtype=np.int64)
        gdeg = int(nz[0] @ w)
        deg = basis @ w
        groups = {}
        for i, d in enumerate(deg.tolist()):
            groups.setdefault(d, []).append(i)
        pairs = [(groups[d], groups.get(d + gdeg, [])) for d in sorted(groups)]
    else:
        pairs = [(list(range(len(basis))), list(range(len(basis))))]
    total = 0
    for src_idx, dst_idx in pairs:
        if not src_idx or not dst_idx:
            continue
        S = basis[src_idx]
        T = basis[dst_idx]
        diff = T[:, None, :] - S[None, :, :]
        valid = (diff >= 0).all(axis=-1)
        lin = np.ravel_multi_index(tuple(np.clip(diff, 0, bvec - 1).transpose(2, 0, 1)), bounds)
        vals = flat_g[lin]
        if p:
            M = np.where(valid, vals, 0)
            total += rank_mod_p(M, p)
        else:
            M = [[vals[i, j] if valid[i, j] else 0 for j in range(len(src_idx))] for i in range(len(dst_idx))]
            total += rank_exact(M)
    return total


class _PowerCache:
    """Truncated powers f^r on a staircase quotient, built incrementally."""

    def __init__(self, q: StaircaseQuotient, f: MPoly):
        self.q = q
        self.f = f
        one = {tuple([0] * q.n_vars): 1}
        self.powers = [_dense(one, q.bounds, q.p)]
        self.zero_at = None

    def get(self, r: int) -> np.ndarray:
        while len(self.powers) <= r:
            nxt = _mul_sparse(self.powers[-1], self.f, self.q.p)
            self.powers.append(nxt)
        return self.powers[r]


def _check_poly(q: StaircaseQuotient, f: MPoly) -> None:
    if not f:
        raise OracleError("f must be a nonzero polynomial")
    if any(len(e) != q.n_vars for e in f):
        raise OracleError("polynomial variable count does not match the quotient")
    zero = tuple([0] * q.n_vars)
    if f.get(zero, 0) % (q.p or 1 << 200) != 0 and f.get(zero, 0) != 0:
        raise OracleError("f has a nonzero constant term (it is a unit)")


def _weights_for(q: StaircaseQuotient, f: MPoly):
    live = [e for e, c in f.items() if (c % q.p if q.p else c) != 0]
    if not live:
        return None
    return _grading(live) if len(live) > 1 else tuple([1] * q.n_vars)


def _length_from_power(q: StaircaseQuotient, g: np.ndarray, weights) -> int:
    return q.dim - _block_rank(g, q.bounds, q.p, weights)


def quotient_length(q: StaircaseQuotient, f: MPoly | str, r: int) -> int:
    """dim_k of k[x]/((x_i^{a_i}), f^r)."""
    if isinstance(f, str):
        f = parse_poly(f, q.n_vars)
    _check_poly(q, f)
    if r < 0:
        raise OracleError("r must be nonnegative")
    if r == 0 or q.dim == 0:
        return 0
    cache = _PowerCache(q, f)
    return _length_from_power(q, cache.get(r), _weights_for(q, f))


@dataclass(frozen=True)
class JordanProfile:
    """Multiplicities e(i) of Jordan blocks of size i, plus the length sequence l(0..)."""

    multiplicities: dict
    lengths: tuple

    @property
    def dimension(self) -> int:
        return sum(i * m for i, m in self.multiplicities.items())

    def to_json(self) -> dict:
        return {"multiplicities": {str(i): m for i, m in sorted(self.multiplicities.items())},
                "lengths": list(self.lengths)}


def length_sequence(q: StaircaseQuotient, f: MPoly | str) -> list[int]:
    """l(0), l(1), ... up to and including the first index where f^i vanishes."""
    if isinstance(f, str):
        f = parse_poly(f, q.n_vars)
    _check_poly(q, f)
    cache = _PowerCache(q, f)
    weights = _weights_for(q, f)
    seq = [0]
    i = 1
    while True:
        g = cache.get(i)
        if not g.any():
            seq.append(q.dim)
            return seq
        seq.append(_length_from_power(q, g, weights))
        i += 1
        if i > q.dim + 1:
            raise InternalError("multiplication operator is not nilpotent")


def jordan_profile(q: StaircaseQuotient, f: MPoly | str) -> JordanProfile:
    seq = length_sequence(q, f)
    ext = seq + [seq[-1]]
    mult = {}
    for i in range(1, len(seq)):
        e = 2 * ext[i] - ext[i + 1] - ext[i - 1]
        if e < 0:
            raise InternalError("negative Jordan multiplicity")
        if e:
            mult[i] = e
    return JordanProfile(mult, tuple(seq))


def h_e_point(p: int, e: int, nvars: int, f: MPoly | str, t) -> Fraction:
    """l(F_p[x]/(x_i^q, f^{tq}))/q^n with q = p^e; equals h(t) exactly when tq is an integer."""
    t = as_q(t)
    q = p ** e
    if (t * q).denominator != 1:
        raise OracleError(f"t*q = {t * q} is not an integer; raise e")
    if t <= 0:
        return Fraction(0)
    sq = StaircaseQuotient(p, (q,) * nvars)
    return Fraction(quotient_length(sq, f, int(t * q)), q ** nvars)


def h_e_points(p: int, e: int, nvars: int, f: MPoly | str, ts: Iterable) -> dict:
    """Batch version of h_e_point sharing the power cache."""
    q = p ** e
    sq = StaircaseQuotient(p, (q,) * nvars)
    if isinstance(f, str):
        f = parse_poly(f, nvars)
    _check_poly(sq, f)
    cache = _PowerCache(sq, f)
    weights = _weights_for(sq, f)
    out = {}
    for t in ts:
        t = as_q(t)
        if (t * q).denominator != 1:
            raise OracleError(f"t*q = {t * q} is not an integer; raise e")
        r = int(t * q)
        if r <= 0:
            out[t] = Fraction(0)
            continue
        out[t] = Fraction(_length_from_power(sq, cache.get(r), weights), q ** nvars)
    return out


def f_threshold_at_q(q: StaircaseQuotient, f: MPoly | str, qval: int | None = None) -> Fraction:
    """min{i : f^i in (x_i^{a_i})} / q."""
    if qval is None:
        if len(set(q.bounds)) != 1:
            raise OracleError("non-uniform bounds: pass q explicitly")
        qval = q.bounds[0]
    if isinstance(f, str):
        f = parse_poly(f, q.n_vars)
    _check_poly(q, f)
    cache = _PowerCache(q, f)
    for i in range(1, q.dim + 2):
        if not cache.get(i).any():
            return Fraction(i, qval)
    raise InternalError("f is not nilpotent on the quotient")


# ---------------------------------------------------------------------------
# Kernel values at integer points and corner data
# ---------------------------------------------------------------------------

_cache_lock = threading.Lock()


@lru_cache(maxsize=None)
def _d_integer_cached(char: int, t: tuple, r: int) -> int:
    q = StaircaseQuotient(char, t)
    return quotient_length(q, addition_poly(len(t)), r)


def d_integer(char: int, t: Sequence[int], r: int) -> int:
    """l(k[T_1..T_s]/(T_i^{t_i}, (T_1+...+T_s)^r)) over F_char (char 0 means Q)."""
    t = tuple(int(v) for v in t)
    r = int(r)
    if any(v < 0 for v in t) or r < 0:
        raise OracleError("d_integer needs nonnegative arguments")
    if r == 0 or any(v == 0 for v in t):
        return 0
    return _d_integer_cached(int(char), t, r)


@dataclass(frozen=True)
class HanData:
    """D(t + eps) = l * m(eps) + phi(eps) with m = prod eps (Sigma t even) or (1 - eps_1) prod_{i>1} eps_i (odd)."""

    t: tuple
    l: int
    phi: dict = field(compare=False)  # {subset mask tuple: coefficient}

    @property
    def odd(self) -> bool:
        return sum(self.t) % 2 == 1

    def phi_eval(self, r: Sequence) -> Fraction:
        total = Fraction(0)
        for mask, c in self.phi.items():
            term = Fraction(c)
            for bit, ri in zip(mask, r):
                if bit:
                    term *= ri
            total += term
        return total

    def to_json(self) -> dict:
        return {"t": list(self.t), "l": self.l,
                "phi": {"".join(map(str, m)): c for m, c in sorted(self.phi.items()) if c}}


@lru_cache(maxsize=None)
def _han_cached(char: int, t: tuple) -> HanData:
    n = len(t)
    vals = {}
    for eps in itertools.product((0, 1), repeat=n):
        pt = [a + b for a, b in zip(t, eps)]
        vals[eps] = d_integer(char, pt[:-1], pt[-1])
    coeffs = {}
    for mask in itertools.product((0, 1), repeat=n):
        c = 0
        for sub in itertools.product(*[(0, 1) if b else (0,) for b in mask]):
            c += (-1) ** (sum(mask) - sum(sub)) * vals[sub]
        coeffs[mask] = c
    top = tuple([1] * n)
    odd = sum(t) % 2 == 1
    if odd:
        l = -coeffs[top]
        rest = dict(coeffs)
        del rest[top]
        key = tuple([0] + [1] * (n - 1))
        rest[key] = rest.get(key, 0) - l
    else:
        l = coeffs[top]
        rest = dict(coeffs)
        del rest[top]
    data = HanData(t, l, rest)
    # confirm the interpolation reproduces every corner value
    for eps, v in vals.items():
        m = (1 - eps[0]) if odd else eps[0]
        for e in eps[1:]:
            m *= e
        if data.l * m + data.phi_eval(eps) != v:
            raise InternalError(f"corner interpolation inconsistent at t={t}")
    return data


def han_data(char: int, t: Sequence[int]) -> HanData:
    t = tuple(int(v) for v in t)
    if any(v < 0 for v in t):
        raise OracleError("han_data needs t >= 0")
    return _han_cached(int(char), t)


def bphi_coeff(char: int, t: Sequence[int], r: int) -> int:
    """B(t, r) = 2D(t, r) - D(t, r+1) - D(t, r-1) for the addition kernel."""
    if r < 1:
        raise OracleError("r must be >= 1")
    return 2 * d_integer(char, t, r) - d_integer(char, t, r + 1) - d_integer(char, t, r - 1)


def kernel_length(char: int, t: Sequence[int], phi: MPoly, r: int) -> int:
    """l(k[T]/(T_i^{t_i}, phi^r)) for an arbitrary phi."""
    t = tuple(int(v) for v in t)
    if r == 0 or any(v == 0 for v in t):
        return 0
    return quotient_length(StaircaseQuotient(char, t), phi, r)


def discrete_multilinear_sides(p: int, e: int, factors: Sequence[tuple], phi: MPoly | None = None,
                               rs: Iterable[int] | None = None) -> dict:
    """Both sides of the discrete multilinear formula for each r.

    ``factors`` is a list of (nvars_i, f_i) in disjoint variable sets; the
    combined polynomial is phi(f_1, ..., f_s).
    """
    q = p ** e
    s = len(factors)
    phi = addition_poly(s) if phi is None else phi
    parsed = []
    for nv, f in factors:
        parsed.append((nv, parse_poly(f, nv) if isinstance(f, str) else f))
    total = sum(nv for nv, _ in parsed)
    embedded = []
    off = 0
    jordan = []
    for nv, f in parsed:
        embedded.append(poly_embed(f, off, total))
        off += nv
        prof = jordan_profile(StaircaseQuotient(p, (q,) * nv), f)
        jordan.append(prof.multiplicities)
    combined = poly_substitute(phi, embedded, total)
    big = StaircaseQuotient(p, (q,) * total)
    rs = range(0, 2 * q + 1) if rs is None else rs
    out = {}
    for r in rs:
        lhs = quotient_length(big, combined, r) if r > 0 else 0
        rhs = 0
        for combo in itertools.product(*[sorted(m.items()) for m in jordan]):
            sizes = tuple(i for i, _ in combo)
            weight = 1
            for _, m in combo:
                weight *= m
            rhs += weight * kernel_length(p, sizes, phi, r)
        out[r] = (lhs, rhs)
    return out


def discrete_multilinear_check(p: int, e: int, factors: Sequence[tuple], phi: MPoly | None = None,
                               rs: Iterable[int] | None = None) -> bool:
    return all(a == b for a, b in discrete_multilinear_sides(p, e, factors, phi, rs).values())
