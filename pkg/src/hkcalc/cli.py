"""Command-line entry point.

Every command builds a ``Result`` (a JSON-ready dict plus optional CSV rows
and a plain-text rendering); the global flags choose how it is emitted.
Exit codes: 0 success, 1 bad input, 2 internal invariant violation.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import click

from . import __version__
from .compose import (
    ComposeError,
    HFunction,
    LazyHEvaluator,
    binomial_poly,
    compose_diagonal_inf,
    diagonal_p,
    ehk,
    fsig,
    h_a_type,
    h_binomial,
    h_d_type,
    h_e7,
    h_e7_inner,
    h_pure_power,
    oracle_compare,
    quadric_tower,
    threshold,
)
from .exactnum import ExactnumError, InternalError, Piecewise2D, fmt_q, parse_rational
from .fermat import (
    FermatError,
    char2_cubic,
    fermat_phi,
    series_d2,
    series_d3,
    verify_phi_consistency,
    zigzag,
)
from .fforacle import OracleError, h_e_point, parse_poly
from .kernels import (
    KernelError,
    dinf_eval,
    dinf_slice,
    dp_eval,
    in_t0,
    is_attached,
    syzygy_gap,
    theta_dist,
    upright_eventually_attached,
)

USER_ERRORS = (ExactnumError, ComposeError, KernelError, FermatError, OracleError)


@dataclass
class Result:
    data: dict
    rows: list = field(default_factory=list)  # list of dicts with a shared key order
    text: str | None = None


@dataclass
class Options:
    fmt: str = "text"
    out: str | None = None
    cache_dir: str | None = None


# ---------------------------------------------------------------------------
# Parsing and output helpers
# ---------------------------------------------------------------------------


def _q(text: str) -> Fraction:
    try:
        return parse_rational(text)
    except ExactnumError as exc:
        raise click.BadParameter(str(exc)) from None


def _qlist(text: str, n: int | None = None) -> tuple:
    vals = tuple(_q(v) for v in text.split(",") if v.strip())
    if n is not None and len(vals) != n:
        raise click.BadParameter(f"expected {n} comma-separated rationals, got {len(vals)}")
    return vals


def _ilist(text: str) -> list[int]:
    try:
        vals = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise click.BadParameter(f"expected comma-separated integers, got {text!r}") from None
    if not vals:
        raise click.BadParameter("empty list")
    return vals


def _char(text: str) -> int | None:
    if text.lower() in ("inf", "infinity", "oo"):
        return None
    try:
        p = int(text)
    except ValueError:
        raise click.BadParameter("characteristic must be 'inf' or a prime") from None
    if p < 2 or any(p % d == 0 for d in range(2, int(p ** 0.5) + 1)):
        raise click.BadParameter(f"{p} is not prime")
    return p


def _jsonable(v):
    if isinstance(v, Fraction):
        return fmt_q(v)
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def _render_text(data: dict, indent: str = "") -> str:
    lines = []
    for k, v in data.items():
        if isinstance(v, dict):
            lines.append(f"{indent}{k}:")
            lines.append(_render_text(v, indent + "  "))
        elif isinstance(v, list) and v and isinstance(v[0], dict):
            lines.append(f"{indent}{k}:")
            for item in v:
                lines.append(indent + "  - " + ", ".join(f"{a}={b}" for a, b in item.items()))
        elif isinstance(v, list):
            lines.append(f"{indent}{k} = " + ", ".join(str(x) for x in v))
        else:
            lines.append(f"{indent}{k} = {v}")
    return "\n".join(lines)


def _render(res: Result, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(_jsonable(res.data), indent=2, sort_keys=True) + "\n"
    if fmt == "csv":
        rows = res.rows or [res.data]
        rows = [_jsonable(r) for r in rows]
        keys = list(rows[0].keys())
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=keys, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: (json.dumps(v) if isinstance(v, (dict, list)) else v) for k, v in r.items()})
        return buf.getvalue()
    text = res.text if res.text is not None else _render_text(_jsonable(res.data))
    return text.rstrip("\n") + "\n"


def _emit(ctx: click.Context, res: Result) -> None:
    opts: Options = ctx.obj
    out = _render(res, opts.fmt)
    if opts.out:
        Path(opts.out).write_text(out)
    else:
        click.echo(out, nl=False)


def _cached(ctx: click.Context, key: dict, build) -> dict:
    """Memoize a JSON-ready payload on disk when a cache directory is configured."""
    opts: Options = ctx.obj
    if not opts.cache_dir:
        return build()
    digest = hashlib.sha256(json.dumps(key, sort_keys=True).encode()).hexdigest()[:24]
    path = Path(opts.cache_dir) / f"{digest}.json"
    if path.exists():
        return json.loads(path.read_text())
    payload = _jsonable(build())
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, sort_keys=True))
    return payload


def _poly_str(p, var: str = "t") -> str:
    terms = []
    for i, c in enumerate(p.coeffs):
        if c == 0:
            continue
        mono = "" if i == 0 else var if i == 1 else f"{var}^{i}"
        mag = abs(c)
        body = fmt_q(mag) if not mono else mono if mag == 1 else f"{fmt_q(mag)}*{mono}"
        terms.append(("-" if c < 0 else "+", body))
    if not terms:
        return "0"
    out = ("-" if terms[0][0] == "-" else "") + terms[0][1]
    for sign, body in terms[1:]:
        out += f" {sign} {body}"
    return out


def _hfunc_summary(h: HFunction) -> dict:
    fs = fsig(h)
    return {"label": h.label, "e_hk": h.e_hk, "fsig": fs, "threshold": threshold(h),
            "pieces": [{"from": a, "to": b, "poly": _poly_str(p)}
                       for a, b, p in zip(h.h.breakpoints, h.h.breakpoints[1:], h.h.pieces)]}


def _grid(res: int, lo=Fraction(0), hi=Fraction(1)) -> list[Fraction]:
    if res < 1:
        raise click.BadParameter("resolution must be positive")
    return [lo + (hi - lo) * Fraction(k, res) for k in range(res + 1)]


# ---------------------------------------------------------------------------
# Root group
# ---------------------------------------------------------------------------


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.version_option(__version__, prog_name="hkcalc")
@click.option("--json", "as_json", is_flag=True, help="Emit JSON.")
@click.option("--csv", "as_csv", is_flag=True, help="Emit CSV rows.")
@click.option("--out", type=click.Path(dir_okay=False), help="Write output to a file.")
@click.option("--cache-dir", type=click.Path(file_okay=False), envvar="HK_CACHE_DIR",
              help="Directory for on-disk caches (falls back to HK_CACHE_DIR).")
@click.pass_context
def main(ctx, as_json, as_csv, out, cache_dir):
    """Exact h-functions, kernels and Hilbert-Kunz data."""
    if as_json and as_csv:
        raise click.UsageError("--json and --csv are exclusive")
    ctx.obj = Options("json" if as_json else "csv" if as_csv else "text", out, cache_dir)


# ---------------------------------------------------------------------------
# Kernels
# ---------------------------------------------------------------------------


@main.group()
def dp():
    """The char-p kernel D_p."""


@dp.command("eval")
@click.option("--p", "p", type=int, required=True)
@click.option("--point", required=True, help="t1,t2,t3 as rationals")
@click.option("--orbit-cap", type=int, default=10_000, show_default=True)
@click.pass_context
def dp_eval_cmd(ctx, p, point, orbit_cap):
    x = _qlist(point, 3)
    v = dp_eval(p, x, orbit_cap)
    _emit(ctx, Result({"p": p, "point": list(x), "value": v}, text=fmt_q(v)))


@main.group()
def dinf():
    """The limit kernel D_inf."""


@dinf.command("eval")
@click.option("--point", required=True)
@click.pass_context
def dinf_eval_cmd(ctx, point):
    x = _qlist(point, 3)
    v = dinf_eval(*x)
    _emit(ctx, Result({"point": list(x), "value": v}, text=fmt_q(v)))


@dinf.command("slice")
@click.option("--c", "c", required=True, help="level of the fixed coordinate, 0 < c <= 1")
@click.option("--x-max", type=int, default=1, show_default=True)
@click.option("--t-max", type=int, default=1, show_default=True)
@click.pass_context
def dinf_slice_cmd(ctx, c, x_max, t_max):
    K = dinf_slice(_q(c), 3, x_max, t_max)
    data = K.to_json()
    rows = [{"label": r["label"], "inequalities": r["inequalities"], "poly": r["poly"]} for r in data["regions"]]
    _emit(ctx, Result(data, rows, text=json.dumps(data, indent=2, sort_keys=True)))


@main.command()
@click.option("--p", "p", type=int, required=True)
@click.option("--point", required=True)
@click.pass_context
def gap(ctx, p, point):
    """Syzygy gap; its square is D_p - D_inf on T0."""
    x = _qlist(point, 3)
    g = syzygy_gap(p, x)
    data = {"p": p, "point": list(x), "gap": g, "gap_squared": g * g, "theta_dist": theta_dist(x)}
    if all(0 <= v <= 1 for v in x) and in_t0(x):
        data["dp_minus_dinf"] = dp_eval(p, x) - dinf_eval(*x)
    _emit(ctx, Result(data))


@main.command()
@click.option("--p", "p", type=int, required=True)
@click.option("--point", help="t1,t2,t3")
@click.option("--upright", help="a,b: test the upright segment (a, b, *) instead")
@click.pass_context
def attached(ctx, p, point, upright):
    """Is D_p = D_inf at a point, or along an upright segment eventually."""
    if bool(point) == bool(upright):
        raise click.UsageError("give exactly one of --point and --upright")
    if point:
        x = _qlist(point, 3)
        ok = is_attached(p, x)
        _emit(ctx, Result({"p": p, "point": list(x), "attached": ok}, text=str(ok).lower()))
    else:
        a, b = _qlist(upright, 2)
        ok = upright_eventually_attached(p, a, b)
        _emit(ctx, Result({"p": p, "segment": [a, b], "eventually_attached": ok}, text=str(ok).lower()))


@main.command()
@click.option("--p", "p", type=int, required=True)
@click.option("--e", "e", type=int, required=True)
@click.option("--poly", "poly", required=True, help="e.g. x^3+y^3 (variables x,y,z,w or x0,x1,...)")
@click.option("--nvars", type=int, default=None)
@click.option("--t", "ts", multiple=True, help="evaluation points (default: the full 1/q grid)")
@click.pass_context
def oracle(ctx, p, e, poly, nvars, ts):
    """Brute-force h_e(t) = length / q^n over F_p."""
    f = parse_poly(poly, nvars)
    n = nvars or max(len(k) for k in f)
    q = p ** e
    pts = [_q(t) for t in ts] if ts else _grid(q)
    rows = [{"t": t, "h": h_e_point(p, e, n, f, t)} for t in pts]
    _emit(ctx, Result({"p": p, "e": e, "poly": poly, "nvars": n, "values": rows}, rows))


# ---------------------------------------------------------------------------
# Composition
# ---------------------------------------------------------------------------


def _hresult(ctx, h, resolution: int | None, key: dict) -> None:
    if isinstance(h, LazyHEvaluator):
        res = resolution or 12
        rows = [{"t": t, "h": h(t)} for t in _grid(res)]
        _emit(ctx, Result({"label": h.label, "char": h.p, "values": rows}, rows))
        return
    data = _cached(ctx, key, lambda: h.to_json())
    rows = [{"t": t, "h": h(t)} for t in _grid(resolution)] if resolution else \
        [{"from": a, "to": b, "poly": _poly_str(p)} for a, b, p in zip(h.h.breakpoints, h.h.breakpoints[1:], h.h.pieces)]
    text = None
    if ctx.obj.fmt == "text":
        text = _render_text(_jsonable(_hfunc_summary(h)))
    _emit(ctx, Result(data, rows, text))


@main.group()
def compose():
    """h-functions built by composition."""


@compose.command("diagonal")
@click.option("--char", "char", default="inf", show_default=True)
@click.option("--degrees", required=True, help="d1,d2,...")
@click.option("--resolution", type=int, default=None, help="tabulate h on a k/resolution grid")
@click.pass_context
def compose_diagonal_cmd(ctx, char, degrees, resolution):
    ch = _char(char)
    ds = _ilist(degrees)
    h = compose_diagonal_inf(ds) if ch is None else diagonal_p(ch, ds)
    _hresult(ctx, h, resolution, {"cmd": "diagonal", "degrees": ds})


@compose.command("binomial")
@click.option("--a", "a", type=int, required=True)
@click.option("--b", "b", type=int, required=True)
@click.option("--u", "u", type=int, required=True)
@click.option("--v", "v", type=int, required=True)
@click.option("--c", "c", type=int, required=True)
@click.option("--char", "char", default="inf", show_default=True)
@click.option("--resolution", type=int, default=None)
@click.pass_context
def compose_binomial_cmd(ctx, a, b, u, v, c, char, resolution):
    """x^a y^b (x^u + y^v)^c."""
    h = h_binomial(_char(char), a, b, u, v, c)
    _hresult(ctx, h, resolution, {"cmd": "binomial", "abuvc": [a, b, u, v, c]})


def _compose_cases():
    yield "x^2+y^2", compose_diagonal_inf([2, 2]), {(2, 0): 1, (0, 2): 1}, 2
    yield "x^2+y^3", compose_diagonal_inf([2, 3]), {(2, 0): 1, (0, 3): 1}, 2
    yield "x^2+y^2+z^2", quadric_tower(2), {(2, 0, 0): 1, (0, 2, 0): 1, (0, 0, 2): 1}, 3
    yield "x^2+y^2+z^3", h_a_type(3), {(2, 0, 0): 1, (0, 2, 0): 1, (0, 0, 3): 1}, 3
    yield "y^3+yz^3", h_e7_inner(), binomial_poly(1, 0, 2, 3, 1), 2
    yield "x^2+y^3+yz^3", h_e7(), {(2, 0, 0): 1, (0, 3, 0): 1, (0, 1, 3): 1}, 3
    yield "x^2+yz^2+z^4", h_d_type(4), {(2, 0, 0): 1, (0, 1, 2): 1, (0, 0, 4): 1}, 3


@compose.command("verify")
@click.option("--p", "p", type=int, required=True)
@click.option("--e", "e", type=int, required=True)
@click.pass_context
def compose_verify_cmd(ctx, p, e):
    """Limit engine versus the finite-field oracle on standard examples (gap = oracle - engine)."""
    rows = []
    for name, h, f, n in _compose_cases():
        rep = oracle_compare(h, p, e, n, f)
        rows.append({"poly": name, "max_abs_discrepancy": rep.max_abs_discrepancy,
                     "min_gap": rep.min_gap, "max_gap": rep.max_gap})
    _emit(ctx, Result({"p": p, "e": e, "cases": rows}, rows))


# ---------------------------------------------------------------------------
# Fermat
# ---------------------------------------------------------------------------


@main.group()
def fermat():
    """Fermat towers sum x_i^d."""


@fermat.command("series")
@click.option("--d", "d", type=click.Choice(["2", "3"]), required=True)
@click.option("--order", type=int, default=10, show_default=True)
@click.pass_context
def fermat_series_cmd(ctx, d, order):
    if d == "2":
        e, s = series_d2(order)
        z = zigzag(max(order - 1, 0))
        rows = [{"n": n, "ehk": e[n], "fsig": s[n], "zigzag": z[n]} for n in range(order)]
    else:
        c, cp = series_d3(order)
        rows = [{"n": n, "c": c[n], "c_prime": cp[n]} for n in range(order)]
    _emit(ctx, Result({"d": int(d), "order": order, "coefficients": rows}, rows))


@fermat.command("iterate")
@click.option("--d", "d", type=int, required=True)
@click.option("--levels", type=int, default=4, show_default=True)
@click.pass_context
def fermat_iterate_cmd(ctx, d, levels):
    def build():
        return {"d": d, "levels": [
            {"n": n, "e_hk": ehk(fermat_phi(d, n)), "fsig": fsig(fermat_phi(d, n)),
             "h": fermat_phi(d, n).h.to_json()} for n in range(levels)]}

    data = _cached(ctx, {"cmd": "fermat-iterate", "d": d, "levels": levels}, build)
    rows = [{"n": r["n"], "e_hk": r["e_hk"], "fsig": r["fsig"]} for r in data["levels"]]
    text = "\n".join(f"n={r['n']}  e_hk = {_jsonable(r['e_hk'])}  fsig = {_jsonable(r['fsig'])}" for r in rows)
    _emit(ctx, Result(data, rows, text))


@fermat.command("char2-cubic")
@click.option("--order", type=int, default=9, show_default=True)
@click.pass_context
def fermat_char2_cmd(ctx, order):
    """x^3 + y^3 + z^3 over F_2."""
    data = char2_cubic(order)
    rows = [{"i": i, "t": Fraction(1, 2 ** i), "h": data["h"][i], "hks_closed": data["hks_closed"][i]}
            for i in range(order)]
    text = "\n".join([f"h(1/2^{r['i']}) = {fmt_q(r['h'])}" for r in rows]
                     + [f"e_hk = {fmt_q(data['e_hk'])}", f"fsig = {fmt_q(data['fsig'])}"])
    _emit(ctx, Result({"h": {fmt_q(r["t"]): r["h"] for r in rows}, "hks": data["hks"],
                       "hks_closed": data["hks_closed"], "e_hk": data["e_hk"], "fsig": data["fsig"]},
                      rows, text))


@fermat.command("verify")
@click.option("--d", "d", type=click.Choice(["2", "3"]), required=True)
@click.option("--order", type=int, default=6, show_default=True)
@click.pass_context
def fermat_verify_cmd(ctx, d, order):
    rep = verify_phi_consistency(int(d), order)
    _emit(ctx, Result(rep.to_json()))
    if not rep.ok:
        ctx.exit(1)


# ---------------------------------------------------------------------------
# Verification suite and plot dumps
# ---------------------------------------------------------------------------


@main.group()
def verify():
    """Acceptance suite."""


@verify.command("all")
@click.option("--only", default=None, help="comma-separated criterion numbers")
@click.pass_context
def verify_all_cmd(ctx, only):
    """Run the acceptance criteria and print a pass/fail table."""
    from .verify import CRITERIA, run_all

    nums = _ilist(only) if only else None
    if nums and any(n not in CRITERIA for n in nums):
        raise click.BadParameter(f"criteria are numbered 1..{len(CRITERIA)}")
    results = run_all(nums)
    rows = [{"criterion": r.number, "title": r.title, "passed": r.passed} for r in results]
    text = "\n".join(r.line() for r in results)
    npass = sum(r.passed for r in results)
    text += f"\n{npass}/{len(results)} criteria pass"
    _emit(ctx, Result({"criteria": [r.to_json() for r in results], "passed": npass, "total": len(results)},
                      rows, text))
    if npass != len(results):
        ctx.exit(1)


def _named_object(spec: str):
    """pure:N | a:N | diagonal:d1,d2,.. | e7 | e7-inner | d:N | quadric:N | fermat:d,n | slice:c"""
    kind, _, arg = spec.partition(":")
    kind = kind.lower()
    try:
        if kind == "pure":
            return h_pure_power(int(arg))
        if kind == "a":
            return h_a_type(int(arg))
        if kind == "diagonal":
            return compose_diagonal_inf(_ilist(arg))
        if kind == "e7":
            return h_e7()
        if kind == "e7-inner":
            return h_e7_inner()
        if kind == "d":
            return h_d_type(int(arg))
        if kind == "quadric":
            return quadric_tower(int(arg))
        if kind == "fermat":
            d, n = _ilist(arg)
            return fermat_phi(d, n)
        if kind == "slice":
            return dinf_slice(_q(arg))
    except ValueError as exc:
        if isinstance(exc, USER_ERRORS):
            raise
        raise click.BadParameter(f"bad object argument {arg!r}") from None
    raise click.BadParameter(f"unknown object {spec!r}")


def _boundary_polylines(K: Piecewise2D) -> list[list[tuple]]:
    """Each region boundary line clipped to the slice domain, as its two end points."""
    verts = K.vertices()
    out = []
    for a, b, c in K.lines():
        on = sorted({v for v in verts if a * v[0] + b * v[1] + c == 0
                     and K.x_lo <= v[0] <= K.x_hi and K.t_lo <= v[1] <= K.t_hi})
        if len(on) >= 2:
            out.append([on[0], on[-1]])
    return out


def plot_dump(obj, resolution: int) -> list[dict]:
    """Rows t,value on the k/resolution grid plus every breakpoint (or x,t,value for a kernel slice)."""
    if isinstance(obj, Piecewise2D):
        rows = [{"kind": "value", "x": x, "t": t, "value": obj(x, t)}
                for x in _grid(resolution, obj.x_lo, obj.x_hi) for t in _grid(resolution, obj.t_lo, obj.t_hi)]
        for i, line in enumerate(_boundary_polylines(obj)):
            for x, t in line:
                rows.append({"kind": f"boundary{i}", "x": x, "t": t, "value": obj(x, t)})
        return rows
    h = obj.h
    ts = sorted(set(_grid(resolution, h.lo, h.hi)) | set(h.breakpoints))
    return [{"t": t, "value": obj(t)} for t in ts]


@main.group()
def plot():
    """Data dumps for plotting."""


@plot.command("dump")
@click.option("--object", "spec", required=True,
              help="pure:N, a:N, diagonal:d1,d2, e7, e7-inner, d:N, quadric:N, fermat:d,n or slice:c")
@click.option("--resolution", type=int, default=12, show_default=True)
@click.pass_context
def plot_dump_cmd(ctx, spec, resolution):
    obj = _named_object(spec)
    rows = plot_dump(obj, resolution)
    res = Result({"object": spec, "resolution": resolution, "rows": rows}, rows)
    if ctx.obj.fmt == "text":
        res.text = _render(Result({}, rows), "csv")
    _emit(ctx, res)


# ---------------------------------------------------------------------------
# Entry
# ---------------------------------------------------------------------------


def run(argv: list[str] | None = None) -> int:
    """Run the CLI and return an exit code instead of raising SystemExit."""
    try:
        rc = main.main(args=argv, prog_name="hkcalc", standalone_mode=False)
        return rc if isinstance(rc, int) else 0
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.ClickException as exc:
        exc.show()
        return 1
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        return 1
    except USER_ERRORS as exc:
        click.echo(f"error: {exc}", err=True)
        return 1
    except InternalError as exc:
        click.echo(f"internal error: {exc}", err=True)
        return 2
    except Exception as exc:  # noqa: BLE001 - any other failure is a bug
        click.echo(f"internal error: {type(exc).__name__}: {exc}", err=True)
        return 2


def entry() -> None:
    sys.exit(run())


if __name__ == "__main__":
    entry()
