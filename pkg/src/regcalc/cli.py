"""Command-line front end: ``regcalc COMMAND FILE [flags]``.

Exit status is 0 when the job ran and every check passed, 1 when a
hypothesis or check failed, 2 for bad input (unparsable file, unknown
name, point outside the domain).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import re
import sys
from pathlib import Path

from regcalc import extreal, limits
from regcalc.expr import ExprError
from regcalc.fnfile import FnFile, FnFileError, load
from regcalc.lhospital import (
    FAILURES,
    Seq,
    _jsonable,
    common_domain,
    lhospital_limit,
    monotone_certify,
    monotone_grid,
    stolz_limit,
    _window,
)
from regcalc.lsmeasure import (
    ACViolation,
    LSMeasure,
    MeasureError,
    ftc_check,
    integrate,
    lhospital_integral,
    monotone_integral,
)
from regcalc.mvt import MVTError, cauchy_witness, rolle_witness, sandwich_check
from regcalc.regulated import DomainError, Regulated, RegulatedError, end_behavior
from regcalc.stieltjes import (
    DerivativeError,
    DerivativeFn,
    d_alpha,
    d_alpha_symmetric_check,
    product_rule,
    quotient_rule,
)

COMMANDS = ("eval", "limits", "dalpha", "mvt", "lhospital", "monotone", "stolz", "integrate", "ftc", "lsrule")
PLOT_POINTS = 257


class InputError(Exception):
    """Bad command-line input; exit status 2."""


# ---------------------------------------------------------------------------
# argument helpers


def number(text: str) -> float:
    try:
        return extreal.parse(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="regcalc", description="Calculus of regulated functions with respect to an increasing alpha.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def command(name: str, help_text: str, *flags: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("file", help="function-definition file")
        p.add_argument("--json", action="store_true", help="print the full report as JSON")
        p.add_argument("--plot-csv", metavar="PATH", help="write (x, f-, f+, D_alpha f) samples to PATH")
        p.add_argument("--rtol", type=float, default=limits.RTOL, help="relative tolerance for numeric limits")
        p.add_argument("--atol", type=float, default=limits.ATOL, help="absolute tolerance for numeric limits")
        for flag in flags:
            if flag == "f":
                p.add_argument("--f", required=True, help="function name; D(name) is D_alpha name")
            elif flag == "g":
                p.add_argument("--g", required=name in ("lhospital", "monotone", "lsrule"), help="second function name")
            elif flag == "alpha":
                p.add_argument("--alpha", required=name not in ("eval", "limits"), help="integrator name")
            elif flag == "x":
                p.add_argument("--x", type=number, nargs="+", help="query points")
            elif flag == "st":
                p.add_argument("--s", type=number, required=True)
                p.add_argument("--t", type=number, required=True)
            elif flag == "endpoint":
                p.add_argument("--endpoint", default="b", help="a, b, +inf, -inf or the value of a domain end")
        return p

    command("eval", "values and one-sided limits at points", "f", "x", "alpha")
    command("limits", "one-sided limits at points or the limit at a domain end", "f", "x", "endpoint", "alpha")
    p = command("dalpha", "D_alpha f at points", "f", "alpha", "x", "g")
    p.add_argument("--method", choices=("auto", "numeric"), default="auto")
    command("mvt", "Rolle (no --g) or Cauchy witnesses and the sandwich bound on (s, t)", "f", "g", "alpha", "st")
    command("lhospital", "L'Hospital's rule at an endpoint", "f", "g", "alpha", "endpoint")
    p = command("monotone", "L'Hospital's monotone rule; --endpoint is where f and g vanish", "f", "g", "alpha", "endpoint")
    p.add_argument("--shift", action="store_true", help="subtract the end limits of f and g first")
    p.set_defaults(endpoint="a")
    p = sub.add_parser("stolz", help="Stolz-Cesaro through the piecewise-linear construction")
    p.add_argument("file", help="file with seq definitions")
    p.add_argument("--f", required=True, help="sequence name or expression in n")
    p.add_argument("--g", required=True, help="sequence name or expression in n")
    p.add_argument("--probe", type=int, default=10**6, help="direct summation horizon")
    p.add_argument("--json", action="store_true")
    p.add_argument("--plot-csv", metavar="PATH", help="write (n, F_n, G_n, F_n/G_n) on a geometric ladder")
    p.add_argument("--rtol", type=float, default=limits.RTOL)
    p.add_argument("--atol", type=float, default=limits.ATOL)
    command("integrate", "integral of f over (s, t) against d alpha", "f", "alpha", "st")
    command("ftc", "h⁻(t) - h⁺(s) against the integral of D_alpha h", "f", "alpha", "st")
    p = command("lsrule", "L'Hospital rules via integrals (u = --f, v = --g)", "f", "g", "alpha", "endpoint")
    p.add_argument("--monotone", action="store_true", help="the monotone rule for h = ∫(a,x) u / ∫(a,x) v")
    return parser


# ---------------------------------------------------------------------------
# input resolution

_DERIVED = re.compile(r"^D\((\w+)\)$")


def resolve(file: FnFile, name: str | None, alpha: Regulated | None = None) -> Regulated | None:
    if name is None:
        return None
    m = _DERIVED.match(name.replace(" ", ""))
    if m:
        if alpha is None:
            raise InputError(f"{name} needs --alpha")
        return DerivativeFn(resolve(file, m.group(1)), alpha)
    try:
        return file.function(name)
    except KeyError as exc:
        raise InputError(exc.args[0]) from None


def resolve_seq(file: FnFile, text: str) -> Seq:
    if text in file.sequences:
        return file.sequences[text]
    try:
        return Seq.from_expr(text, "s")
    except ExprError as exc:
        known = ", ".join(sorted(file.sequences)) or "none"
        raise InputError(f"{text!r} is neither a sequence in the file (defined: {known}) nor an expression in n: {exc}") from None


def endpoint_side(text: str, *fns: Regulated) -> str:
    a, b = common_domain(*fns)
    if text in ("a", "b"):
        return text
    try:
        v = extreal.parse(text)
    except ValueError:
        raise InputError(f"bad endpoint {text!r}") from None
    if v == b:
        return "b"
    if v == a:
        return "a"
    raise InputError(f"endpoint {text} is not an end of the common domain ({extreal.fmt(a)}, {extreal.fmt(b)})")


def _point(fn: Regulated, x: float) -> None:
    if not fn.a < x < fn.b:
        raise InputError(f"x={extreal.fmt(x)} is outside the domain of {fn.name} ({extreal.fmt(fn.a)}, {extreal.fmt(fn.b)})")


# ---------------------------------------------------------------------------
# commands; each returns (payload, text lines, ok)


def _cell_json(cell) -> dict:
    return {"left": cell.left, "right": cell.right, "n": cell.n, "body": cell.label}


def cmd_eval(args, file):
    f = resolve(file, args.f)
    rows, lines = [], []
    for x in args.x or []:
        _point(f, x)
        pair = f.one_sided(x)
        rows.append({"x": x, "value": f(x), "left": pair.left, "right": pair.right, "cell": _cell_json(f.cell_at(x))})
        lines.append(f"{f.name}({x!r}) = {f(x)!r}   {f.name}⁻ = {pair.left!r}   {f.name}⁺ = {pair.right!r}   cell {f.cell_at(x).label}")
    return {"points": rows}, lines, True


def cmd_limits(args, file):
    f = resolve(file, args.f)
    if args.x:
        rows, lines = [], []
        for x in args.x:
            _point(f, x)
            pair = f.one_sided(x)
            rows.append({"x": x, "left": pair.left, "right": pair.right, "jump": pair.jump})
            lines.append(f"x={x!r}: {f.name}⁻ = {extreal.fmt(pair.left)}, {f.name}⁺ = {extreal.fmt(pair.right)}")
        return {"points": rows}, lines, True
    side = endpoint_side(args.endpoint, f)
    est = end_behavior(f, side, rtol=args.rtol, atol=args.atol)
    end = f.b if side == "b" else f.a
    line = f"limit of {f.name} at {extreal.fmt(end)}: {est.status} {extreal.fmt(est.as_extreal()) if est.exists else ''}".rstrip()
    return {"endpoint": end, "estimate": est.to_json()}, [line], True


def cmd_dalpha(args, file):
    alpha = resolve(file, args.alpha)
    f = resolve(file, args.f, alpha)
    g = resolve(file, args.g, alpha)
    rows, lines, ok = [], [], True
    for x in args.x or []:
        _point(f, x)
        _point(alpha, x)
        row = {"x": x}
        try:
            res = d_alpha(f, alpha, x, method=args.method, rtol=args.rtol, atol=args.atol)
            row["d_alpha"] = res.to_json()
            row["symmetric_agrees"] = d_alpha_symmetric_check(f, alpha, x)
            lines.append(f"D_{alpha.name} {f.name}({x!r}) = {extreal.fmt(res.value)}  [{res.method}]")
        except DerivativeError as exc:
            ok = False
            row["error"] = str(exc)
            lines.append(f"D_{alpha.name} {f.name}({x!r}): {exc}")
        if g is not None and "error" not in row:
            try:
                prod = product_rule(f, g, alpha, x)
                row["product_rule"] = {"values": list(prod.as_tuple()), "ok": prod.ok}
                lines.append(f"  product rule: {prod.as_tuple()} ok={prod.ok}")
                ok = ok and prod.ok
                quot = quotient_rule(f, g, alpha, x)
                row["quotient_rule"] = {"values": list(quot.as_tuple()), "ok": quot.ok}
                lines.append(f"  quotient rule: {quot.as_tuple()} ok={quot.ok}")
                ok = ok and quot.ok
            except DerivativeError as exc:
                row["rule_error"] = str(exc)
                lines.append(f"  rules: {exc}")
                ok = False
        rows.append(row)
    return {"points": rows}, lines, ok


def cmd_mvt(args, file):
    alpha = resolve(file, args.alpha)
    f = resolve(file, args.f, alpha)
    g = resolve(file, args.g, alpha)
    s, t = args.s, args.t
    for fn in (f, alpha) + ((g,) if g is not None else ()):
        if not (fn.a <= s < t <= fn.b) or math.isinf(s) or math.isinf(t):
            raise InputError(f"(s, t) = ({s!r}, {t!r}) must be a finite interval inside the domain of {fn.name}")
    payload, lines = {"s": s, "t": t}, []
    try:
        if g is None:
            w = rolle_witness(f, alpha, s, t)
            payload["rolle"] = w.to_json()
            lines.append(f"Rolle: u={w.u!r} v={w.v!r}  D f(u) D f(v) = {w.product!r}  (grid {w.grid_resolution})")
            return payload, lines, True
        w = cauchy_witness(f, g, alpha, s, t)
        payload["cauchy"] = w.to_json()
        lines.append(f"Cauchy: u={w.u!r} v={w.v!r}  product = {w.product!r}  (grid {w.grid_resolution})")
        sw = sandwich_check(f, g, alpha, s, t)
        payload["sandwich"] = sw.to_json()
        lines.append(f"sandwich: {sw.lo!r} <= {sw.mid!r} <= {sw.hi!r}  ok={sw.ok}")
        if sw.monotone:
            lines.append(f"  monotone ratio: {sw.ratio_s!r} <= {sw.mid!r} <= {sw.ratio_t!r}  ok={sw.ok_monotone}")
        return payload, lines, sw.ok and sw.ok_monotone is not False
    except MVTError as exc:
        payload["error"] = str(exc)
        lines.append(str(exc))
        return payload, lines, False


def _report_lines(rep) -> list[str]:
    lines = [f"{rep.rule}:"]
    for h in rep.hypotheses:
        lines.append(f"  [{h.status}] {h.name}")
    for w in rep.warnings:
        lines.append(f"  warning: {w}")
    conclusion = extreal.fmt(rep.conclusion) if isinstance(rep.conclusion, float) else rep.conclusion
    lines.append(f"  conclusion: {conclusion}")
    oracle = rep.oracle
    if isinstance(oracle, limits.LimitEstimate):
        value = extreal.fmt(oracle.as_extreal()) if oracle.exists else ""
        lines.append(f"  oracle: {oracle.status} {value}".rstrip())
    elif oracle is not None:
        lines.append(f"  oracle: {oracle}")
    lines.append(f"  agree: {rep.agree}")
    return lines


def _rule(rep):
    return rep.to_json(), _report_lines(rep), rep.ok


def cmd_lhospital(args, file):
    alpha = resolve(file, args.alpha)
    f, g = resolve(file, args.f, alpha), resolve(file, args.g, alpha)
    side = endpoint_side(args.endpoint, f, g, alpha)
    return _rule(lhospital_limit(f, g, alpha, side, rtol=args.rtol, atol=args.atol))


def cmd_monotone(args, file):
    alpha = resolve(file, args.alpha)
    f, g = resolve(file, args.f, alpha), resolve(file, args.g, alpha)
    side = endpoint_side(args.endpoint, f, g, alpha)
    return _rule(monotone_certify(f, g, alpha, side, shift=args.shift, rtol=args.rtol, atol=args.atol))


def cmd_stolz(args, file):
    if args.probe < 16:
        raise InputError("--probe must be at least 16")
    fs, gs = resolve_seq(file, args.f), resolve_seq(file, args.g)
    rep = stolz_limit(fs, gs, probe=args.probe, rtol=args.rtol, atol=args.atol)
    return _rule(rep)


def _interval(args, *fns):
    s, t = args.s, args.t
    if math.isinf(s) or math.isinf(t) or not s < t:
        raise InputError("(s, t) must be a finite interval")
    for fn in fns:
        if not fn.a <= s < t <= fn.b:
            raise InputError(f"({s!r}, {t!r}) is not inside the domain of {fn.name}")
    return s, t


def cmd_integrate(args, file):
    alpha = resolve(file, args.alpha)
    f = resolve(file, args.f, alpha)
    s, t = _interval(args, f, alpha)
    value = integrate(f, LSMeasure(alpha), s, t)
    return {"s": s, "t": t, "value": value}, [f"∫_({s!r}, {t!r}) {f.name} d{alpha.name} = {value!r}"], True


def cmd_ftc(args, file):
    alpha = resolve(file, args.alpha)
    h = resolve(file, args.f, alpha)
    s, t = _interval(args, h, alpha)
    try:
        res = ftc_check(h, alpha, s, t)
    except ACViolation as exc:
        return {"s": s, "t": t, "error": str(exc), "x": exc.x}, [str(exc)], False
    line = f"{h.name}⁻(t) - {h.name}⁺(s) = {res.lhs!r}   ∫ D h d{alpha.name} = {res.rhs!r}   residual {res.residual:.3g}"
    return {"s": s, "t": t, **res.to_json()}, [line], res.ok


def cmd_lsrule(args, file):
    alpha = resolve(file, args.alpha)
    u, v = resolve(file, args.f, alpha), resolve(file, args.g, alpha)
    if args.monotone:
        return _rule(monotone_integral(u, v, alpha))
    side = endpoint_side(args.endpoint, u, v, alpha)
    return _rule(lhospital_integral(u, v, alpha, side, rtol=args.rtol, atol=args.atol))


HANDLERS = {
    "eval": cmd_eval,
    "limits": cmd_limits,
    "dalpha": cmd_dalpha,
    "mvt": cmd_mvt,
    "lhospital": cmd_lhospital,
    "monotone": cmd_monotone,
    "stolz": cmd_stolz,
    "integrate": cmd_integrate,
    "ftc": cmd_ftc,
    "lsrule": cmd_lsrule,
}


# ---------------------------------------------------------------------------
# plot samples


def plot_rows(f: Regulated, alpha: Regulated | None, lo: float, hi: float) -> list[list]:
    fns = (f,) if alpha is None else (f, alpha)
    rows = []
    for x in monotone_grid(fns, lo, hi, PLOT_POINTS):
        if not (f.a < x < f.b):
            continue
        try:
            pair = f.one_sided(x)
        except FAILURES:
            continue
        d = ""
        if alpha is not None:
            try:
                d = d_alpha(f, alpha, x).value
            except FAILURES:
                d = ""
        rows.append([x, pair.left, pair.right, d])
    return rows


def write_plot(args, file) -> None:
    path = Path(args.plot_csv)
    with path.open("w", newline="", encoding="utf-8") as fh:
        out = csv.writer(fh)
        if args.command == "stolz":
            fs, gs = resolve_seq(file, args.f), resolve_seq(file, args.g)
            out.writerow(["n", "F_n", "G_n", "ratio"])
            top = min(args.probe, *(s.last for s in (fs, gs) if s.last is not None)) if any(
                s.last is not None for s in (fs, gs)
            ) else args.probe
            F, G = fs.partial_sums(top), gs.partial_sums(top)
            n = 1
            while n <= top:
                out.writerow([n, F[n - 1], G[n - 1], F[n - 1] / G[n - 1]])
                n *= 2
            return
        alpha = resolve(file, getattr(args, "alpha", None))
        f = resolve(file, args.f, alpha)
        if getattr(args, "s", None) is not None:
            lo, hi = args.s, args.t
        else:
            lo, hi = _window(f.a, f.b, 16.0)
        out.writerow(["x", "f_minus", "f_plus", "d_alpha_f"])
        for row in plot_rows(f, alpha, lo, hi):
            out.writerow([extreal.fmt(v) if isinstance(v, float) and math.isinf(v) else v for v in row])


# ---------------------------------------------------------------------------


def _clean(v):
    """NaN has no JSON spelling; report it as null."""
    if isinstance(v, float) and math.isnan(v):
        return None
    if isinstance(v, dict):
        return {k: _clean(x) for k, x in v.items()}
    if isinstance(v, list):
        return [_clean(x) for x in v]
    return v


def run(argv: list[str] | None = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    args = build_parser().parse_args(argv)
    try:
        file = load(args.file)
    except OSError as exc:
        print(f"regcalc: cannot read {args.file}: {exc.strerror}", file=err)
        return 2
    except FnFileError as exc:
        print(f"regcalc: {args.file}: {exc}", file=err)
        return 2
    try:
        payload, lines, ok = HANDLERS[args.command](args, file)
        if args.plot_csv:
            write_plot(args, file)
    except (InputError, DomainError) as exc:
        print(f"regcalc: {exc}", file=err)
        return 2
    except (RegulatedError, DerivativeError, MeasureError, ArithmeticError, ExprError) as exc:
        payload, lines, ok = {"error": str(exc)}, [f"failed: {exc}"], False
    if args.json:
        doc = {"command": args.command, "file": args.file, "ok": bool(ok), "report": payload}
        print(json.dumps(_clean(_jsonable(doc)), sort_keys=True, indent=2, allow_nan=False), file=out)
    else:
        for line in lines:
            print(line, file=out)
    return 0 if ok else 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
