"""Lebesgue-Stieltjes measures of piecewise-smooth increasing functions.

A base function alpha induces the measure d alpha((s, t)) = alpha⁻(t) - alpha⁺(s).
With piecewise C¹ cells this splits into a density alpha' on every cell and
an atom of mass alpha⁺(x) - alpha⁻(x) at every jump.  Integrals are summed
cell by cell (adaptive quadrature) plus atom by atom.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate as _quad
from scipy import optimize as _opt
from scipy.integrate import IntegrationWarning

from regcalc import extreal, limits
from regcalc.lhospital import (
    AGREE_RTOL,
    FAILED,
    FAILURES,
    VERIFIED,
    RuleReport,
    _trend,
    _violations,
    _window,
    common_domain,
    endpoint_sequence,
    limits_agree,
    monotone_grid,
)
from regcalc.regulated import EVAL_ERRORS, KNOT_CAP, DomainError, Regulated, cell_limit
from regcalc.stieltjes import DerivativeFn, d_alpha, jumps

QUAD_EPSABS = 1e-10
QUAD_LIMIT = 2**15
CELL_CAP = 2**17  # cells integrated along one endpoint sequence
FTC_RTOL = 1e-6


class MeasureError(ArithmeticError):
    pass


class DensityUndefined(MeasureError):
    pass


class QuadratureFailed(MeasureError):
    def __init__(self, cell: int, left: float, right: float, abserr: float):
        super().__init__(f"quadrature did not converge on cell {cell} ({left!r}, {right!r}), error {abserr:.3g}")
        self.cell, self.left, self.right, self.abserr = cell, left, right, abserr


class ACViolation(MeasureError):
    """dh has an atom where d alpha has none."""

    def __init__(self, x: float, jump: float):
        super().__init__(f"AC violation at x={x!r}: h jumps by {jump!r} where alpha is continuous")
        self.x, self.jump = x, jump


class IntervalError(DomainError):
    """(s, t) not inside the closed domain, or not finite."""

    def __init__(self, message: str, s: float, t: float):
        ValueError.__init__(self, message)
        self.x = s if not math.isfinite(t) else t
        self.s, self.t = s, t


@dataclass(frozen=True)
class Atom:
    x: float
    mass: float


class LSMeasure:
    """d base on (base.a, base.b): cell densities base' and atoms at its jumps."""

    def __init__(self, base: Regulated):
        self.base = base
        self.a, self.b = base.a, base.b

    def atoms(self, s: float, t: float) -> list[Atom]:
        out = []
        for q in self.base.knots(s, t, KNOT_CAP):
            if s < q < t:
                p = self.base.one_sided(q)
                if jumps(p.left, p.right):
                    out.append(Atom(q, p.jump))
        return out

    def atom_mass(self, x: float) -> float:
        if not self.base.is_knot(x):
            return 0.0
        p = self.base.one_sided(x)
        return p.jump if jumps(p.left, p.right) else 0.0

    def density_fn(self, left: float) -> Callable[[float], float]:
        """base' on the cell starting at ``left``."""
        cell = self.base.cell_after(left)
        if cell.dfn is None:
            raise DensityUndefined(f"{self.base.name} has no derivative on the cell at {left!r}")
        return cell.dfn

    def density(self, x: float) -> float:
        dfn = self.base.cell_at(x).dfn
        if dfn is None:
            raise DensityUndefined(f"{self.base.name} has no derivative at {x!r}")
        return float(dfn(x))

    def check(self, s: float, t: float, samples: int = 64) -> tuple[bool, float, float]:
        """Nonnegative atoms and sampled densities, and the two measures of (s, t).

        Returns (ok, measure from one-sided limits, measure from densities + atoms).
        """
        ok = all(atom.mass >= 0 for atom in self.atoms(s, t))
        for x in np.linspace(s, t, samples + 2)[1:-1]:
            ok = ok and self.density(float(x)) >= -1e-12
        direct = measure_interval(self, s, t)
        summed = integrate(_ONE, self, s, t)
        return ok and limits.close(direct, summed, 1e-8, 1e-10), direct, summed


class _One(Regulated):
    def __init__(self):
        self.a, self.b, self.name = -math.inf, math.inf, "1"

    def value(self, x):
        return 1.0

    def cell_at(self, x):
        from regcalc.regulated import Cell

        return Cell(-math.inf, math.inf, lambda y: 1.0, lambda y: 0.0)

    cell_after = cell_at

    def knots(self, s, t, cap=KNOT_CAP):
        return []


_ONE = _One()


def _check_interval(m: LSMeasure, s: float, t: float) -> None:
    if not (m.a <= s < t <= m.b):
        raise IntervalError(f"({s!r}, {t!r}) is not inside ({m.a!r}, {m.b!r})", s, t)


def left_value(h: Regulated, t: float) -> float:
    """h⁻(t), also at a finite right end of the domain."""
    if t < h.b:
        return h.left_limit(t)
    return cell_limit(h.cell_at(t), t, -1, h.name)


def right_value(h: Regulated, s: float) -> float:
    """h⁺(s), also at a finite left end of the domain."""
    if s > h.a:
        return h.right_limit(s)
    return cell_limit(h.cell_after(s), s, 1, h.name)


def measure_interval(m: LSMeasure, s: float, t: float) -> float:
    """base⁻(t) - base⁺(s); s and t may be finite ends of the domain."""
    _check_interval(m, s, t)
    if math.isinf(s) or math.isinf(t):
        raise IntervalError("measure_interval needs finite s and t", s, t)
    return left_value(m.base, t) - right_value(m.base, s)


def _partition(f: Regulated, m: LSMeasure, s: float, t: float) -> list[float]:
    knots = set(f.knots(s, t, KNOT_CAP)) | set(m.base.knots(s, t, KNOT_CAP))
    return [s] + sorted(q for q in knots if s < q < t) + [t]


def _cell_integral(fn, dens, left: float, right: float, cell: int) -> float:
    def integrand(x: float) -> float:
        return float(fn(x)) * float(dens(x))

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", IntegrationWarning)
        try:
            val, err = _quad.quad(integrand, left, right, epsabs=QUAD_EPSABS, epsrel=QUAD_EPSABS, limit=QUAD_LIMIT)
        except EVAL_ERRORS as exc:
            raise QuadratureFailed(cell, left, right, math.inf) from exc
    if not math.isfinite(val) or (caught and err > max(1e-7 * abs(val), 1e-8)):
        raise QuadratureFailed(cell, left, right, err)
    return val


def open_integral(
    f: Regulated,
    m: LSMeasure,
    s: float,
    t: float,
    *,
    atom_value: Callable[[float], float] | None = None,
    partition: list[float] | None = None,
) -> float:
    """∫_(s,t) f dm: quadrature of f·density on every cell plus f at each interior atom times its mass.

    ``partition`` may pass in precomputed cell boundaries (s, ..., t) that
    include every breakpoint of f and of the base.
    """
    _check_interval(m, s, t)
    if math.isinf(s) or math.isinf(t):
        raise IntervalError("integrate needs finite s and t", s, t)
    pts = partition or _partition(f, m, s, t)
    parts = []
    for i in range(len(pts) - 1):
        left, right = pts[i], pts[i + 1]
        fn = f.cell_after(left).fn
        parts.append(_cell_integral(fn, m.density_fn(left), left, right, i))
        if i + 1 < len(pts) - 1:
            mass = m.atom_mass(right)
            if mass:
                v = atom_value(right) if atom_value is not None else f(right)
                parts.append(extreal.mul(v, mass))
    return math.fsum(parts)


def integrate(f, m: LSMeasure, s: float, t: float, *, atom_value=None) -> float:
    """∫_(s,t) f dm; at atoms the integrand is f(x) unless ``atom_value`` is given."""
    return open_integral(f, m, s, t, atom_value=atom_value)


def atom_term(f: Regulated, m: LSMeasure, x: float, atom_value=None) -> float:
    mass = m.atom_mass(x)
    if not mass:
        return 0.0
    return extreal.mul(atom_value(x) if atom_value is not None else f(x), mass)


@dataclass(frozen=True)
class FTCResult:
    lhs: float
    rhs: float
    residual: float
    ok: bool

    def as_tuple(self) -> tuple[float, float, float]:
        return self.lhs, self.rhs, self.residual

    def to_json(self) -> dict:
        return {"lhs": self.lhs, "rhs": self.rhs, "residual": self.residual, "ok": self.ok}


def ac_violations(h: Regulated, alpha: Regulated, s: float, t: float) -> list[tuple[float, float]]:
    """Jumps of h inside (s, t) at points where alpha is continuous."""
    out = []
    for q in h.knots(s, t, KNOT_CAP):
        if not s < q < t:
            continue
        ph = h.one_sided(q)
        if jumps(ph.left, ph.right):
            pa = alpha.one_sided(q)
            if not jumps(pa.left, pa.right):
                out.append((q, ph.jump))
    return out


def ftc_check(h: Regulated, alpha: Regulated, s: float, t: float, *, rtol: float = FTC_RTOL) -> FTCResult:
    """h⁻(t) - h⁺(s) against ∫_(s,t) D_alpha h d alpha, atoms valued by the jump ratio."""
    bad = ac_violations(h, alpha, s, t)
    if bad:
        raise ACViolation(*bad[0])
    m = LSMeasure(alpha)
    lhs = left_value(h, t) - right_value(h, s)
    rhs = integrate(DerivativeFn(h, alpha), m, s, t, atom_value=lambda x: d_alpha(h, alpha, x).value)
    residual = abs(lhs - rhs)
    return FTCResult(lhs, rhs, residual, residual <= rtol * (1.0 + abs(lhs)))


@dataclass(frozen=True)
class BoundCheck:
    M: float
    worst: float  # max over pairs of |f⁻(y) - f⁺(x)| - M (alpha⁻(y) - alpha⁺(x))
    pairs: int
    ok: bool


def bound_check(f: Regulated, alpha: Regulated, s: float, t: float, *, resolution: int = 128, tol: float = 1e-9) -> BoundCheck:
    """|f⁻(y) - f⁺(x)| <= M (alpha⁻(y) - alpha⁺(x)) for grid x < y.

    M is sup |D_alpha f| over (s, t): the grid max together with the one-sided
    limits of D_alpha f at breakpoints and at s⁺, t⁻, where a sup that is only
    approached would otherwise be missed.
    """
    pts = monotone_grid((f, alpha), s, t, resolution)
    pts = [x for x in pts if s < x < t] or [(s + t) / 2]
    D = DerivativeFn(f, alpha)
    vals = [abs(d_alpha(f, alpha, x).value) for x in pts]
    cands = list(vals)
    # an interior max falls between grid points; polish the best few
    for i in np.argsort(vals)[-3:]:
        lo, hi = pts[max(i - 1, 0)], pts[min(i + 1, len(pts) - 1)]
        if hi > lo:
            try:
                opt = _opt.minimize_scalar(lambda y: -abs(D(y)), bounds=(lo, hi), method="bounded", options={"xatol": 1e-13})
                cands.append(-float(opt.fun))
            except EVAL_ERRORS:
                pass
    try:
        for q in D.knots(s, t, KNOT_CAP):
            if s < q < t:
                cands.extend(abs(v) for v in D.one_sided(q))
        cands += [abs(right_value(D, s)), abs(left_value(D, t))]
    except EVAL_ERRORS:
        pass  # an unbounded end: the grid max is still a valid test of the grid pairs
    M = max(c for c in cands if not math.isnan(c))
    fl = np.array([f.left_limit(x) for x in pts])
    fr = np.array([f.right_limit(x) for x in pts])
    al = np.array([alpha.left_limit(x) for x in pts])
    ar = np.array([alpha.right_limit(x) for x in pts])
    i, j = np.triu_indices(len(pts), k=1)
    lhs = np.abs(fl[j] - fr[i])
    rhs = (M + tol) * (al[j] - ar[i])
    slack = lhs - rhs
    worst = float(slack.max()) if len(slack) else -math.inf
    scale = tol * np.maximum(1.0, np.abs(lhs))
    return BoundCheck(M, worst, len(slack), bool(np.all(slack <= scale)))


# ---------------------------------------------------------------------------
# L'Hospital rules via integrals


def _chunks(fns, m: LSMeasure, seq, kmax: int, end_is_b: bool, atom_values=None):
    """Per function, the integral over the stretch between x_k and x_{k+1} plus the atom at x_{k+1}.

    Stops early once CELL_CAP cells have been integrated or the points stop
    being usable.
    """
    atom_values = atom_values or [None] * len(fns)
    xs = [seq(0)]
    out: list[list[float]] = [[] for _ in fns]
    cells = 0
    for k in range(kmax):
        x0, x1 = xs[-1], seq(k + 1)
        lo, hi = (x0, x1) if end_is_b else (x1, x0)
        if not lo < hi:
            break
        try:
            knots: set[float] = set(m.base.knots(lo, hi, KNOT_CAP))
            for f in fns:
                knots.update(f.knots(lo, hi, KNOT_CAP))
            pts = [lo] + sorted(q for q in knots if lo < q < hi) + [hi]
            size = len(pts) - 1
            if cells + size > CELL_CAP:
                break
            row = []
            for f, av in zip(fns, atom_values):
                row.append(open_integral(f, m, lo, hi, atom_value=av, partition=pts) + atom_term(f, m, x1, av))
        except FAILURES + (MeasureError,):
            break
        cells += size
        for col, v in zip(out, row):
            col.append(v)
        xs.append(x1)
    return xs, out


def lhospital_integral(
    u: Regulated,
    v: Regulated,
    alpha: Regulated,
    endpoint: str = "b",
    *,
    kmax: int = 40,
    resolution: int = 256,
    agree_rtol: float = AGREE_RTOL,
    rtol: float = limits.RTOL,
    atol: float = limits.ATOL,
    atom_values=None,
) -> RuleReport:
    """lim of ∫u dα / ∫v dα over tails (x, b) when v is integrable there, over (r, x) when ∫_r^b v dα diverges.

    ``atom_values`` optionally gives (u at atoms, v at atoms) callables.
    """
    rep = RuleReport("lhospital_integral", details={"endpoint": endpoint})
    a, b = common_domain(u, v, alpha)
    end = b if endpoint == "b" else a
    m = LSMeasure(alpha)
    seq = endpoint_sequence(a, b, endpoint)
    av = list(atom_values) if atom_values else [None, None]

    # v of one sign on a grid of the window (cell interiors and atoms)
    lo, hi = _window(a, b)
    pts = monotone_grid((u, v, alpha), lo, hi, resolution)
    try:
        vs = [v.left_limit(x) for x in pts] + [av[1](x) if av[1] else v(x) for x in pts if m.atom_mass(x)]
    except FAILURES as exc:
        rep.add("v has constant sign", FAILED, error=str(exc))
        return rep
    sign_ok = all(x > 0 for x in vs) or all(x < 0 for x in vs)
    rep.add("v has constant sign", VERIFIED if sign_ok else FAILED, points=len(vs), v_min=min(vs), v_max=max(vs))

    w = limits.sequence_limit(lambda k: u.left_limit(seq(k)) / v.left_limit(seq(k)), kmax, rtol=rtol, atol=atol)
    rep.add("u/v has a limit A", VERIFIED if w.exists else FAILED, estimate=w)
    if rep.failed:
        return rep

    end_is_b = endpoint == "b"
    xs, (cu, cv) = _chunks((u, v), m, seq, kmax, end_is_b, av)
    rep.details["samples"] = len(cu)
    partial = np.cumsum(np.abs(cv))
    total = limits.sequence_limit(lambda k: float(partial[k]), len(partial) - 1, rtol=rtol, atol=atol)
    if total.converged:
        statement = 1
        if math.isfinite(end):
            def tail(f, x, avf):
                lo_, hi_ = (x, end) if end_is_b else (end, x)
                return open_integral(f, m, lo_, hi_, atom_value=avf)

            ratio = lambda k: tail(u, xs[k], av[0]) / tail(v, xs[k], av[1])  # noqa: E731
            usable = len(xs) - 1
        else:
            # tails summed backwards from the last chunk; keep only points whose
            # truncated remainder is negligible next to the tail
            tu, tv = np.cumsum(cu[::-1])[::-1], np.cumsum(cv[::-1])[::-1]
            usable = max(0, int(np.sum(np.abs(cv[-1]) * 2 <= 1e-12 * np.abs(tv))) - 1)
            ratio = lambda k: float(tu[k] / tv[k])  # noqa: E731
    elif total.status == limits.DIVERGED_POS:
        statement = 2
        # r = x_0; ∫_(r, x_k) accumulates chunk j (which ends with the atom at x_{j+1})
        su, sv = np.cumsum(cu), np.cumsum(cv)
        # chunk j includes the atom at x_{j+1}, which lies outside (r, x_{j+1}); drop it
        last_atom_u = [atom_term(u, m, xs[j + 1], av[0]) for j in range(len(cu))]
        last_atom_v = [atom_term(v, m, xs[j + 1], av[1]) for j in range(len(cv))]
        ratio = lambda k: float((su[k] - last_atom_u[k]) / (sv[k] - last_atom_v[k]))  # noqa: E731
        usable = len(su) - 1
    else:
        rep.add("tail integrals converge or ∫ v dα diverges", FAILED, partial_sums=total)
        return rep
    rep.add("tail integrals converge or ∫ v dα diverges", VERIFIED, statement=statement, partial_sums=total)
    rep.details["statement"] = statement

    oracle = limits.sequence_limit(
        ratio, usable, rtol=min(max(rtol, agree_rtol / 10), 1e-3), atol=max(atol, 1e-10)
    )
    rep.oracle = oracle
    rep.conclusion = w.as_extreal()
    rep.agree = limits_agree(rep.conclusion, oracle, agree_rtol)
    return rep


def monotone_integral(
    u: Regulated,
    v: Regulated,
    alpha: Regulated,
    *,
    resolution: int = 256,
    tol: float = 1e-9,
    atom_values=None,
) -> RuleReport:
    """h(x) = ∫_(a,x) u dα / ∫_(a,x) v dα is monotone when u/v is."""
    rep = RuleReport("monotone_integral")
    a, b = common_domain(u, v, alpha)
    if not math.isfinite(a):
        rep.add("integrable from a", FAILED, reason="a is infinite")
        return rep
    m = LSMeasure(alpha)
    av = list(atom_values) if atom_values else [None, None]
    lo, hi = _window(a, b)
    pts = monotone_grid((u, v, alpha), lo, hi, resolution)
    pts = [x for x in pts if a < x < b]

    try:
        vs = [v.left_limit(x) for x in pts]
        ws = [u.left_limit(x) / y for x, y in zip(pts, vs)]
    except FAILURES as exc:
        rep.add("v has constant sign", FAILED, error=str(exc))
        return rep
    sign_ok = all(y > 0 for y in vs) or all(y < 0 for y in vs)
    rep.add("v has constant sign", VERIFIED if sign_ok else FAILED, v_min=min(vs), v_max=max(vs))
    if not sign_ok:
        return rep
    trend, strict = _trend(ws, tol)
    if trend is None:
        rep.add("u/v monotone", FAILED, w_min=min(ws), w_max=max(ws))
        return rep
    rep.add("u/v monotone", VERIFIED, trend=trend, strict=strict)

    # h on a refining grid: ∫_(a, x_0) directly, then stretch by stretch
    fine = [x for x in monotone_grid((u, v, alpha), lo, hi, 2 * resolution) if a < x < b]
    try:
        iu = [open_integral(u, m, a, fine[0], atom_value=av[0])]
        iv = [open_integral(v, m, a, fine[0], atom_value=av[1])]
        for x0, x1 in zip(fine, fine[1:]):
            iu.append(iu[-1] + atom_term(u, m, x0, av[0]) + open_integral(u, m, x0, x1, atom_value=av[0]))
            iv.append(iv[-1] + atom_term(v, m, x0, av[1]) + open_integral(v, m, x0, x1, atom_value=av[1]))
    except FAILURES + (MeasureError,) as exc:
        rep.add("integrable from a", FAILED, error=str(exc))
        return rep
    rep.add("integrable from a", VERIFIED, points=len(fine))
    hs = [p / q for p, q in zip(iu, iv)]
    bad = _violations(hs, trend, tol)
    h_trend, h_strict = _trend(hs, tol)
    rep.oracle = {"trend": h_trend, "strict": h_strict, "points": len(fine), "violations": len(bad)}
    rep.conclusion = ("strictly " if strict else "") + trend
    rep.agree = not bad
    return rep
