"""L'Hospital-type rules for regulated functions, each with a direct oracle.

``lhospital_limit``  limit of f⁻/g⁻ at an endpoint from the limit of D f / D g
``monotone_certify`` monotonicity of f⁻/g⁻ from monotonicity of D f / D g
``stolz_limit``      sequences F_n/G_n through the piecewise-linear F, G

Hypotheses are checked on finite grids, so their status is at best
"verified-on-grid".  A failed hypothesis yields a report with no conclusion
rather than an exception; the CLI turns that into exit code 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from regcalc import extreal, limits
from regcalc.expr import Expr, ExprError, compile_expr, evaluate_array, parse
from regcalc.limits import LimitEstimate
from regcalc.regulated import (
    Family,
    HorizonExhausted,
    PiecewiseFn,
    Regulated,
    RegulatedError,
    Reflected,
    end_points,
    identity,
)
from regcalc.stieltjes import DerivativeError, d_alpha

VERIFIED = "verified-on-grid"
FAILED = "failed"
ASSUMED = "assumed"

AGREE_RTOL = 1e-6
STEPS = 20
X0 = 4.0
PER_OCTAVE = 8
ZERO_TOL = 1e-8
NOISE = 1e-13  # relative step a strictly monotone sample must clear
OFF_LATTICE = 1.0 + 1.0 / (2.0 * math.pi)

FAILURES = (DerivativeError, RegulatedError, ArithmeticError, ExprError)


@dataclass
class Hypothesis:
    name: str
    status: str
    evidence: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"name": self.name, "status": self.status, "evidence": _jsonable(self.evidence)}


@dataclass
class RuleReport:
    rule: str
    hypotheses: list[Hypothesis] = field(default_factory=list)
    conclusion: float | str | None = None
    oracle: LimitEstimate | dict | None = None
    agree: bool | None = None
    details: dict = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    @property
    def failed(self) -> list[Hypothesis]:
        return [h for h in self.hypotheses if h.status == FAILED]

    @property
    def ok(self) -> bool:
        return not self.failed and self.conclusion is not None and bool(self.agree)

    def add(self, name: str, status: str, **evidence) -> Hypothesis:
        h = Hypothesis(name, status, evidence)
        self.hypotheses.append(h)
        return h

    def to_json(self) -> dict:
        oracle = self.oracle.to_json() if isinstance(self.oracle, LimitEstimate) else _jsonable(self.oracle)
        conclusion = extreal.to_json(self.conclusion) if isinstance(self.conclusion, float) else self.conclusion
        return {
            "rule": self.rule,
            "hypotheses": [h.to_json() for h in self.hypotheses],
            "conclusion": conclusion,
            "oracle": oracle,
            "agree": self.agree,
            "details": _jsonable(self.details),
            "warnings": list(self.warnings),
        }


def _jsonable(v):
    if isinstance(v, float):
        return extreal.to_json(v)
    if isinstance(v, (np.floating, np.integer)):
        return _jsonable(v.item())
    if isinstance(v, LimitEstimate):
        return v.to_json()
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def limits_agree(conclusion: float, oracle: LimitEstimate, rtol: float = AGREE_RTOL) -> bool:
    """Finite A: |A - O| <= rtol max(1, |A|).  Infinite A: oracle diverges the same way."""
    if math.isinf(conclusion):
        return oracle.diverged and oracle.as_extreal() == conclusion
    if not oracle.converged:
        return False
    return abs(conclusion - oracle.value) <= rtol * max(1.0, abs(conclusion))


# ---------------------------------------------------------------------------
# sampling helpers


def common_domain(*fns: Regulated) -> tuple[float, float]:
    return max(f.a for f in fns), min(f.b for f in fns)


class _Window(Regulated):
    """Stand-in carrying only a domain, for end_points()."""

    def __init__(self, a, b):
        self.a, self.b = a, b


def endpoint_sequence(a: float, b: float, endpoint: str, x0: float = X0) -> Callable[[float], float]:
    """x(k) for real k: x0 2^k toward an infinite end, end -/+ h0 2^-k toward a finite one."""
    w = _Window(a, b)
    start = None
    if (endpoint == "b" and math.isinf(b)) or (endpoint == "a" and math.isinf(a)):
        other = a if endpoint == "b" else b
        start = max(x0, 2.0 * abs(other) + 1.0) if math.isfinite(other) else x0
    return end_points(w, endpoint, 0, start)


def endpoint_grid(fns, seq: Callable[[float], float], steps: int, per_octave: int = PER_OCTAVE) -> list[float]:
    """Geometric grid toward the endpoint, plus the breakpoints bracketing each grid point."""
    base = [seq(j / per_octave) for j in range(per_octave * (steps - 1) + 1)]
    pts = set(base)
    for y in base:
        for f in fns:
            try:
                c = f.cell_at(y)
            except FAILURES:
                continue
            for q in (c.left, c.right):
                if f.a < q < f.b and math.isfinite(q):
                    pts.add(q)
    lo, hi = min(base), max(base)
    return sorted(p for p in pts if lo <= p <= hi)


def _ratio_sampler(f, g, alpha, seq):
    def sample(k: int) -> float:
        x = seq(k)
        return extreal.div(d_alpha(f, alpha, x).value, d_alpha(g, alpha, x).value)

    return sample


def _alpha_direction(alpha: Regulated, pts: list[float]) -> tuple[int, tuple | None]:
    """+1 when alpha⁺(u) < alpha⁻(v) for consecutive grid points, -1 when reversed, 0 otherwise."""
    pairs = [alpha.one_sided(x) for x in pts]
    up = all(pairs[i].right < pairs[i + 1].left for i in range(len(pairs) - 1))
    if up:
        return 1, None
    down = all(pairs[i].right > pairs[i + 1].left for i in range(len(pairs) - 1))
    if down:
        return -1, None
    bad = next(i for i in range(len(pairs) - 1) if not pairs[i].right < pairs[i + 1].left)
    return 0, (pts[bad], pts[bad + 1])


def _sign_constancy(g, alpha, pts) -> tuple[bool, dict]:
    sign = None
    first = None
    for x in pts:
        try:
            d = d_alpha(g, alpha, x).value
        except FAILURES as exc:
            return False, {"x": x, "error": str(exc)}
        if d == 0:
            return False, {"x": x, "D_alpha_g": d}
        s = 1 if d > 0 else -1
        if sign is None:
            sign, first = s, (x, d)
        elif s != sign:
            return False, {"x": first[0], "D_alpha_g": first[1], "x_other": x, "D_alpha_g_other": d}
    return True, {"sign": sign, "points": len(pts)}


def _negated(alpha: Regulated) -> Regulated:
    return (-1.0) * alpha


# ---------------------------------------------------------------------------
# L'Hospital's rule


def lhospital_limit(
    f: Regulated,
    g: Regulated,
    alpha: Regulated,
    endpoint: str = "b",
    *,
    steps: int = STEPS,
    x0: float = X0,
    rtol: float = limits.RTOL,
    atol: float = limits.ATOL,
    agree_rtol: float = AGREE_RTOL,
) -> RuleReport:
    """lim f⁻/g⁻ at the endpoint from lim D f / D g, with the direct ratio as oracle."""
    rep = RuleReport("lhospital", details={"endpoint": endpoint})
    a, b = common_domain(f, g, alpha)
    seq = endpoint_sequence(a, b, endpoint, x0)
    kmax = steps - 1
    rep.details["x_k"] = [seq(k) for k in (0, 1, kmax)]
    pts = endpoint_grid((f, g, alpha), seq, steps)

    direction, bad = _alpha_direction(alpha, pts)
    if direction == 0:
        rep.add("alpha strictly monotone", FAILED, between=bad)
        return rep
    if direction < 0:
        # D f / D g is unchanged when alpha is replaced by -alpha
        alpha = _negated(alpha)
        rep.warnings.append("alpha is decreasing on the grid; using -alpha")
    rep.add("alpha strictly monotone", VERIFIED, direction=direction, points=len(pts))

    ok, evidence = _sign_constancy(g, alpha, pts)
    rep.add("D_alpha g has constant sign", VERIFIED if ok else FAILED, **evidence)

    # the oracle runs regardless, so a refusal still shows what the ratio does
    oracle = limits.sequence_limit(lambda k: f.left_limit(seq(k)) / g.left_limit(seq(k)), kmax, rtol=rtol, atol=atol)
    rep.oracle = oracle
    oracle_plus = limits.sequence_limit(lambda k: f.right_limit(seq(k)) / g.right_limit(seq(k)), kmax, rtol=rtol, atol=atol)
    rep.details["oracle_right_limits"] = oracle_plus
    if not ok:
        return rep

    try:
        est = limits.sequence_limit(_ratio_sampler(f, g, alpha, seq), kmax, rtol=rtol, atol=atol)
    except FAILURES as exc:
        rep.add("D_alpha f / D_alpha g has a limit", FAILED, error=str(exc))
        return rep
    rep.details["ratio_estimate"] = est
    if not est.exists:
        rep.add("D_alpha f / D_alpha g has a limit", FAILED, estimate=est)
        return rep
    rep.add("D_alpha f / D_alpha g has a limit", VERIFIED, estimate=est)
    A = est.as_extreal()

    fe = limits.sequence_limit(lambda k: f.left_limit(seq(k)), kmax, rtol=rtol, atol=atol)
    ge = limits.sequence_limit(lambda k: g.left_limit(seq(k)), kmax, rtol=rtol, atol=atol)
    rep.details["f_end"], rep.details["g_end"] = fe, ge
    zero = lambda e: e.converged and abs(e.value) <= ZERO_TOL  # noqa: E731
    if zero(fe) and zero(ge):
        case = "0/0"
    elif ge.diverged:
        case = "g->+inf" if ge.status == limits.DIVERGED_POS else "g->-inf"
    else:
        rep.add("0/0 or |g| -> inf", FAILED, f_end=fe, g_end=ge)
        return rep
    rep.add("0/0 or |g| -> inf", VERIFIED, case=case)
    rep.details["case"] = case

    end = b if endpoint == "b" else a
    off_ratio = _ratio_sampler(f, g, alpha, lambda k: _stretch(seq(k), end))
    try:
        off = limits.sequence_limit(off_ratio, kmax, rtol=rtol, atol=atol)
    except FAILURES as exc:
        off = LimitEstimate(limits.INCONCLUSIVE, None, math.inf, 0, f"error: {exc}")
    rep.details["ratio_off_lattice"] = off
    if not (off.exists and _same(off.as_extreal(), A, agree_rtol)):
        rep.warnings.append(
            "D_alpha f / D_alpha g along a shifted sequence gives "
            f"{off.status} {extreal.fmt(off.as_extreal()) if off.exists else ''}".rstrip()
            + "; the conclusion rests on the x_k sequence only"
        )

    rep.conclusion = A
    rep.agree = limits_agree(A, oracle, agree_rtol)
    return rep


def _stretch(x: float, end: float) -> float:
    """Move x away from the endpoint by a non-dyadic factor, off any integer lattice."""
    if math.isinf(end):
        return x * OFF_LATTICE
    return end + (x - end) * OFF_LATTICE


def _same(u: float, v: float, rtol: float) -> bool:
    if math.isinf(u) or math.isinf(v):
        return u == v
    return abs(u - v) <= rtol * max(1.0, abs(u), abs(v))


# ---------------------------------------------------------------------------
# L'Hospital's monotone rule


def _window(a: float, b: float, reach: float = 1024.0) -> tuple[float, float]:
    """A finite window of (a, b) that gets close to any finite end."""
    if math.isfinite(a) and math.isfinite(b):
        pad = (b - a) * 2.0**-12
        return a + pad, b - pad
    if math.isfinite(a):
        return a + 2.0**-12, a + reach
    if math.isfinite(b):
        return b - reach, b - 2.0**-12
    return -reach, reach


def monotone_grid(fns, lo: float, hi: float, n: int) -> list[float]:
    """Uniform midpoints, a geometric run into both ends, and the breakpoints in between."""
    from regcalc.mvt import grid

    knots: set[float] = set()
    for f in fns:
        knots.update(f.knots(lo, hi)[:4096])
    pts = set(grid(lo, hi, n, sorted(knots)))
    width = hi - lo
    for j in range(1, 13):
        pts.add(lo + width * 2.0 ** -(j + 6))
        pts.add(hi - width * 2.0 ** -(j + 6))
    pts.update((lo, hi))
    return sorted(pts)


def _trend(values: list[float], tol: float) -> tuple[str | None, bool]:
    """('increasing'|'decreasing'|None, strict) for a sampled sequence.

    Monotonicity allows slack ``tol``; strictness asks only that every step
    clears rounding noise, since a strictly monotone ratio can move by less
    than ``tol`` between close grid points.
    """
    diffs = [values[i + 1] - values[i] for i in range(len(values) - 1)]
    mags = [max(1.0, abs(values[i]), abs(values[i + 1])) for i in range(len(values) - 1)]
    scale = [tol * m for m in mags]
    noise = [NOISE * m for m in mags]
    up = all(d >= -s for d, s in zip(diffs, scale))
    down = all(d <= s for d, s in zip(diffs, scale))
    if up:
        return "increasing", all(d > e for d, e in zip(diffs, noise))
    if down:
        return "decreasing", all(d < -e for d, e in zip(diffs, noise))
    return None, False


def _violations(values: list[float], direction: str, tol: float) -> list[int]:
    sign = 1.0 if direction == "increasing" else -1.0
    return [
        i
        for i in range(len(values) - 1)
        if sign * (values[i + 1] - values[i]) < -tol * max(1.0, abs(values[i]), abs(values[i + 1]))
    ]


def monotone_certify(
    f: Regulated,
    g: Regulated,
    alpha: Regulated,
    zero_end: str = "a",
    *,
    shift: bool = False,
    resolution: int = 256,
    tol: float = 1e-9,
    rtol: float = limits.RTOL,
    atol: float = limits.ATOL,
) -> RuleReport:
    """Certify f⁻/g⁻ monotone from a monotone D f / D g and f⁻, g⁻ -> 0 at ``zero_end``.

    With ``shift`` the end limits A of f and B of g are estimated first and
    the rule is applied to f - A, g - B.
    """
    rep = RuleReport("monotone", details={"zero_end": zero_end})
    a, b = common_domain(f, g, alpha)
    seq = endpoint_sequence(a, b, zero_end)
    kmax = STEPS - 1 if math.isinf(b if zero_end == "b" else a) else 40

    def end_limit(h):
        return limits.sequence_limit(lambda k: h.left_limit(seq(k)), kmax, rtol=rtol, atol=atol)

    if shift:
        fa, ga = end_limit(f), end_limit(g)
        if not (fa.converged and ga.converged):
            rep.add("finite end limits A, B", FAILED, f_end=fa, g_end=ga)
            return rep
        A, B = fa.value, ga.value
        rep.add("finite end limits A, B", VERIFIED, A=A, B=B)
        rep.details["shift"] = {"A": A, "B": B}
        f, g = f - A, g - B
    fe, ge = end_limit(f), end_limit(g)
    zero = lambda e: e.converged and abs(e.value) <= ZERO_TOL  # noqa: E731
    if not (zero(fe) and zero(ge)):
        rep.add(f"f⁻, g⁻ -> 0 at {zero_end}", FAILED, f_end=fe, g_end=ge)
        return rep
    rep.add(f"f⁻, g⁻ -> 0 at {zero_end}", VERIFIED, f_end=fe, g_end=ge)

    lo, hi = _window(a, b)
    pts = monotone_grid((f, g, alpha), lo, hi, resolution)
    rep.details["window"] = [lo, hi]
    direction, bad = _alpha_direction(alpha, pts)
    if direction == 0:
        rep.add("alpha strictly monotone", FAILED, between=bad)
        return rep
    if direction < 0:
        alpha = _negated(alpha)
        rep.warnings.append("alpha is decreasing on the grid; using -alpha")
    rep.add("alpha strictly monotone", VERIFIED, direction=direction, points=len(pts))

    ok, evidence = _sign_constancy(g, alpha, pts)
    rep.add("D_alpha g has constant sign", VERIFIED if ok else FAILED, **evidence)

    # oracle: f⁻/g⁻ itself on a finer grid
    fine = monotone_grid((f, g, alpha), lo, hi, 2 * resolution)
    q = [f.left_limit(x) / g.left_limit(x) for x in fine]
    oracle_trend, oracle_strict = _trend(q, tol)
    rep.oracle = {"trend": oracle_trend, "strict": oracle_strict, "points": len(fine)}
    if not ok:
        return rep

    try:
        ratios = [extreal.div(d_alpha(f, alpha, x).value, d_alpha(g, alpha, x).value) for x in pts]
    except FAILURES as exc:
        rep.add("D_alpha f / D_alpha g monotone", FAILED, error=str(exc))
        return rep
    trend, strict = _trend(ratios, tol)
    if trend is None:
        rep.add("D_alpha f / D_alpha g monotone", FAILED, ratio_min=min(ratios), ratio_max=max(ratios))
        return rep
    rep.add("D_alpha f / D_alpha g monotone", VERIFIED, trend=trend, strict=strict)
    certificate = ("strictly " if strict else "") + trend
    bad_steps = _violations(q, trend, tol)
    rep.oracle["violations"] = len(bad_steps)
    if bad_steps:
        i = bad_steps[0]
        rep.oracle["first_violation"] = [fine[i], q[i], fine[i + 1], q[i + 1]]
    rep.conclusion = certificate
    rep.agree = not bad_steps
    return rep


# ---------------------------------------------------------------------------
# Stolz-Cesaro


class Seq:
    """A real sequence n -> s_n (n >= 1), closed form or tabulated."""

    def __init__(self, values: Callable, name: str = "s", last: int | None = None, text: str = ""):
        self._values = values
        self.name = name
        self.last = last
        self.text = text

    @classmethod
    def from_expr(cls, e: Expr | str, name: str = "s") -> "Seq":
        e = parse(e) if isinstance(e, str) else e
        scalar = compile_expr(e)

        def values(n):
            if np.ndim(n) == 0:
                return scalar(0.0, int(n))
            return evaluate_array(e, np.zeros(np.shape(n)), np.asarray(n, dtype=float))

        from regcalc.expr import to_text

        return cls(values, name, None, to_text(e))

    @classmethod
    def from_table(cls, table: dict[int, float] | np.ndarray, name: str = "s") -> "Seq":
        """Tabulated values for n = 1..N (a dict must cover 1..N without gaps)."""
        if isinstance(table, dict):
            n = len(table)
            if sorted(table) != list(range(1, n + 1)):
                raise ValueError(f"{name}: table must cover n = 1..{n} without gaps")
            arr = np.array([table[i] for i in range(1, n + 1)], dtype=float)
        else:
            arr = np.asarray(table, dtype=float)
        last = len(arr)

        def values(n):
            idx = np.asarray(n, dtype=np.int64)
            if np.any(idx < 1) or np.any(idx > last):
                raise HorizonExhausted(f"{name}: index outside 1..{last}")
            out = arr[idx - 1]
            return float(out) if np.ndim(out) == 0 else out

        return cls(values, name, last, f"<{last} values>")

    def __call__(self, n: int) -> float:
        return float(self._values(n))

    def values(self, n) -> np.ndarray:
        return np.asarray(self._values(n), dtype=float)

    def partial_sums(self, upto: int) -> np.ndarray:
        """S_1..S_upto accumulated in extended precision."""
        vals = self.values(np.arange(1, upto + 1))
        return np.cumsum(vals.astype(np.longdouble)).astype(float)


def stolz_spline(seq: Seq, name: str = "F") -> PiecewiseFn:
    """On [m, m+1]: F(x) = s_{m+2} x + sum_{j<=m+1} s_j - m s_{m+2}.

    Built as a glued family: body s_{m+2} (x - m) on cell m, offsets
    accumulated for continuity, starting from s_1.
    """

    def body(x, n):
        return seq.values(np.asarray(n) + 2) * (np.asarray(x) - np.asarray(n))

    def dbody(x, n):
        return seq(int(n) + 2)

    def no_jump(x, n):
        return np.zeros(np.shape(n))

    last = None if seq.last is None else seq.last - 3
    fam = Family(0, parse("n"), (body,), glue=no_jump, init=seq(1), dbodies=(dbody,), last=last)
    horizon = 10_000 if last is None else min(10_000, last)
    return PiecewiseFn(0.0, math.inf, family=fam, name=name, horizon=horizon)


def _construction_checks(F: PiecewiseFn, seq: Seq, ms: list[int], tol: float) -> dict:
    alpha = identity(0.0, math.inf)
    worst = 0.0
    where = None
    for m in ms:
        cases = [(m + 0.5, seq(m + 2)), (m + 0.25, seq(m + 2)), (m + 1.0, (seq(m + 2) + seq(m + 3)) / 2.0)]
        for x, want in cases:
            got = d_alpha(F, alpha, x, method="numeric").value
            err = abs(got - want) / max(1.0, abs(want))
            if err > worst:
                worst, where = err, (x, got, want)
    return {"max_rel_err": worst, "worst": where, "checked_cells": len(ms), "ok": worst <= tol}


def stolz_limit(
    fseq: Seq,
    gseq: Seq,
    *,
    probe: int = 10**6,
    steps: int = STEPS,
    construction_tol: float = 1e-9,
    agree_rtol: float = AGREE_RTOL,
    rtol: float = limits.RTOL,
    atol: float = limits.ATOL,
) -> RuleReport:
    """lim F_n/G_n via the piecewise-linear F, G and lhospital_limit; the oracle sums directly."""
    rep = RuleReport("stolz", details={"f": fseq.text, "g": gseq.text})
    for s in (fseq, gseq):
        if s.last is not None:
            probe = min(probe, s.last)
    rep.details["probe"] = probe
    n_all = np.arange(1, probe + 1)
    gv = gseq.values(n_all)
    if not np.all(gv > 0):
        i = int(np.argmin(gv > 0))
        rep.add("g_n > 0", FAILED, n=i + 1, g_n=float(gv[i]))
        return rep
    rep.add("g_n > 0", VERIFIED, upto=probe)

    K = int(math.floor(math.log2(probe / 4)))
    m0 = probe // 2**K
    ladder = [m0 * 2**k for k in range(K + 1)]
    ratio_est = limits.sequence_limit(lambda k: fseq(ladder[k]) / gseq(ladder[k]), K, rtol=rtol, atol=atol)
    rep.add("f_n/g_n has a limit", VERIFIED if ratio_est.exists else FAILED, estimate=ratio_est)

    Fn, Gn = fseq.partial_sums(probe), gseq.partial_sums(probe)
    g_growth = limits.sequence_limit(lambda k: float(Gn[ladder[k] - 1]), K, rtol=rtol, atol=atol)
    rep.add("G_n -> inf", VERIFIED if g_growth.status == limits.DIVERGED_POS else FAILED, estimate=g_growth)

    # the ladder stops at the probe, so the oracle cannot reach the engine's
    # default 1e-9; it is held one decade tighter than the agreement tolerance
    oracle = limits.sequence_limit(
        lambda k: float(Fn[ladder[k] - 1] / Gn[ladder[k] - 1]),
        K,
        rtol=min(max(rtol, agree_rtol / 10), 1e-3),
        atol=max(atol, 1e-10),
    )
    rep.oracle = oracle
    rep.details["F_probe/G_probe"] = float(Fn[-1] / Gn[-1])
    rep.details["ladder"] = [ladder[0], ladder[-1]]
    if rep.failed:
        return rep

    F, G = stolz_spline(fseq, "F"), stolz_spline(gseq, "G")
    upper = min(1000, F.family.last or 1000, G.family.last or 1000)
    ms = sorted(set(list(range(0, 10)) + [int(v) for v in np.geomspace(10, upper, 12)]))
    checks = {"F": _construction_checks(F, fseq, ms, construction_tol), "G": _construction_checks(G, gseq, ms, construction_tol)}
    ok = checks["F"]["ok"] and checks["G"]["ok"]
    rep.add("D F = f_{m+2} on (m, m+1), D F(m+1) = (f_{m+2}+f_{m+3})/2", VERIFIED if ok else FAILED, **checks)
    if not ok:
        return rep

    lasts = [fam.last for fam in (F.family, G.family) if fam.last is not None]
    if lasts:
        # tabulated data: keep the geometric sample points (and their shifts) inside it
        steps = min(steps, int(math.floor(math.log2((min(lasts) - 2) / (X0 * OFF_LATTICE)))) + 1)
        rep.details["steps"] = steps
    inner = lhospital_limit(F, G, identity(0.0, math.inf), "b", steps=steps, rtol=rtol, atol=atol, agree_rtol=agree_rtol)
    rep.details["lhospital"] = inner.to_json()
    rep.warnings.extend(inner.warnings)
    for h in inner.hypotheses:
        rep.hypotheses.append(Hypothesis(f"F, G: {h.name}", h.status, h.evidence))
    if inner.conclusion is None:
        return rep
    rep.conclusion = inner.conclusion
    rep.agree = limits_agree(inner.conclusion, oracle, agree_rtol)
    return rep


def reflected_problem(f: Regulated, g: Regulated, alpha: Regulated) -> tuple[Regulated, Regulated, Regulated]:
    """x -> -x: f(-x), g(-x) and the increasing -alpha(-x); endpoint b becomes a."""
    return Reflected(f), Reflected(g), Reflected(alpha, -1.0)
