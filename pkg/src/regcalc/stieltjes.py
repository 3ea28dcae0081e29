"""The derivative of f with respect to a strictly increasing alpha.

    D_alpha f(x) = lim_{h->0+} [f⁻(x+h) - f⁺(x-h)] / [alpha⁻(x+h) - alpha⁺(x-h)]

Where alpha jumps at x this is exactly the jump ratio
(f⁺(x) - f⁻(x)) / (alpha⁺(x) - alpha⁻(x)), and the sampling is skipped.
Where f and alpha are continuous at x and their cell bodies have classical
one-sided derivatives there, the limit equals
(f'_-(x) + f'_+(x)) / (alpha'_-(x) + alpha'_+(x)); that shortcut is used
unless the caller forces the numeric path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from regcalc import extreal, limits
from regcalc.limits import LimitEstimate
from regcalc.regulated import EVAL_ERRORS, KNOT_CAP, Cell, Regulated

JUMP_RATIO = "jump_ratio"
NUMERIC = "numeric_limit"
CLASSICAL = "classical_shortcut"

RULE_RTOL = 1e-7
RULE_ATOL = 1e-9
MIN_SLOPE = 1e-8  # classical shortcut is off when alpha' is smaller than this
CONTINUITY_RTOL = 1e-12
ZERO_G = 1e-9  # quotient rule: |g⁻| or |g⁺| below this counts as 0


class DerivativeError(ArithmeticError):
    pass


class NotIncreasing(DerivativeError):
    def __init__(self, name: str, s: float, t: float, lo: float, hi: float):
        super().__init__(f"{name} is not strictly increasing: {name}⁺({s!r})={lo!r} >= {name}⁻({t!r})={hi!r}")
        self.s, self.t = s, t


class NoDerivative(DerivativeError):
    def __init__(self, x: float, estimate: LimitEstimate):
        super().__init__(f"D_alpha f({x!r}) does not exist numerically: {estimate.status}")
        self.x = x
        self.estimate = estimate


@dataclass(frozen=True)
class DerivativeResult:
    value: float
    method: str
    estimate: LimitEstimate | None = None

    def to_json(self) -> dict:
        return {
            "value": extreal.to_json(self.value),
            "method": self.method,
            "estimate": None if self.estimate is None else self.estimate.to_json(),
        }


def jumps(left: float, right: float) -> bool:
    return abs(right - left) > CONTINUITY_RTOL * max(1.0, abs(left), abs(right))


def _slope(dfn, x: float) -> float | None:
    if dfn is None:
        return None
    try:
        v = float(dfn(x))
    except EVAL_ERRORS:
        return None
    return v if math.isfinite(v) else None


def _one_sided_slopes(f: Regulated, x: float) -> tuple[float, float] | None:
    if f.is_knot(x):
        left, right = _slope(f.cell_at(x).dfn, x), _slope(f.cell_after(x).dfn, x)
    else:
        left = right = _slope(f.cell_at(x).dfn, x)
    if left is None or right is None:
        return None
    return left, right


def classical(f: Regulated, alpha: Regulated, x: float) -> float | None:
    """(f'_- + f'_+)/(alpha'_- + alpha'_+) when every ingredient is available."""
    df = _one_sided_slopes(f, x)
    da = _one_sided_slopes(alpha, x)
    if df is None or da is None:
        return None
    den = da[0] + da[1]
    if den < 2 * MIN_SLOPE or min(da) < 0:
        return None
    return (df[0] + df[1]) / den


def _gap(f: Regulated, alpha: Regulated, x: float) -> float:
    """Distance from x to the nearest other breakpoint or domain end (at most 1)."""
    a, b = max(f.a, alpha.a), min(f.b, alpha.b)
    d = min(1.0, x - a, b - x)
    lo, hi = max(a, x - d), min(b, x + d)
    for q in f.knots(lo, hi, KNOT_CAP) + alpha.knots(lo, hi, KNOT_CAP):
        if q != x:
            d = min(d, abs(q - x))
    return d


def _quotient_limit(f, alpha, x, h0, symmetric, rtol, atol) -> LimitEstimate:
    name = getattr(alpha, "name", "alpha")

    def q(k: int) -> float:
        h = h0 * 2.0**-k
        if symmetric:
            num = f.right_limit(x + h) - f.left_limit(x - h)
            lo, hi = alpha.left_limit(x - h), alpha.right_limit(x + h)
        else:
            num = f.left_limit(x + h) - f.right_limit(x - h)
            lo, hi = alpha.right_limit(x - h), alpha.left_limit(x + h)
        if not hi > lo:
            raise NotIncreasing(name, x - h, x + h, lo, hi)
        return num / (hi - lo)

    kmax = min(40, limits.steps_until(h0, limits.h_floor(x)))
    return limits.sequence_limit(q, kmax, rtol=rtol, atol=atol)


def d_alpha(
    f: Regulated,
    alpha: Regulated,
    x: float,
    *,
    method: str = "auto",
    rtol: float = limits.RTOL,
    atol: float = limits.ATOL,
) -> DerivativeResult:
    """D_alpha f(x). ``method='numeric'`` skips the classical shortcut."""
    pa = alpha.one_sided(x)
    if jumps(pa.left, pa.right):
        if pa.right < pa.left:
            raise NotIncreasing(alpha.name, x, x, pa.right, pa.left)
        pf = f.one_sided(x)
        return DerivativeResult(pf.jump / pa.jump, JUMP_RATIO)
    if method == "auto":
        pf = f.one_sided(x)
        if not jumps(pf.left, pf.right):
            v = classical(f, alpha, x)
            if v is not None:
                return DerivativeResult(v, CLASSICAL)
    elif method != "numeric":
        raise ValueError(f"unknown method {method!r}")
    h0 = _gap(f, alpha, x) / 4.0
    est = _quotient_limit(f, alpha, x, h0, False, rtol, atol)
    if not est.exists:
        raise NoDerivative(x, est)
    return DerivativeResult(est.as_extreal(), NUMERIC, est)


def d_alpha_symmetric(f: Regulated, alpha: Regulated, x: float, *, rtol=limits.RTOL, atol=limits.ATOL) -> LimitEstimate:
    """The alternative quotient [f⁺(x+h) - f⁻(x-h)] / [alpha⁺(x+h) - alpha⁻(x-h)].

    Sampled on its own h sequence (a third of the breakpoint gap instead of a
    quarter).  At a jump of alpha the quotient is read off the one-sided
    limits directly, as for d_alpha.
    """
    pa = alpha.one_sided(x)
    if jumps(pa.left, pa.right):
        return limits.exact(f.one_sided(x).jump / pa.jump, JUMP_RATIO)
    return _quotient_limit(f, alpha, x, _gap(f, alpha, x) / 3.0, True, rtol, atol)


def agree(u: float, v: float, rtol: float = RULE_RTOL, atol: float = RULE_ATOL) -> bool:
    if math.isinf(u) or math.isinf(v):
        return u == v
    return abs(u - v) <= max(rtol * max(abs(u), abs(v)), atol)


def d_alpha_symmetric_check(f, alpha, x, *, rtol=RULE_RTOL, atol=RULE_ATOL) -> bool:
    d = d_alpha(f, alpha, x, method="numeric").value
    est = d_alpha_symmetric(f, alpha, x)
    return est.exists and agree(d, est.as_extreal(), rtol, atol)


@dataclass(frozen=True)
class RuleCheck:
    lhs: float
    rhs1: float
    rhs2: float
    rtol: float = RULE_RTOL
    atol: float = RULE_ATOL

    @property
    def ok(self) -> bool:
        return agree(self.lhs, self.rhs1, self.rtol, self.atol) and agree(self.lhs, self.rhs2, self.rtol, self.atol)

    def as_tuple(self) -> tuple[float, float, float]:
        return self.lhs, self.rhs1, self.rhs2


def _lhs(h: Regulated, alpha: Regulated, x: float) -> float:
    # the left side is computed from the definition, not from body derivatives,
    # so that it is independent of the rule being checked
    return d_alpha(h, alpha, x, method="numeric").value


def product_rule(f: Regulated, g: Regulated, alpha: Regulated, x: float) -> RuleCheck:
    """D(fg) against g⁻ Df + f⁺ Dg and g⁺ Df + f⁻ Dg."""
    df, dg = d_alpha(f, alpha, x).value, d_alpha(g, alpha, x).value
    pf, pg = f.one_sided(x), g.one_sided(x)
    m, a = extreal.mul, extreal.add
    rhs1 = a(m(pg.left, df), m(pf.right, dg))
    rhs2 = a(m(pg.right, df), m(pf.left, dg))
    return RuleCheck(_lhs(f * g, alpha, x), rhs1, rhs2)


class QuotientPrecondition(DerivativeError):
    pass


def quotient_rule(f: Regulated, g: Regulated, alpha: Regulated, x: float) -> RuleCheck:
    """D(f/g) against (g⁻ Df - f⁻ Dg)/(g⁻ g⁺) and (g⁺ Df - f⁺ Dg)/(g⁻ g⁺)."""
    pf, pg = f.one_sided(x), g.one_sided(x)
    denom = pg.left * pg.right
    if min(abs(pg.left), abs(pg.right)) <= ZERO_G:
        raise QuotientPrecondition(f"g⁻({x!r}) g⁺({x!r}) = 0")
    df, dg = d_alpha(f, alpha, x).value, d_alpha(g, alpha, x).value
    m, s = extreal.mul, extreal.sub
    rhs1 = s(m(pg.left, df), m(pf.left, dg)) / denom
    rhs2 = s(m(pg.right, df), m(pf.right, dg)) / denom
    return RuleCheck(_lhs(f / g, alpha, x), rhs1, rhs2)


def check_increasing(alpha: Regulated, s: float, t: float, m: int = 64) -> tuple[bool, tuple[float, float] | None]:
    """Spot-check alpha⁺(u) < alpha⁻(v) for consecutive u < v on a grid of (s, t) plus its breakpoints."""
    grid = sorted(set([s + (t - s) * (i + 0.5) / m for i in range(m)] + alpha.knots(s, t, 4 * m)[: 4 * m]))
    pairs = [alpha.one_sided(u) for u in grid]
    for i, p in enumerate(pairs):
        if p.right < p.left:
            return False, (grid[i], grid[i])
        if i and not pairs[i - 1].right < p.left:
            return False, (grid[i - 1], grid[i])
    return True, None


class DerivativeFn(Regulated):
    """D_alpha f as a regulated function on the common refinement of the cells.

    Inside a cell the value is f'/alpha' when both slopes are known (and
    alpha' is not tiny), otherwise d_alpha; at breakpoints it is d_alpha.
    """

    def __init__(self, f: Regulated, alpha: Regulated):
        self.f, self.alpha = f, alpha
        self.a, self.b = max(f.a, alpha.a), min(f.b, alpha.b)
        self.name = f"D_{alpha.name} {f.name}"

    def _merge(self, cf: Cell, ca: Cell) -> Cell:
        f, alpha = self.f, self.alpha

        def fn(y, _df=cf.dfn, _da=ca.dfn):
            num, den = _slope(_df, y), _slope(_da, y)
            if num is not None and den is not None and den >= MIN_SLOPE:
                return num / den
            return d_alpha(f, alpha, y).value

        return Cell(max(cf.left, ca.left), min(cf.right, ca.right), fn)

    def cell_at(self, x):
        return self._merge(self.f.cell_at(x), self.alpha.cell_at(x))

    def cell_after(self, x):
        return self._merge(self.f.cell_after(x), self.alpha.cell_after(x))

    def knots(self, s, t, cap=KNOT_CAP):
        return sorted(set(self.f.knots(s, t, cap)) | set(self.alpha.knots(s, t, cap)))

    def value(self, x):
        return d_alpha(self.f, self.alpha, x).value
