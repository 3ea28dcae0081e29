"""Witnesses for the regulated Rolle and Cauchy mean value theorems.

D_alpha f has no intermediate value property, so a sign change cannot be
located by bisection.  Instead D_alpha is sampled on a grid (cell-offset
midpoints plus every breakpoint in range) and the extremal points are taken
as witnesses; the grid doubles until their product is <= tol.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable

from regcalc import extreal
from regcalc.regulated import KNOT_CAP, Regulated
from regcalc.stieltjes import DerivativeError, d_alpha

START_RESOLUTION = 64
MAX_RESOLUTION = 8192
PRODUCT_TOL = 1e-9
KNOTS_PER_GRID = 4096


class MVTError(ArithmeticError):
    pass


class PreconditionError(MVTError):
    pass


class WitnessNotFound(MVTError):
    def __init__(self, resolution: int, trace: list[tuple[float, float]]):
        super().__init__(f"witness not found at resolution {resolution}")
        self.resolution = resolution
        self.trace = trace


class SignHypothesisFailed(MVTError):
    def __init__(self, x: float, value: float, y: float, other: float):
        super().__init__(f"D_alpha g changes sign: {value!r} at x={x!r}, {other!r} at x={y!r}")
        self.points = ((x, value), (y, other))


@dataclass(frozen=True)
class WitnessPair:
    u: float
    v: float
    lhs_value: float
    rhs_value: float
    product: float
    grid_resolution: int

    def to_json(self) -> dict:
        return {k: extreal.to_json(v) if isinstance(v, float) else v for k, v in asdict(self).items()}


def grid(s: float, t: float, n: int, knots: list[float]) -> list[float]:
    """n midpoints of a uniform split of (s, t) plus the given breakpoints, ascending."""
    step = (t - s) / n
    pts = {s + (i + 0.5) * step for i in range(n)}
    pts.update(q for q in knots if s < q < t)
    return sorted(pts)


def _knots(fns: tuple[Regulated, ...], s: float, t: float) -> list[float]:
    out: set[float] = set()
    for fn in fns:
        out.update(fn.knots(s, t, KNOT_CAP)[:KNOTS_PER_GRID])
    return sorted(out)


def _search(
    values: Callable[[float], float],
    s: float,
    t: float,
    knots: list[float],
    *,
    max_resolution: int,
    tol: float,
) -> WitnessPair:
    n = START_RESOLUTION
    trace: list[tuple[float, float]] = []
    while n <= max_resolution:
        pts = grid(s, t, n, knots)
        trace = [(x, values(x)) for x in pts]
        iu = min(range(len(trace)), key=lambda i: trace[i][1])
        iv = max(range(len(trace)), key=lambda i: trace[i][1])
        (u, du), (v, dv) = trace[iu], trace[iv]
        product = 0.0 if du == 0 or dv == 0 else du * dv
        if product <= tol:
            return WitnessPair(u, v, du, dv, product, n)
        n *= 2
    raise WitnessNotFound(n // 2, trace)


def _derivative(f: Regulated, alpha: Regulated) -> Callable[[float], float]:
    def value(x: float) -> float:
        try:
            return d_alpha(f, alpha, x).value
        except DerivativeError as exc:
            raise PreconditionError(f"D_alpha {f.name} does not exist at x={x!r}: {exc}") from None

    return value


def rolle_witness(
    f: Regulated,
    alpha: Regulated,
    s: float,
    t: float,
    *,
    max_resolution: int = MAX_RESOLUTION,
    tol: float = PRODUCT_TOL,
) -> WitnessPair:
    """u, v in (s, t) with D_alpha f(u) * D_alpha f(v) <= tol, given f⁺(s) = f⁻(t)."""
    fs, ft = f.right_limit(s), f.left_limit(t)
    if abs(fs - ft) > 1e-9 * (1.0 + abs(fs)):
        raise PreconditionError(f"{f.name}⁺({s!r})={fs!r} differs from {f.name}⁻({t!r})={ft!r}")
    return _search(_derivative(f, alpha), s, t, _knots((f, alpha), s, t), max_resolution=max_resolution, tol=tol)


def cauchy_coefficients(f: Regulated, g: Regulated, s: float, t: float) -> tuple[float, float]:
    """(g⁻(t) - g⁺(s), f⁻(t) - f⁺(s))."""
    return g.left_limit(t) - g.right_limit(s), f.left_limit(t) - f.right_limit(s)


def cauchy_witness(
    f: Regulated,
    g: Regulated,
    alpha: Regulated,
    s: float,
    t: float,
    *,
    max_resolution: int = MAX_RESOLUTION,
    tol: float = PRODUCT_TOL,
) -> WitnessPair:
    """Witnesses for [(g⁻(t)-g⁺(s)) D f - (f⁻(t)-f⁺(s)) D g] at u and v having product <= tol.

    The bracket is D_alpha of h = c1 f - c2 g, which satisfies h⁺(s) = h⁻(t).
    """
    c1, c2 = cauchy_coefficients(f, g, s, t)
    df, dg = _derivative(f, alpha), _derivative(g, alpha)

    def expression(x: float) -> float:
        return extreal.sub(extreal.mul(c1, df(x)), extreal.mul(c2, dg(x)))

    knots = _knots((f, g, alpha), s, t)
    return _search(expression, s, t, knots, max_resolution=max_resolution, tol=tol)


@dataclass(frozen=True)
class Sandwich:
    lo: float
    mid: float
    hi: float
    ok: bool
    monotone: bool = False
    ratio_s: float | None = None
    ratio_t: float | None = None
    ok_monotone: bool | None = None
    samples: tuple = field(default=(), repr=False, compare=False)

    def as_tuple(self) -> tuple[float, float, float, bool]:
        return self.lo, self.mid, self.hi, self.ok

    def to_json(self) -> dict:
        d = asdict(self)
        d.pop("samples")
        return {k: extreal.to_json(v) if isinstance(v, float) else v for k, v in d.items()}


def ratio_samples(f, g, alpha, pts) -> list[tuple[float, float, float]]:
    """(x, D f(x), D g(x)) on the points."""
    df, dg = _derivative(f, alpha), _derivative(g, alpha)
    return [(x, df(x), dg(x)) for x in pts]


def check_sign(samples) -> int:
    """+1 or -1 when every D g sample has that strict sign."""
    first = None
    for x, _, d in samples:
        if d == 0 or math.isnan(d):
            raise SignHypothesisFailed(x, d, x, d)
        if first is None:
            first = (x, d)
        elif (d > 0) != (first[1] > 0):
            raise SignHypothesisFailed(first[0], first[1], x, d)
    return 1 if first[1] > 0 else -1


def _close_le(u: float, v: float, tol: float) -> bool:
    return u <= v or (math.isfinite(u) and math.isfinite(v) and u - v <= tol * max(1.0, abs(u), abs(v)))


def sandwich_check(
    f: Regulated,
    g: Regulated,
    alpha: Regulated,
    s: float,
    t: float,
    *,
    resolution: int = 256,
    tol: float = 1e-9,
) -> Sandwich:
    """inf (Df/Dg) <= (f⁻(t)-f⁺(s))/(g⁻(t)-g⁺(s)) <= sup (Df/Dg) over a grid of (s, t).

    When the ratio is nondecreasing on the grid (including s and t) the
    sharper bound ratio(s) <= mid <= ratio(t) is checked as well.
    """
    pts = grid(s, t, resolution, _knots((f, g, alpha), s, t))
    samples = ratio_samples(f, g, alpha, [s] + pts + [t])
    check_sign(samples)
    ratios = [extreal.div(d_f, d_g) for _, d_f, d_g in samples]
    inner = ratios[1:-1]
    lo, hi = min(inner), max(inner)
    c1, c2 = cauchy_coefficients(f, g, s, t)
    mid = c2 / c1
    ok = _close_le(lo, mid, tol) and _close_le(mid, hi, tol)
    monotone = all(_close_le(ratios[i], ratios[i + 1], tol) for i in range(len(ratios) - 1))
    ok2 = None
    if monotone:
        ok2 = _close_le(ratios[0], mid, tol) and _close_le(mid, ratios[-1], tol)
    return Sandwich(lo, mid, hi, ok, monotone, ratios[0], ratios[-1], ok2, tuple(samples))
