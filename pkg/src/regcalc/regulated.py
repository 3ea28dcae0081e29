"""Regulated functions: closed-form bodies on half-open cells (left, right].

A cell owns its right endpoint, so the value of a function at a breakpoint q
is the left cell's body at q.  One-sided limits never depend on that choice.

Besides finite pieces a :class:`PiecewiseFn` may carry one infinite family of
cells ``(p(n), p(n+1)]`` accumulating at the right end of the domain.  The
family bodies can be cycled (``n mod k`` selects the body) and optionally
glued: an offset per cell is accumulated so that the jump at every family
breakpoint equals a prescribed expression in n (zero for continuity).

Everything else here (sums, products, shifts, the materialised f⁻ and f⁺,
reflections) is a lazy wrapper that exposes the same cell interface.
"""

from __future__ import annotations

import bisect
import math
import threading
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np

from regcalc import limits
from regcalc.expr import (
    Expr,
    ExprError,
    Num,
    compile_expr,
    diff,
    evaluate_array,
    parse,
    simplify,
    substitute,
    to_text,
)
from regcalc.limits import LimitEstimate

INF = math.inf
DEFAULT_HORIZON = 10_000
KNOT_CAP = 200_000
OFFSET_CAP = 2**22  # glued family cells whose offsets we are willing to accumulate

EVAL_ERRORS = (ExprError, ArithmeticError, ValueError, IndexError, OverflowError)


class RegulatedError(ValueError):
    pass


class DomainError(RegulatedError):
    def __init__(self, x: float, a: float, b: float, name: str = "f"):
        super().__init__(f"{name}: x={x!r} is outside the open domain ({a!r}, {b!r})")
        self.x = x


class HorizonExhausted(RegulatedError, ArithmeticError):
    """Past what a family can represent; the limit engine treats it as the end of a sample run."""


class ConstructionError(RegulatedError):
    pass


class NotRegulated(RegulatedError):
    """A one-sided limit failed to exist; carries the limit engine's verdict."""

    def __init__(self, name: str, x: float, side: int, estimate: LimitEstimate):
        where = "left" if side < 0 else "right"
        super().__init__(f"{name} is not regulated at x={x!r}: {where} limit is {estimate.status}")
        self.x = x
        self.side = side
        self.estimate = estimate


class OneSidedPair(NamedTuple):
    """(f⁻(x), f⁺(x))."""

    left: float
    right: float

    @property
    def jump(self) -> float:
        return self.right - self.left


@dataclass(frozen=True)
class Cell:
    """One cell (left, right] with its body and (when known) the body's derivative."""

    left: float
    right: float
    fn: Callable[[float], float]
    dfn: Callable[[float], float] | None = None
    n: int | None = None
    # text of the body, or a zero-argument callable producing it (formatting is lazy)
    label_src: str | Callable[[], str] = ""

    @property
    def label(self) -> str:
        return self.label_src() if callable(self.label_src) else self.label_src

    @property
    def width(self) -> float:
        return self.right - self.left


def _safe(fn: Callable[[float], float], x: float) -> float | None:
    try:
        v = float(fn(x))
    except EVAL_ERRORS:
        return None
    return v if math.isfinite(v) else None


def cell_limit(cell: Cell, x: float, side: int, name: str = "f") -> float:
    """Limit of the cell body at its endpoint x from inside the cell.

    Grammar bodies are continuous wherever they are defined, so a finite
    direct evaluation is the limit; otherwise the limit engine samples
    x + side * h0 * 2**-k with h0 a quarter of min(1, cell width).
    """
    v = _safe(cell.fn, x)
    if v is not None:
        return v
    h0 = min(1.0, cell.width) / 4.0
    est = limits.approach(cell.fn, x, side, h0)
    if est.exists:
        return est.as_extreal()
    raise NotRegulated(name, x, side, est)


class Regulated:
    """Common interface: a, b, cell_at, cell_after, knots, point values."""

    a: float = -INF
    b: float = INF
    name: str = "f"

    # -- to implement -----------------------------------------------------
    def cell_at(self, x: float) -> Cell:
        """The cell with left < x <= right."""
        raise NotImplementedError

    def cell_after(self, x: float) -> Cell:
        """The cell with left <= x < right."""
        raise NotImplementedError

    def knots(self, s: float, t: float, cap: int = KNOT_CAP) -> list[float]:
        """Cell boundaries strictly inside (s, t), ascending."""
        raise NotImplementedError

    def value(self, x: float) -> float:
        """Point value at x (cell convention); x already domain-checked."""
        c = self.cell_at(x)
        v = _safe(c.fn, x)
        if v is not None:
            return v
        return cell_limit(c, x, -1, self.name)

    # -- shared -------------------------------------------------------------
    def check_domain(self, x: float) -> None:
        if not (self.a < x < self.b):
            raise DomainError(x, self.a, self.b, self.name)

    def __call__(self, x: float) -> float:
        self.check_domain(x)
        return self.value(x)

    def locate(self, x: float) -> Cell:
        self.check_domain(x)
        return self.cell_at(x)

    def is_knot(self, x: float) -> bool:
        return self.cell_at(x).right == x

    def one_sided(self, x: float) -> OneSidedPair:
        self.check_domain(x)
        c = self.cell_at(x)
        if c.right != x:
            v = self.value(x)
            return OneSidedPair(v, v)
        left = cell_limit(c, x, -1, self.name)
        right = cell_limit(self.cell_after(x), x, 1, self.name)
        return OneSidedPair(left, right)

    def left_limit(self, x: float) -> float:
        return self.one_sided(x).left

    def right_limit(self, x: float) -> float:
        return self.one_sided(x).right

    def breakpoints(self, s: float, t: float, cap: int = KNOT_CAP) -> list[tuple[float, float]]:
        out = []
        for q in self.knots(s, t, cap):
            pair = self.one_sided(q)
            out.append((q, pair.jump))
        return out

    def named(self, name: str) -> "Regulated":
        self.name = name
        return self

    # arithmetic builds lazy combinations
    def __add__(self, other):
        return Combined.of("+", self, other)

    def __radd__(self, other):
        return Combined.of("+", other, self)

    def __sub__(self, other):
        return Combined.of("-", self, other)

    def __rsub__(self, other):
        return Combined.of("-", other, self)

    def __mul__(self, other):
        return Combined.of("*", self, other)

    def __rmul__(self, other):
        return Combined.of("*", other, self)

    def __truediv__(self, other):
        return Combined.of("/", self, other)

    def __rtruediv__(self, other):
        return Combined.of("/", other, self)

    def __neg__(self):
        return Combined.of("*", -1.0, self)


# ---------------------------------------------------------------------------
# concrete piecewise functions


@dataclass(frozen=True)
class Piece:
    left: float
    right: float
    body: Expr


@dataclass(frozen=True)
class Family:
    """Cells (p(n), p(n+1)] for n >= start accumulating at the right end.

    ``bodies`` are Exprs in x and n, or callables ``body(x, n)`` that accept
    numpy arrays; body ``n % len(bodies)`` is used on cell n.  ``glue`` is the
    prescribed jump at p(n) (n is the index of the cell to its right); when
    given, per-cell offsets are accumulated to realise it.  ``init`` fixes the
    offset of the first family cell; by default it continues the last finite
    piece (or is 0 when there is none).  ``last`` bounds the family for
    bodies backed by finite data; cells past it raise HorizonExhausted.
    """

    start: int
    p: Expr | Callable
    bodies: tuple
    glue: Expr | Callable | None = None
    init: float | None = None
    dbodies: tuple | None = None
    last: int | None = None


class _Compiled:
    """Scalar and vector evaluators for an Expr or a callable of (x, n)."""

    def __init__(self, src, derivative=None):
        self.src = src
        if isinstance(src, Expr):
            self.scalar = compile_expr(src)
            self.vector = lambda x, n, _e=src: evaluate_array(_e, x, n)
            if derivative is None:
                try:
                    derivative = diff(src)
                except ExprError:
                    derivative = None
            self.d = None if derivative is None else (compile_expr(derivative) if isinstance(derivative, Expr) else derivative)
        else:
            self.scalar = src
            self.vector = src
            self.d = derivative

    def text(self, n: int | None = None) -> str:
        if isinstance(self.src, Expr):
            e = self.src if n is None else simplify(substitute(self.src, n=Num(n)))
            return to_text(e)
        return getattr(self.src, "__name__", "<callable>")


def _as_expr(src):
    return parse(src) if isinstance(src, str) else src


class PiecewiseFn(Regulated):
    def __init__(
        self,
        a: float,
        b: float,
        pieces: Sequence[Piece] = (),
        family: Family | None = None,
        point_values: dict[float, float] | None = None,
        *,
        name: str = "f",
        horizon: int = DEFAULT_HORIZON,
        check: bool = True,
    ):
        if not a < b:
            raise ConstructionError(f"{name}: empty domain ({a!r}, {b!r})")
        self.a, self.b, self.name = float(a), float(b), name
        self.pieces = [Piece(float(p.left), float(p.right), _as_expr(p.body)) for p in pieces]
        self._piece_bodies = [_Compiled(p.body) for p in self.pieces]
        self._rights = [p.right for p in self.pieces]
        self.family = family
        self.point_values = {float(k): float(v) for k, v in (point_values or {}).items()}
        self.horizon = horizon
        self._lock = threading.Lock()
        self._ptable: np.ndarray | None = None
        self._offsets: np.ndarray | None = None  # longdouble, index n - start
        if family is not None:
            self._p = _Compiled(_as_expr(family.p))
            bodies = [_as_expr(e) for e in family.bodies]
            dbodies = family.dbodies or (None,) * len(bodies)
            self._fbodies = [_Compiled(e, d) for e, d in zip(bodies, dbodies)]
            self._glue = None if family.glue is None else _Compiled(_as_expr(family.glue))
            self._init = family.init
        self._check_tiling()
        if check:
            self._check_family()
            self._check_endpoints()

    # construction checks --------------------------------------------------
    def _family_start(self) -> float:
        return self.p(self.family.start)

    def _check_tiling(self) -> None:
        edge = self.a
        for i, pc in enumerate(self.pieces):
            if pc.left != edge:
                raise ConstructionError(f"{self.name}: piece {i} starts at {pc.left!r}, expected {edge!r} (gap or overlap)")
            if not pc.left < pc.right:
                raise ConstructionError(f"{self.name}: piece {i} is empty")
            edge = pc.right
        if self.family is None:
            if edge != self.b:
                raise ConstructionError(f"{self.name}: pieces end at {edge!r}, domain ends at {self.b!r}")
            return
        p0 = self._family_start()
        if self.pieces:
            if p0 != edge:
                raise ConstructionError(f"{self.name}: family starts at p({self.family.start})={p0!r}, pieces end at {edge!r}")
        elif not (p0 <= self.a < self.p(self.family.start + 1)):
            raise ConstructionError(f"{self.name}: first family cell does not contain the left end {self.a!r}")

    def _check_family(self) -> None:
        if self.family is None:
            return
        n = np.arange(self.family.start, self._horizon_end() + 1, dtype=float)
        try:
            pv = np.asarray(self._p.vector(np.zeros_like(n), n), dtype=float)
        except EVAL_ERRORS as exc:
            raise ConstructionError(f"{self.name}: breakpoint formula fails on the horizon: {exc}") from None
        if not np.all(np.diff(pv) > 0):
            bad = int(np.argmin(np.diff(pv) > 0)) + self.family.start
            raise ConstructionError(f"{self.name}: p(n) is not strictly increasing at n={bad}")
        if not np.all(pv < self.b):
            raise ConstructionError(f"{self.name}: family breakpoints reach the right end {self.b!r}")
        if self._glue is not None:
            self._offsets_upto(self._horizon_end())

    def _horizon_end(self) -> int:
        end = self.family.start + self.horizon
        if self.family.last is not None:
            end = min(end, self.family.last)
        return end

    def _check_endpoints(self) -> None:
        """Interior one-sided limits must exist and be finite."""
        inner = [pc.right for pc in self.pieces if pc.right < self.b]
        if self.family is not None:
            end = self._horizon_end()
            inner += [self.p(n) for n in range(self.family.start + 1, min(end, self.family.start + 64))]
            inner += [self.p(end)]
        for q in inner:
            if not (self.a < q < self.b):
                continue
            pair = self.one_sided(q)
            if not (math.isfinite(pair.left) and math.isfinite(pair.right)):
                raise ConstructionError(f"{self.name}: infinite one-sided limit at interior point {q!r}")
        for q in self.point_values:
            if not (self.a < q < self.b) or not self.is_knot(q):
                raise ConstructionError(f"{self.name}: point value at {q!r} is not at a cell boundary")

    # family machinery -----------------------------------------------------
    def p(self, n: int) -> float:
        return float(self._p.scalar(0.0, n))

    def _body_index(self, n: int) -> int:
        return n % len(self._fbodies)

    def _offsets_upto(self, m: int) -> np.ndarray:
        """Glue offsets for family cells start..m (longdouble), grown lazily."""
        fam = self.family
        with self._lock:
            have = -1 if self._offsets is None else fam.start + len(self._offsets) - 1
            if m <= have:
                return self._offsets
            if m - fam.start >= OFFSET_CAP:
                raise HorizonExhausted(f"{self.name}: glue offsets needed for cell {m}, cap is {OFFSET_CAP} cells")
            target = min(max(m, fam.start + 2 * (have - fam.start + 1), fam.start + 1024), fam.start + OFFSET_CAP - 1)
            if fam.last is not None:
                target = min(target, fam.last)
            if self._offsets is None:
                first = np.array([self._initial_offset()], dtype=np.longdouble)
                lo = fam.start + 1
            else:
                first = self._offsets
                lo = have + 1
            steps = self._glue_steps(lo, target)
            tail = first[-1] + np.cumsum(steps.astype(np.longdouble))
            self._offsets = np.concatenate([first, tail])
            return self._offsets

    def _initial_offset(self) -> float:
        fam = self.family
        if self._init is not None:
            return float(self._init)
        if not self.pieces:
            return 0.0
        q = self._family_start()
        left = cell_limit(self._piece_cell(len(self.pieces) - 1), q, -1, self.name)
        body = self._fbodies[self._body_index(fam.start)]
        raw = cell_limit(Cell(q, self.p(fam.start + 1), lambda y: body.scalar(y, fam.start)), q, 1, self.name)
        jump = float(self._glue.scalar(0.0, fam.start))
        return left + jump - raw

    def _glue_steps(self, lo: int, hi: int) -> np.ndarray:
        """offset(n) - offset(n-1) for n = lo..hi."""
        n = np.arange(lo, hi + 1, dtype=float)
        try:
            q = np.asarray(self._p.vector(np.zeros_like(n), n), dtype=float)
            left = self._family_vector(q, n - 1)
            right = self._family_vector(q, n)
            jump = np.broadcast_to(np.asarray(self._glue.vector(q, n), dtype=float), n.shape)
            steps = left - right + jump
            if np.all(np.isfinite(steps)):
                return steps
        except EVAL_ERRORS:
            pass
        # bodies undefined at their ends: fall back to per-cell limits
        out = np.empty(len(n))
        for i, k in enumerate(range(lo, hi + 1)):
            qk = self.p(k)
            lb, rb = self._fbodies[self._body_index(k - 1)], self._fbodies[self._body_index(k)]
            lcell = Cell(self.p(k - 1), qk, lambda y, _b=lb, _k=k - 1: _b.scalar(y, _k))
            rcell = Cell(qk, self.p(k + 1), lambda y, _b=rb, _k=k: _b.scalar(y, _k))
            out[i] = cell_limit(lcell, qk, -1, self.name) - cell_limit(rcell, qk, 1, self.name) + float(self._glue.scalar(qk, k))
        return out

    def _family_vector(self, x: np.ndarray, n: np.ndarray) -> np.ndarray:
        k = len(self._fbodies)
        out = np.empty(len(x))
        idx = np.mod(n.astype(np.int64), k)
        for r in range(k):
            mask = idx == r
            if mask.any():
                out[mask] = np.broadcast_to(np.asarray(self._fbodies[r].vector(x[mask], n[mask]), dtype=float), (int(mask.sum()),))
        return out

    def offset(self, n: int) -> float:
        if self._glue is None:
            return 0.0
        offs = self._offsets_upto(n)
        return float(offs[n - self.family.start])

    def _knot_table(self, x: float) -> np.ndarray | None:
        """p(start), p(start+1), ... far enough to pass x (vectorized, grown by doubling)."""
        fam = self.family
        with self._lock:
            table = self._ptable
            while table is None or table[-1] < x:
                size = 1024 if table is None else 2 * len(table)
                if size > OFFSET_CAP:
                    return None
                n = np.arange(fam.start, fam.start + size, dtype=float)
                try:
                    table = np.asarray(self._p.vector(np.zeros_like(n), n), dtype=float)
                except EVAL_ERRORS:
                    return None
                self._ptable = table
            return table

    def family_index(self, x: float) -> int:
        """n with p(n) < x <= p(n+1).

        A vectorized table of breakpoints narrows the search; the answer is
        confirmed with the scalar p so that it agrees with knots().
        """
        s = self.family.start
        if x <= self.p(s + 1):
            return s
        table = self._knot_table(x)
        if table is not None:
            n = s + max(0, int(np.searchsorted(table, x, side="left")) - 1)
            while n > s and self.p(n) >= x:
                n -= 1
            while self.p(n + 1) < x:
                n += 1
            return n
        lo, step = s + 1, 1
        hi = lo + step
        while self.p(hi) < x:
            lo = hi
            step *= 2
            hi = lo + step
            if step > 2**62:
                raise HorizonExhausted(f"{self.name}: breakpoints never reach x={x!r}")
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if self.p(mid) < x:
                lo = mid
            else:
                hi = mid
        return lo

    # cells ---------------------------------------------------------------
    def _piece_cell(self, i: int) -> Cell:
        pc, comp = self.pieces[i], self._piece_bodies[i]
        dfn = None if comp.d is None else (lambda y, _d=comp.d: _d(y, None))
        return Cell(pc.left, pc.right, lambda y, _f=comp.scalar: _f(y, None), dfn, None, comp.text)

    def family_cell(self, n: int) -> Cell:
        if self.family.last is not None and n > self.family.last:
            raise HorizonExhausted(f"{self.name}: cell {n} is past the last available index {self.family.last}")
        comp = self._fbodies[self._body_index(n)]
        off = self.offset(n)
        fn = (lambda y, _f=comp.scalar, _n=n, _o=off: _f(y, _n) + _o)
        dfn = None if comp.d is None else (lambda y, _d=comp.d, _n=n: _d(y, _n))
        def label(_comp=comp, _n=n, _o=off) -> str:
            text = _comp.text(_n)
            return f"{text} + {_o!r}" if _o else text

        return Cell(self.p(n), self.p(n + 1), fn, dfn, n, label)

    def cell_at(self, x: float) -> Cell:
        i = bisect.bisect_left(self._rights, x)
        if i < len(self.pieces):
            return self._piece_cell(i)
        if self.family is None:
            return self._piece_cell(len(self.pieces) - 1)
        return self.family_cell(self.family_index(x))

    def cell_after(self, x: float) -> Cell:
        i = bisect.bisect_right(self._rights, x)
        if i < len(self.pieces):
            return self._piece_cell(i)
        if self.family is None:
            return self._piece_cell(len(self.pieces) - 1)
        n = self.family_index(x)
        if self.p(n + 1) == x:
            n += 1
        return self.family_cell(n)

    def knots(self, s: float, t: float, cap: int = KNOT_CAP) -> list[float]:
        out = [r for r in self._rights if s < r < t and r < self.b]
        if self.family is not None and t > self._family_start():
            n = self.family_index(max(s, self._family_start())) if s > self._family_start() else self.family.start
            n += 1
            while True:
                q = self.p(n)
                if q >= t:
                    break
                if q > s:
                    out.append(q)
                    if len(out) > cap:
                        raise HorizonExhausted(f"{self.name}: more than {cap} breakpoints in ({s!r}, {t!r})")
                n += 1
        return out

    def value(self, x: float) -> float:
        if x in self.point_values:
            return self.point_values[x]
        return super().value(x)

    @classmethod
    def from_expr(cls, body: Expr | str, a: float = -INF, b: float = INF, name: str = "f") -> "PiecewiseFn":
        return cls(a, b, [Piece(a, b, _as_expr(body))], name=name)


def constant(c: float, a: float = -INF, b: float = INF) -> PiecewiseFn:
    return PiecewiseFn(a, b, [Piece(a, b, Num(c))], name=repr(c))


def identity(a: float = -INF, b: float = INF) -> PiecewiseFn:
    return PiecewiseFn.from_expr("x", a, b, name="id")


# ---------------------------------------------------------------------------
# lazy wrappers


def _lift(v, like: Regulated) -> Regulated:
    if isinstance(v, Regulated):
        return v
    return constant(float(v), like.a, like.b)


_OPS = {
    "+": lambda u, v: u + v,
    "-": lambda u, v: u - v,
    "*": lambda u, v: u * v,
    "/": lambda u, v: u / v,
}


def _d_op(op, f, df, g, dg):
    if df is None or dg is None:
        return None
    if op == "+":
        return lambda y: df(y) + dg(y)
    if op == "-":
        return lambda y: df(y) - dg(y)
    if op == "*":
        return lambda y: df(y) * g(y) + f(y) * dg(y)
    return lambda y: (df(y) * g(y) - f(y) * dg(y)) / g(y) ** 2


class Combined(Regulated):
    """f op g on the common refinement of their cells."""

    def __init__(self, op: str, f: Regulated, g: Regulated):
        self.op, self.f, self.g = op, f, g
        self.a, self.b = max(f.a, g.a), min(f.b, g.b)
        self.name = f"({f.name} {op} {g.name})"

    @classmethod
    def of(cls, op, f, g) -> "Combined":
        if not isinstance(f, Regulated):
            f = _lift(f, g)
        if not isinstance(g, Regulated):
            g = _lift(g, f)
        return cls(op, f, g)

    def _merge(self, cf: Cell, cg: Cell) -> Cell:
        op = _OPS[self.op]
        fn = (lambda y, _f=cf.fn, _g=cg.fn: op(_f(y), _g(y)))
        return Cell(max(cf.left, cg.left), min(cf.right, cg.right), fn, _d_op(self.op, cf.fn, cf.dfn, cg.fn, cg.dfn))

    def cell_at(self, x):
        return self._merge(self.f.cell_at(x), self.g.cell_at(x))

    def cell_after(self, x):
        return self._merge(self.f.cell_after(x), self.g.cell_after(x))

    def knots(self, s, t, cap=KNOT_CAP):
        return sorted(set(self.f.knots(s, t, cap)) | set(self.g.knots(s, t, cap)))

    def value(self, x):
        return _OPS[self.op](self.f.value(x), self.g.value(x))

    def one_sided(self, x):
        self.check_domain(x)
        if not self.is_knot(x):
            v = self.value(x)
            return OneSidedPair(v, v)
        pf, pg = self.f.one_sided(x), self.g.one_sided(x)
        op = _OPS[self.op]
        try:
            return OneSidedPair(op(pf.left, pg.left), op(pf.right, pg.right))
        except ZeroDivisionError:
            return super().one_sided(x)


class Shifted(Regulated):
    """x -> f(x + c)."""

    def __init__(self, f: Regulated, c: float):
        self.f, self.c = f, float(c)
        self.a, self.b = f.a - self.c, f.b - self.c
        self.name = f"{f.name}(x+{self.c!r})"

    def _move(self, cell: Cell) -> Cell:
        c = self.c
        dfn = None if cell.dfn is None else (lambda y, _d=cell.dfn: _d(y + c))
        return Cell(cell.left - c, cell.right - c, lambda y, _f=cell.fn: _f(y + c), dfn, cell.n, cell.label_src)

    def cell_at(self, x):
        return self._move(self.f.cell_at(x + self.c))

    def cell_after(self, x):
        return self._move(self.f.cell_after(x + self.c))

    def is_knot(self, x):
        return self.f.is_knot(x + self.c)

    def knots(self, s, t, cap=KNOT_CAP):
        return [q - self.c for q in self.f.knots(s + self.c, t + self.c, cap)]

    def value(self, x):
        return self.f.value(x + self.c)

    def one_sided(self, x):
        self.check_domain(x)
        return self.f.one_sided(x + self.c)


class Restricted(Regulated):
    """f on a sub-interval (a, b) of its domain."""

    def __init__(self, f: Regulated, a: float, b: float):
        if not (f.a <= a < b <= f.b):
            raise ConstructionError(f"({a!r}, {b!r}) is not inside the domain of {f.name}")
        self.f, self.a, self.b, self.name = f, float(a), float(b), f.name

    def cell_at(self, x):
        return self.f.cell_at(x)

    def cell_after(self, x):
        return self.f.cell_after(x)

    def knots(self, s, t, cap=KNOT_CAP):
        return self.f.knots(max(s, self.a), min(t, self.b), cap)

    def value(self, x):
        return self.f.value(x)

    def one_sided(self, x):
        self.check_domain(x)
        return self.f.one_sided(x)


class OneSidedFn(Regulated):
    """f⁻ (side=-1) or f⁺ (side=+1) as a function: same cells, endpoint values replaced."""

    def __init__(self, f: Regulated, side: int):
        self.f, self.side = f, side
        self.a, self.b = f.a, f.b
        self.name = f"{f.name}{'-' if side < 0 else '+'}"

    def cell_at(self, x):
        return self.f.cell_at(x)

    def cell_after(self, x):
        return self.f.cell_after(x)

    def knots(self, s, t, cap=KNOT_CAP):
        return self.f.knots(s, t, cap)

    def value(self, x):
        pair = self.f.one_sided(x)
        return pair.left if self.side < 0 else pair.right



def left_fn(f: Regulated) -> OneSidedFn:
    return OneSidedFn(f, -1)


def right_fn(f: Regulated) -> OneSidedFn:
    return OneSidedFn(f, 1)


def materialize(f: PiecewiseFn, side: int) -> PiecewiseFn:
    """f⁻ (side < 0) or f⁺ as a PiecewiseFn: the same cells, knot values replaced.

    Only the finite pieces can be rewritten; a family knot already carries the
    left limit (cells are closed on the right), so f⁺ of a family is refused.
    """
    if f.family is not None and side > 0:
        raise ConstructionError(f"{f.name}⁺ of a function with an infinite family cannot be materialized")
    qs = [r for r in f._rights if f.a < r < f.b]
    values = {q: (f.left_limit(q) if side < 0 else f.right_limit(q)) for q in qs}
    suffix = "-" if side < 0 else "+"
    return PiecewiseFn(f.a, f.b, f.pieces, f.family, values, name=f"{f.name}{suffix}", horizon=f.horizon, check=False)


class Reflected(Regulated):
    """x -> sign * f(-x) on (-b, -a).

    Cells are re-cut so they still own their right endpoint; only one-sided
    limits are preserved exactly (the point value at a knot is f(-x), which
    belonged to the other side before reflection).
    """

    def __init__(self, f: Regulated, sign: float = 1.0):
        self.f, self.sign = f, float(sign)
        self.a, self.b = -f.b, -f.a
        self.name = f"{'-' if sign < 0 else ''}{f.name}(-x)"

    def _flip(self, cell: Cell) -> Cell:
        s = self.sign
        dfn = None if cell.dfn is None else (lambda y, _d=cell.dfn: -s * _d(-y))
        return Cell(-cell.right, -cell.left, lambda y, _f=cell.fn: s * _f(-y), dfn, cell.n, cell.label_src)

    def cell_at(self, x):
        return self._flip(self.f.cell_after(-x))

    def cell_after(self, x):
        return self._flip(self.f.cell_at(-x))

    def knots(self, s, t, cap=KNOT_CAP):
        return sorted(-q for q in self.f.knots(-t, -s, cap))

    def value(self, x):
        return self.sign * self.f.value(-x)

    def one_sided(self, x):
        self.check_domain(x)
        pair = self.f.one_sided(-x)
        return OneSidedPair(self.sign * pair.right, self.sign * pair.left)


# ---------------------------------------------------------------------------
# module-level operations


def locate(f: Regulated, x: float) -> Cell:
    return f.locate(x)


def one_sided(f: Regulated, x: float) -> OneSidedPair:
    return f.one_sided(x)


def breakpoints(f: Regulated, s: float, t: float, cap: int = KNOT_CAP) -> list[tuple[float, float]]:
    # (s, t) is open, so it may reach the domain ends
    if not (f.a <= s < t <= f.b):
        raise DomainError(s if not f.a <= s else t, f.a, f.b, f.name)
    return f.breakpoints(s, t, cap)


def end_start(f: Regulated, endpoint: str) -> float:
    """Starting scale for end_behavior: h0 toward a finite end, x0 toward an infinite one."""
    a, b = f.a, f.b
    if endpoint == "b":
        if math.isinf(b):
            return max(4.0, 2.0 * abs(a) + 1.0) if math.isfinite(a) else 4.0
        return min(1.0, b - a) / 4.0
    if math.isinf(a):
        return max(4.0, 2.0 * abs(b) + 1.0) if math.isfinite(b) else 4.0
    return min(1.0, b - a) / 4.0


def end_points(f: Regulated, endpoint: str, steps: int, start: float | None = None) -> Callable[[int], float]:
    """x_k -> endpoint: b - h0 2^-k, x0 2^k (mirrored at a)."""
    if endpoint not in ("a", "b"):
        raise ValueError(f"endpoint must be 'a' or 'b', got {endpoint!r}")
    s = end_start(f, endpoint) if start is None else start
    if endpoint == "b":
        if math.isinf(f.b):
            return lambda k: s * 2.0**k
        return lambda k: f.b - s * 2.0**-k
    if math.isinf(f.a):
        return lambda k: -s * 2.0**k
    return lambda k: f.a + s * 2.0**-k


def end_behavior(
    f: Regulated,
    endpoint: str = "b",
    *,
    kmax: int | None = None,
    start: float | None = None,
    rtol: float = limits.RTOL,
    atol: float = limits.ATOL,
) -> LimitEstimate:
    """Limit of f⁻(x) as x tends to the endpoint ('a' or 'b')."""
    end = f.b if endpoint == "b" else f.a
    if kmax is None:
        if math.isinf(end):
            kmax = 40
        else:
            kmax = limits.steps_until(end_start(f, endpoint) if start is None else start, limits.h_floor(end))
    xk = end_points(f, endpoint, kmax, start)
    return limits.sequence_limit(lambda k: f.left_limit(xk(k)), kmax, rtol=rtol, atol=atol)
