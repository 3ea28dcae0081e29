"""Numeric limits of sampled sequences.

Every ``lim`` in this package is realised the same way: the quantity is
sampled along a geometric sequence (``h_k = h0 * 2**-k`` towards a finite
point, ``x_k = x0 * 2**k`` towards infinity), a handful of extrapolation
schemes are run on the samples, and a limit is accepted as soon as three
consecutive extrapolants of one scheme agree to ``rtol``/``atol``.

Stopping at the *first* agreement matters: difference quotients lose digits
as ``h`` shrinks, so the deep tail of a sample sequence is usually noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

from regcalc.expr import ExprError

CONVERGED = "converged"
DIVERGED_POS = "diverged_pos"
DIVERGED_NEG = "diverged_neg"
NO_LIMIT = "no_limit"
INCONCLUSIVE = "inconclusive"

RTOL = 1e-9
ATOL = 1e-12


@dataclass(frozen=True)
class LimitEstimate:
    status: str
    value: float | None
    err_estimate: float
    samples_used: int
    method: str = ""
    # (upper, lower) estimates of two subsequences when status is no_limit
    subsequences: tuple[float, float] | None = None
    samples: tuple[float, ...] = field(default=(), repr=False, compare=False)

    @property
    def converged(self) -> bool:
        return self.status == CONVERGED

    @property
    def diverged(self) -> bool:
        return self.status in (DIVERGED_POS, DIVERGED_NEG)

    @property
    def exists(self) -> bool:
        """A limit in the extended reals was found."""
        return self.converged or self.diverged

    def as_extreal(self) -> float | None:
        if self.status == DIVERGED_POS:
            return math.inf
        if self.status == DIVERGED_NEG:
            return -math.inf
        if self.status == CONVERGED:
            return self.value
        return None

    def to_json(self) -> dict:
        from regcalc.extreal import to_json

        return {
            "status": self.status,
            "value": to_json(self.as_extreal() if self.exists else self.value),
            "err_estimate": to_json(self.err_estimate),
            "samples_used": self.samples_used,
            "method": self.method,
            "subsequences": None if self.subsequences is None else [to_json(v) for v in self.subsequences],
        }


def exact(value: float, method: str = "exact") -> LimitEstimate:
    """Wrap a value that needed no sampling."""
    if value == math.inf:
        return LimitEstimate(DIVERGED_POS, math.inf, 0.0, 0, method)
    if value == -math.inf:
        return LimitEstimate(DIVERGED_NEG, -math.inf, 0.0, 0, method)
    return LimitEstimate(CONVERGED, float(value), 0.0, 0, method)


def close(a: float, b: float, rtol: float = RTOL, atol: float = ATOL) -> bool:
    if math.isinf(a) or math.isinf(b):
        return a == b
    return abs(a - b) <= max(rtol * max(abs(a), abs(b)), atol)


# ---------------------------------------------------------------------------
# extrapolation schemes; each maps the raw samples to a sequence of estimates


def _richardson(values: Sequence[float], order: int, step: int = 1) -> list[float]:
    """Eliminate error terms h^step, h^(2 step), ... up to ``order`` terms (ratio-2 samples)."""
    level = list(values)
    for j in range(1, order + 1):
        factor = 2.0 ** (step * j)
        level = [(factor * level[i + 1] - level[i]) / (factor - 1.0) for i in range(len(level) - 1)]
    return level


def _repeated_first_order(values: Sequence[float], times: int) -> list[float]:
    """Apply the h-eliminating step repeatedly; handles h*log(h) terms."""
    level = list(values)
    for _ in range(times):
        level = [2.0 * level[i + 1] - level[i] for i in range(len(level) - 1)]
    return level


def _aitken(values: Sequence[float]) -> list[float]:
    out = []
    for i in range(len(values) - 2):
        a, b, c = values[i], values[i + 1], values[i + 2]
        d2 = c - 2.0 * b + a
        if d2 == 0 or not math.isfinite(d2):
            out.append(c)
        else:
            out.append(c - (c - b) ** 2 / d2)
    return out


SCHEMES: tuple[tuple[str, Callable[[Sequence[float]], list[float]]], ...] = (
    ("raw", list),
    ("richardson1", lambda v: _richardson(v, 1)),
    ("richardson2", lambda v: _richardson(v, 2)),
    ("richardson-even2", lambda v: _richardson(v, 2, step=2)),
    ("richardson3", lambda v: _richardson(v, 3)),
    ("repeated1x2", lambda v: _repeated_first_order(v, 2)),
    ("aitken", _aitken),
    ("aitken2", lambda v: _aitken(_aitken(v))),
)


def _converged_tail(seq: Sequence[float], rtol: float, atol: float) -> bool:
    if len(seq) < 3:
        return False
    a, b, c = seq[-3], seq[-2], seq[-1]
    if not all(math.isfinite(v) for v in (a, b, c)):
        return False
    return close(a, b, rtol, atol) and close(b, c, rtol, atol) and close(a, c, rtol, atol)


def _plausible(estimate: float, raw: Sequence[float], rtol: float, atol: float) -> bool:
    """Reject accelerated values that the raw samples give no reason to believe.

    The raw steps must be contracting, and the jump from the last raw sample
    to the estimate must be explainable by the remaining geometric tail.
    """
    if len(raw) < 3:
        return False
    last = raw[-1]
    step, prev = abs(raw[-1] - raw[-2]), abs(raw[-2] - raw[-3])
    tol = max(rtol * abs(last), atol)
    if step <= tol:
        return abs(estimate - last) <= 10 * tol
    if prev == 0 or step >= 0.99 * prev:
        return False
    ratio = step / prev
    return abs(estimate - last) <= 10.0 * step / (1.0 - ratio) + tol


def analyse(values: Sequence[float], rtol: float = RTOL, atol: float = ATOL) -> LimitEstimate | None:
    """Return a converged estimate if some scheme has settled, else None."""
    for name, scheme in SCHEMES:
        seq = scheme(values)
        if _converged_tail(seq, rtol, atol):
            estimate = seq[-1]
            if name != "raw" and not _plausible(estimate, values, rtol, atol):
                continue
            err = max(abs(seq[-1] - seq[-2]), abs(seq[-2] - seq[-3]))
            return LimitEstimate(CONVERGED, estimate, err, len(values), name, samples=tuple(values))
    return None


def classify(values: Sequence[float], rtol: float = RTOL, atol: float = ATOL) -> LimitEstimate:
    """Classify a sample sequence that never converged."""
    n = len(values)
    samples = tuple(values)
    if n == 0:
        return LimitEstimate(INCONCLUSIVE, None, math.inf, 0, "none")
    last = values[-1]
    if math.isinf(last):
        status = DIVERGED_POS if last > 0 else DIVERGED_NEG
        return LimitEstimate(status, last, 0.0, n, "overflow", samples=samples)

    if n >= 9:
        tail = values[-9:]
        steps = [tail[i + 1] - tail[i] for i in range(8)]
        rising = all(s > 0 for s in steps)
        falling = all(s < 0 for s in steps)
        if rising or falling:
            recent = sum(abs(s) for s in steps[4:])
            earlier = sum(abs(s) for s in steps[:4])
            if recent >= 0.95 * earlier:
                status = DIVERGED_POS if rising else DIVERGED_NEG
                return LimitEstimate(status, math.copysign(math.inf, steps[-1]), 0.0, n, "monotone-growth", samples=samples)

    # even/odd subsequences settling to different values
    if n >= 10:
        even = analyse(values[0::2], rtol, atol)
        odd = analyse(values[1::2], rtol, atol)
        if even and odd and abs(even.value - odd.value) > 10 * max(rtol * max(abs(even.value), abs(odd.value)), atol):
            hi, lo = max(even.value, odd.value), min(even.value, odd.value)
            return LimitEstimate(NO_LIMIT, None, hi - lo, n, "even-odd", subsequences=(hi, lo), samples=samples)

    # persistent bounded oscillation: spread of the tail is not shrinking
    if n >= 12:
        w = max(6, n // 4)
        recent, earlier = values[-w:], values[-2 * w:-w]
        spread_recent = max(recent) - min(recent)
        spread_earlier = max(earlier) - min(earlier)
        scale = max(1.0, max(abs(v) for v in recent))
        monotone = all(recent[i + 1] >= recent[i] for i in range(w - 1)) or all(
            recent[i + 1] <= recent[i] for i in range(w - 1)
        )
        tol = 10 * max(rtol * scale, atol)
        if not monotone and spread_recent > tol and spread_recent >= 0.5 * spread_earlier:
            # upper/lower subsequences: the samples achieving the tail max and min
            hi, lo = max(recent), min(recent)
            return LimitEstimate(NO_LIMIT, None, hi - lo, n, "oscillation", subsequences=(hi, lo), samples=samples)

    spread = abs(values[-1] - values[-2]) if n >= 2 else math.inf
    return LimitEstimate(INCONCLUSIVE, last, spread, n, "none", samples=samples)


def sequence_limit(
    sample: Callable[[int], float],
    kmax: int,
    *,
    rtol: float = RTOL,
    atol: float = ATOL,
) -> LimitEstimate:
    """Sample ``sample(0), sample(1), ...`` and stop at the first converged scheme.

    A sample raising an expression error ends the sequence (the caller's
    geometric points walked out of where the quantity is defined).
    """
    values: list[float] = []
    for k in range(kmax + 1):
        try:
            v = float(sample(k))
        except (ExprError, ArithmeticError):
            break
        if math.isnan(v):
            break
        values.append(v)
        if math.isinf(v):
            break
        result = analyse(values, rtol, atol)
        if result is not None:
            return result
    return classify(values, rtol, atol)


def steps_until(h0: float, h_min: float, cap: int = 60) -> int:
    """Largest k with h0 * 2**-k >= h_min."""
    if h0 <= h_min:
        return 0
    return min(cap, int(math.floor(math.log2(h0 / h_min))))


def h_floor(x: float) -> float:
    """Smallest usable offset around x before x + h rounds back onto x."""
    return 64.0 * 2.2e-16 * max(1.0, abs(x))


def approach(
    func: Callable[[float], float],
    x: float,
    side: int,
    h0: float,
    *,
    kmax: int = 60,
    rtol: float = RTOL,
    atol: float = ATOL,
) -> LimitEstimate:
    """Limit of ``func(t)`` as t -> x from the left (side=-1) or right (side=+1)."""
    k_last = min(kmax, steps_until(h0, h_floor(x)))
    return sequence_limit(lambda k: func(x + side * h0 * 2.0 ** -k), k_last, rtol=rtol, atol=atol)


def at_infinity(
    func: Callable[[float], float],
    sign: int,
    x0: float,
    *,
    kmax: int = 40,
    rtol: float = RTOL,
    atol: float = ATOL,
) -> LimitEstimate:
    """Limit of ``func(t)`` as t -> sign * inf along t_k = sign * x0 * 2**k."""
    return sequence_limit(lambda k: func(sign * x0 * 2.0 ** k), kmax, rtol=rtol, atol=atol)
