"""Extended reals [-inf, inf] as plain floats with guarded arithmetic.

Python floats already order +-inf correctly; what they get wrong for our
purposes is that ``inf - inf`` and ``0 * inf`` silently give NaN.  The helpers
here raise instead, so an undefined operation can never leak into a limit.
"""

from __future__ import annotations

import math

INF = math.inf


class UndefinedOperation(ArithmeticError):
    """inf - inf, 0 * inf, inf / inf and friends."""


def check(x: float) -> float:
    if math.isnan(x):
        raise UndefinedOperation("NaN is not an extended real")
    return float(x)


def is_finite(x: float) -> bool:
    return math.isfinite(x)


def add(x: float, y: float) -> float:
    if math.isinf(x) and math.isinf(y) and (x > 0) != (y > 0):
        raise UndefinedOperation(f"{fmt(x)} + {fmt(y)}")
    return x + y


def sub(x: float, y: float) -> float:
    return add(x, -y)


def mul(x: float, y: float) -> float:
    if (math.isinf(x) and y == 0) or (math.isinf(y) and x == 0):
        raise UndefinedOperation(f"{fmt(x)} * {fmt(y)}")
    return x * y


def div(x: float, y: float) -> float:
    if y == 0:
        raise UndefinedOperation(f"{fmt(x)} / 0")
    if math.isinf(x) and math.isinf(y):
        raise UndefinedOperation(f"{fmt(x)} / {fmt(y)}")
    if math.isinf(y):
        return 0.0
    return x / y


def parse(text: str) -> float:
    """Parse ``+inf``, ``-inf``, ``inf`` or a decimal literal."""
    s = text.strip().lower()
    if s in ("inf", "+inf", "infinity", "+infinity", "oo", "+oo"):
        return INF
    if s in ("-inf", "-infinity", "-oo"):
        return -INF
    value = float(s)
    return check(value)


def fmt(x: float) -> str:
    if x == INF:
        return "+inf"
    if x == -INF:
        return "-inf"
    return repr(float(x))


def to_json(x: float | None):
    """Finite floats pass through; infinities become the strings '+inf'/'-inf'."""
    if x is None:
        return None
    if math.isinf(x):
        return fmt(x)
    return float(x)
