"""
Numeric Helpers
Scalar formatting, residual norms and periodic differences shared by the verifiers.
"""
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Tuple, Union

from tfmonad.services.weil import WeilElement

Number = Union[int, Fraction, float]


def real(value) -> Number:
    """Scalar part of a Weil element, or the value itself."""
    if isinstance(value, WeilElement):
        return value.scalar
    return value


def format_scalar(value: Number) -> str:
    """Exact text for a residual: "p/q" for rationals, repr for floats."""
    if isinstance(value, bool):
        return str(value)
    if isinstance(value, int):
        return str(value)
    if isinstance(value, Fraction):
        if value.denominator == 1:
            return str(value.numerator)
        return f"{value.numerator}/{value.denominator}"
    return repr(float(value))


def format_vector(values: Sequence[Number]) -> list:
    return [format_scalar(real(v)) for v in values]


def wrap_difference(diff: Number, period: Optional[Number]) -> Number:
    """Representative of diff modulo period in [-period/2, period/2]."""
    if not period:
        return diff
    return diff - period * round(diff / period)


def vector_difference(a: Sequence, b: Sequence, periods: Optional[Sequence[Optional[Number]]] = None) -> Tuple:
    periods = periods or (None,) * len(a)
    return tuple(wrap_difference(real(x) - real(y), p) for x, y, p in zip(a, b, periods))


def max_abs(values: Iterable[Number]) -> Number:
    """Largest absolute value, keeping the exact type when all inputs are exact."""
    best: Number = 0
    for v in values:
        v = abs(real(v))
        if v > best:
            best = v
    return best


def residual(a: Sequence, b: Sequence, periods: Optional[Sequence[Optional[Number]]] = None) -> Number:
    return max_abs(vector_difference(a, b, periods))


def as_float_list(values: Sequence) -> list:
    return [float(real(v)) for v in values]


def is_exact(value) -> bool:
    if isinstance(value, WeilElement):
        return all(is_exact(c) for c in value.coeffs)
    return isinstance(value, (int, Fraction)) and not isinstance(value, bool)
