"""
Derivative Helpers
First and second derivatives of any generic-scalar map by evaluating it over
jacobian, dual and second tangent algebras.
"""
from typing import Callable, List, Sequence

from tfmonad.services.weil import (
    T2_E1,
    T2_E12,
    T2_E2,
    WeilElement,
    dual_numbers,
    jacobian_algebra,
    second_tangent_algebra,
)

MapFn = Callable[[tuple], tuple]


def _coefficient(value, index: int):
    if isinstance(value, WeilElement):
        return value.coeffs[index]
    return 0


def _scalar(value):
    if isinstance(value, WeilElement):
        return value.scalar
    return value


def jacobian(f: MapFn, point: Sequence, directions: Sequence[Sequence]) -> List[list]:
    """
    Matrix J with J[i][k] = derivative of output i along directions[k] at point.

    All directions are handled in a single evaluation over R[e_1..e_m]/(e_i e_j).
    """
    m = len(directions)
    algebra = jacobian_algebra(m)
    lifted = tuple(
        algebra.lift(x, {k + 1: d[j] for k, d in enumerate(directions) if d[j] != 0})
        for j, x in enumerate(point)
    )
    out = f(lifted)
    return [[_coefficient(y, k + 1) for k in range(m)] for y in out]


def coordinate_directions(n: int, indices: Sequence[int]) -> List[tuple]:
    return [tuple(1 if j == i else 0 for j in range(n)) for i in indices]


def partial_jacobian(f: MapFn, point: Sequence, indices: Sequence[int]) -> List[list]:
    """Jacobian with respect to the listed input coordinates."""
    return jacobian(f, point, coordinate_directions(len(point), indices))


def tangent_evaluate(f: MapFn, point: Sequence, direction: Sequence) -> tuple:
    """(f(x), f'(x)v) as a pair of tuples, by one dual-number evaluation."""
    algebra = dual_numbers()
    lifted = tuple(algebra.lift(x, {1: v} if v != 0 else None) for x, v in zip(point, direction))
    out = f(lifted)
    return tuple(_scalar(y) for y in out), tuple(_coefficient(y, 1) for y in out)


def second_tangent_evaluate(f: MapFn, x: Sequence, v: Sequence, xdot: Sequence, vdot: Sequence) -> tuple:
    """
    Chart formula for T^2 f at (x, v, xdot, vdot).

    Returns (f(x), f'(x)v, f'(x)xdot, f'(x)vdot + f''(x)(v, xdot)).
    """
    algebra = second_tangent_algebra()
    lifted = tuple(
        algebra.element(_t2_coeffs(a, b, c, d))
        for a, b, c, d in zip(x, v, xdot, vdot)
    )
    out = f(lifted)
    return (
        tuple(_scalar(y) for y in out),
        tuple(_coefficient(y, T2_E1) for y in out),
        tuple(_coefficient(y, T2_E2) for y in out),
        tuple(_coefficient(y, T2_E12) for y in out),
    )


def _t2_coeffs(x, v, xdot, vdot) -> tuple:
    coeffs = [0, 0, 0, 0]
    coeffs[0] = x
    coeffs[T2_E1] = v
    coeffs[T2_E2] = xdot
    coeffs[T2_E12] = vdot
    return tuple(coeffs)


def mixed_second_derivative(f: MapFn, point: Sequence, u: Sequence, w: Sequence) -> tuple:
    """f''(x)(u, w) from the e1e2 coefficient of f(x + u e1 + w e2)."""
    zeros = (0,) * len(point)
    return second_tangent_evaluate(f, point, u, w, zeros)[3]
