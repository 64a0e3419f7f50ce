import math
from fractions import Fraction

import hypothesis
import hypothesis.strategies as strat
import numpy as np
import pytest
import sympy

from tfmonad.errors import DomainViolationError, InvalidWeilAlgebraError, ParseError
from tfmonad.services.derivatives import jacobian, second_tangent_evaluate, tangent_evaluate
from tfmonad.services.expressions import ChartMap, parse_constant, parse_expression
from tfmonad.services.weil import (
    WeilAlgebra,
    WeilElement,
    dual_numbers,
    jacobian_algebra,
    scalar_primitive,
    second_tangent_algebra,
    taylor_lift,
    tensor_algebra,
    trivial_algebra,
    truncated_polynomial_algebra,
)

rationals = strat.fractions(min_value=-4, max_value=4, max_denominator=12)


def cubic(p):
    x = p[0]
    return (x ** 3 - 2 * x + 1,)


def test_dual_square():
    e = dual_numbers().element((1, 1))
    assert (e * e).coeffs == (1, 2)


def test_dual_cube():
    x = dual_numbers().lift(2, {1: 1})
    assert (x ** 3).coeffs == (8, 12)


def test_dual_division_is_exact():
    D = dual_numbers()
    a = D.element((Fraction(1), Fraction(1)))
    assert (a / a).coeffs == (1, 0)


def test_second_tangent_square():
    out = second_tangent_evaluate(lambda p: (p[0] * p[0],), (1,), (2,), (3,), (0,))
    assert out == ((1,), (4,), (6,), (12,))


def test_second_tangent_with_vdot():
    out = second_tangent_evaluate(lambda p: (p[0] * p[0],), (1,), (2,), (3,), (4,))
    assert out == ((1,), (4,), (6,), (20,))


def test_jacobian_single_pass():
    rows = jacobian(lambda p: (p[0] * p[1], p[0] + p[1]), (2, 3), [(1, 0), (0, 1)])
    assert rows == [[3, 2], [1, 1]]


def test_sin_lift_at_zero():
    e = taylor_lift("sin", dual_numbers().lift(0.0, {1: 1.0}))
    assert e.coeffs == pytest.approx((0.0, 1.0))


def test_exp_taylor_coefficients():
    P = truncated_polynomial_algebra(3)
    e = taylor_lift("exp", P.lift(0.0, {1: 1.0}))
    assert e.coeffs == pytest.approx((1.0, 1.0, 0.5, 1 / 6))


def test_sqrt_at_zero_is_not_differentiable():
    with pytest.raises(DomainViolationError):
        taylor_lift("sqrt", dual_numbers().lift(0.0, {1: 1.0}))


def test_non_nilpotent_structure_is_rejected():
    split_complex = ((0, 0, 0, 1), (0, 1, 1, 1), (1, 0, 1, 1), (1, 1, 0, 1))
    with pytest.raises(InvalidWeilAlgebraError):
        WeilAlgebra(2, 0, split_complex, 2)


def test_builtin_algebras_validate():
    assert second_tangent_algebra().nilpotency == 3
    assert jacobian_algebra(3).dimension == 4


@hypothesis.given(rationals, rationals)
def test_tangent_matches_symbolic_derivative(x, v):
    s = sympy.Symbol("s")
    expected = sympy.diff(s ** 3 - 2 * s + 1, s).subs(s, sympy.Rational(x.numerator, x.denominator))
    value, tangent = tangent_evaluate(cubic, (x,), (v,))
    assert value[0] == x ** 3 - 2 * x + 1
    assert tangent[0] == Fraction(str(expected)) * v


@hypothesis.given(rationals, rationals, rationals)
def test_second_tangent_matches_symbolic(x, v, xdot):
    s = sympy.Symbol("s")
    second = sympy.diff(s ** 3 - 2 * s + 1, s, 2).subs(s, sympy.Rational(x.numerator, x.denominator))
    out = second_tangent_evaluate(cubic, (x,), (v,), (xdot,), (0,))
    assert out[3][0] == Fraction(str(second)) * v * xdot


def test_parse_error_reports_position():
    with pytest.raises(ParseError) as exc:
        ChartMap.from_strings(("x",), ("x +",), ("-1",), ("1",))
    assert exc.value.position == 3


def test_chart_names_are_lowercase():
    with pytest.raises(ParseError) as exc:
        ChartMap.from_strings(("x1",), ("2*X1",), ("-1",), ("1",))
    assert exc.value.position == 2
    assert parse_expression("x_1 + y2", ("x_1", "y2")).variables() == {"x_1", "y2"}


def test_undeclared_variable():
    with pytest.raises(ParseError):
        parse_expression("y + 1", ["x"])


def test_chart_rejects_points_outside_box():
    f = ChartMap.from_strings(("x",), ("x^2",), ("-1",), ("1",))
    with pytest.raises(DomainViolationError):
        f.evaluate((Fraction(2),))


def test_constraint_is_enforced():
    f = ChartMap.from_strings(("x",), ("sqrt(x)",), ("-1",), ("1",), constraints=("x",))
    with pytest.raises(DomainViolationError):
        f.evaluate((-0.5,))


def test_constants():
    assert parse_constant("3/2") == Fraction(3, 2)
    assert parse_constant("2*pi") == pytest.approx(6.283185307179586)


def horner(coeffs, z):
    acc = coeffs[-1]
    for c in reversed(coeffs[:-1]):
        acc = acc * z + c
    return acc


def parts(c):
    return tuple(c.coeffs) if isinstance(c, WeilElement) else (c, 0)


def test_tensor_with_trivial_is_the_same_algebra():
    assert tensor_algebra(trivial_algebra(), dual_numbers()) == dual_numbers()
    assert tensor_algebra(dual_numbers(), trivial_algebra()) == dual_numbers()


def test_dual_tensor_dual_has_mixed_product():
    DD = tensor_algebra(dual_numbers(), dual_numbers())
    e1, e2 = DD.basis_element(2), DD.basis_element(1)
    assert (e1 * e2).coeffs == (0, 0, 0, 1)
    assert (e1 * e1).is_zero()
    assert (e2 * e2).is_zero()
    assert DD.nilpotency == 3


@hypothesis.settings(max_examples=10)
@hypothesis.given(strat.lists(rationals, min_size=2, max_size=6), rationals, rationals, rationals, rationals)
def test_tensor_lift_equals_iterated_dual_lift(coeffs, x, a, b, c):
    D = dual_numbers()
    DD = tensor_algebra(D, D)
    flat = horner(coeffs, DD.element((x, b, a, c)))
    nested = horner(coeffs, D.element((D.element((x, b)), D.element((a, c)))))
    scalar_part, e1_part = parts(nested.coeffs[0]), parts(nested.coeffs[1])
    assert flat.coeffs == scalar_part + e1_part


@pytest.mark.parametrize("x", [-2.5, -0.3, 0.0, 0.7, 1.9])
def test_trivial_lift_is_plain_evaluation(x):
    R = trivial_algebra()
    coeffs = [0.3, -1.7, 2.1, 0.45]
    assert horner(coeffs, R.lift(x)).coeffs == (horner(coeffs, x),)
    for name in ("sin", "cos", "exp"):
        assert taylor_lift(name, R.lift(x)).scalar == scalar_primitive(name, [x])


def test_dual_derivative_matches_central_differences():
    def f(z):
        if isinstance(z, WeilElement):
            return taylor_lift("sin", z) * z * z + taylor_lift("exp", z / 3)
        return math.sin(z) * z * z + math.exp(z / 3)

    D = dual_numbers()
    h = 1e-5
    for x in np.linspace(-2.0, 2.0, 100):
        x = float(x)
        derivative = f(D.lift(x, {1: 1.0})).coefficient(1)
        assert derivative == pytest.approx((f(x + h) - f(x - h)) / (2 * h), abs=1e-7)
