from fractions import Fraction

import hypothesis
import hypothesis.strategies as strat
import pytest

from tfmonad.helpers.numeric import max_abs, residual
from tfmonad.helpers.sampling import Sampler
from tfmonad.services.expressions import ChartMap
from tfmonad.services.monad_service import (
    FitResult,
    Mismatch,
    T2Point,
    T3Point,
    TangentPoint,
    T_mu,
    T_zeta,
    flatten,
    monad_service,
    mu,
    mu_T,
    second_tangent_map,
    tangent_map,
    zeta_T,
)


def doubled_xdot(xi):
    return TangentPoint(xi.x, tuple(v + 2 * w for v, w in zip(xi.v, xi.xdot)))


rationals = strat.fractions(min_value=-2, max_value=2, max_denominator=8)


def vectors(n):
    return strat.tuples(*(rationals,) * n)


def test_mu_adds_the_two_tangent_parts():
    assert mu(T2Point((1,), (2,), (3,), (4,))) == TangentPoint((1,), (5,))


def test_second_tangent_map_of_square():
    f = ChartMap.from_strings(("x",), ("x^2",), ("-5",), ("5",), name="square")
    assert second_tangent_map(f, T2Point((1,), (2,), (3,), (4,))) == T2Point((1,), (4,), (6,), (20,))


def test_tangent_map_of_product():
    f = ChartMap.from_strings(("x", "y"), ("x*y",), ("-2", "-2"), ("2", "2"))
    assert tangent_map(f, TangentPoint((1, 2), (3, 4))) == TangentPoint((2,), (10,))


@hypothesis.given(vectors(2), vectors(2))
def test_unit_laws(x, v):
    p = TangentPoint(x, v)
    assert mu(zeta_T(p)) == p
    assert mu(T_zeta(p)) == p


@hypothesis.given(strat.tuples(*(vectors(2),) * 8))
def test_associativity(parts):
    xi = T3Point(*parts)
    assert flatten(mu(mu_T(xi))) == flatten(mu(T_mu(xi)))


@pytest.mark.parametrize("dim", [1, 2])
def test_monad_laws_consistent(dim):
    report = monad_service.verify_monad_laws(dim, samples=8, seed=3)
    assert report.passed
    assert report.law("associativity: mu o mu_T = mu o T mu").max_residual == 0


def test_float_backend_has_small_residuals():
    report = monad_service.verify_monad_laws(1, samples=8, seed=5, backend="float")
    assert report.passed
    assert all(law.backend == "float" for law in report.laws)


def test_fit_recovers_mu():
    fit = monad_service.fit_T2_to_T(mu, samples=10)
    assert isinstance(fit, FitResult)
    assert (fit.a, fit.b) == (1, 1)
    assert fit.residual == 0


def test_fit_of_other_combination():
    def candidate(xi):
        return TangentPoint(xi.x, tuple(2 * v + 3 * w for v, w in zip(xi.v, xi.xdot)))

    fit = monad_service.fit_T2_to_T(candidate, samples=10)
    assert isinstance(fit, FitResult)
    assert (fit.a, fit.b) == (2, 3)


def test_fit_rejects_vdot_dependence():
    def candidate(xi):
        return TangentPoint(xi.x, tuple(v + w + d for v, w, d in zip(xi.v, xi.xdot, xi.vdot)))

    assert isinstance(monad_service.fit_T2_to_T(candidate, samples=10), Mismatch)


def test_fit_rejects_moving_base_point():
    def candidate(xi):
        return TangentPoint(tuple(x + v for x, v in zip(xi.x, xi.v)), xi.v)

    result = monad_service.fit_T2_to_T(candidate, samples=10)
    assert isinstance(result, Mismatch)
    assert result.reason == "base point moved"


def test_candidate_unit_laws():
    assert monad_service.check_candidate_laws(mu, 2, samples=10).passed


@hypothesis.given(vectors(2), vectors(2))
def test_doubled_xdot_breaks_only_the_T_zeta_unit(x, v):
    p = TangentPoint(x, v)
    assert doubled_xdot(zeta_T(p)) == p
    assert residual(flatten(doubled_xdot(T_zeta(p))), flatten(p)) == max_abs(v)


def test_doubled_xdot_candidate_report():
    report = monad_service.check_candidate_laws(doubled_xdot, 2, samples=10, seed=7)
    assert report.law("unit: zeta_T").passed
    law = report.law("unit: T zeta")
    assert not law.passed
    assert law.witness is not None

    sampler = Sampler(7, exact=True)
    lower, upper = (Fraction(-1),) * 2, (Fraction(1),) * 2
    points = [(sampler.point(lower, upper), sampler.point(lower, upper)) for _ in range(10)]
    assert law.max_residual == max(max_abs(v) for _, v in points)


def test_comonad_witness_gap():
    witness = monad_service.comonad_naturality_witness()
    assert witness.gap == 2
    assert witness.slot == "vdot"


def test_comonad_witness_for_any_b():
    assert monad_service.comonad_naturality_witness(b=Fraction(1, 3)).gap == 2


def test_comonad_witness_vanishes_for_linear_maps():
    f = ChartMap.from_strings(("x", "y"), ("2*x - y", "x + 3*y"), ("-2", "-2"), ("2", "2"), name="linear")
    assert monad_service.comonad_naturality_witness(b=2, f=f).gap == 0
