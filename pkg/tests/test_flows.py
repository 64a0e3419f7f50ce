import math
from dataclasses import replace

import pytest

from tfmonad.config import settings
from tfmonad.errors import ShapeMismatchError, StepBudgetExceededError
from tfmonad.services.algebra_service import algebra_service
from tfmonad.services.example_service import example_service
from tfmonad.services.expressions import ChartMap
from tfmonad.services.flow_service import OneForm, VectorField, flow_service

BOX = ((-1.0, -1.0), (1.0, 1.0))


def test_rotation_quarter_turn():
    X, _ = example_service.rotation_data()
    result = flow_service.flow(X, (1.0, 0.0), math.pi / 2)
    assert result.point == pytest.approx((0.0, 1.0), abs=1e-8)
    assert result.steps == math.ceil((math.pi / 2) / 0.01)
    assert result.error_estimate < 1e-8


def test_zero_time_is_identity():
    X, _ = example_service.rotation_data()
    assert flow_service.integrate(X, (0.3, 0.4), 0) == (0.3, 0.4)


def test_step_budget():
    X, _ = example_service.rotation_data()
    with pytest.raises(StepBudgetExceededError):
        flow_service.integrate(X, (1.0, 0.0), 20.0)


def test_vector_field_must_be_square():
    field = ChartMap.from_strings(("x1", "x2"), ("x1",), ("-1", "-1"), ("1", "1"))
    with pytest.raises(ShapeMismatchError):
        VectorField(field)


def test_rotation_algebra_value(rotation):
    assert rotation.evaluate((1.0, 0.0), (1.0, 0.0)) == pytest.approx((math.cos(1), -math.sin(1)), abs=1e-8)


def test_rotation_algebra_axioms(rotation):
    report = algebra_service.check_axioms(rotation, samples=6)
    assert report.passed
    assert report.tolerance == 1e-6


def test_rotation_time_axioms():
    X, alpha = example_service.rotation_data()
    report = flow_service.check_time_axioms(X, alpha, *BOX, samples=6)
    assert report.passed
    assert report.semibasic < 1e-12


def test_rotation_form_is_basic():
    X, alpha = example_service.rotation_data()
    report = flow_service.check_basic_form(X, alpha, *BOX, samples=6)
    assert report.passed
    assert report.contraction < 1e-12
    assert report.lie_derivative < 1e-12


def test_non_invariant_form_is_not_basic():
    X, _ = example_service.rotation_data()
    form = OneForm(ChartMap.from_strings(("x1", "x2"), ("1", "0"), ("-4", "-4"), ("4", "4")))
    report = flow_service.check_basic_form(X, form, *BOX, samples=6, pullback_time=0)
    assert not report.passed
    assert report.pullback is None


def test_time_function_not_semibasic():
    X, _ = example_service.rotation_data()
    form = OneForm(ChartMap.from_strings(("x1", "x2"), ("1", "0"), ("-4", "-4"), ("4", "4")))
    report = flow_service.check_time_axioms(X, form, *BOX, samples=6)
    assert not report.semibasic_passed


def test_radial_flow_matches_closed_form(radial):
    h = example_service.build("radial-flow")
    x, v = (0.5, 0.25), (0.1, 0.3)
    assert h.evaluate(x, v) == pytest.approx(radial.evaluate(x, v), abs=1e-7)


def test_radial_flow_time_axioms():
    X, alpha = example_service.radial_flow_data()
    report = flow_service.check_time_axioms(X, alpha, (-0.5, -0.5), (0.5, 0.5), samples=6)
    assert report.passed


def test_free_rank1_is_the_free_algebra():
    h = example_service.build("free-rank1")
    assert h.evaluate((0.2, 0.1), (0.3, -0.4)) == pytest.approx((0.2, 0.4))


def test_scaling_morphism_between_rotations():
    source = example_service.rotation_data(1)
    target = example_service.rotation_data(2)
    f = ChartMap.from_strings(("x1", "x2"), ("2*x1", "2*x2"), ("-4", "-4"), ("4", "4"), name="2x")
    report = flow_service.check_rank1_morphism(f, source, target, *BOX, samples=5)
    assert report.passed
    assert report.linear < 1e-9


def test_identity_is_not_a_morphism_between_rotations():
    source = example_service.rotation_data(1)
    target = example_service.rotation_data(2)
    f = ChartMap.from_strings(("x1", "x2"), ("x1", "x2"), ("-4", "-4"), ("4", "4"))
    assert not flow_service.check_rank1_morphism(f, source, target, *BOX, samples=5).passed


def test_rotation_has_a_basic_form_candidate():
    X, _ = example_service.rotation_data()
    report = flow_service.basic_form_obstruction(X, *BOX, degree=1, samples=12)
    assert not report.obstructed


def test_translation_in_the_plane_has_no_polynomial_obstruction():
    field = ChartMap.from_strings(("x1", "x2"), ("1", "0"), ("-2", "-2"), ("2", "2"))
    report = flow_service.basic_form_obstruction(VectorField(field), *BOX, degree=1, samples=12)
    assert not report.obstructed


def test_error_tolerance_scales_the_largest_estimate():
    assert flow_service.error_tolerance([1e-5, math.nan, 2e-6]) == pytest.approx(settings.richardson_factor * 1e-5)
    assert flow_service.error_tolerance([]) == settings.flow_tolerance
    assert flow_service.error_tolerance([1e-12]) == settings.flow_tolerance


def test_rank1_tolerance_follows_richardson_estimate():
    X, alpha = example_service.rotation_data()
    box = dict(sample_lower=(-1, -1), sample_upper=(1, 1), radius_factor=1.0)
    fine = flow_service.make_rank1(X, alpha, **box)
    assert fine.tolerance == settings.flow_tolerance
    assert algebra_service.check_axioms(fine, samples=20).passed

    coarse = flow_service.make_rank1(replace(X, step=1.0), alpha, **box)
    assert coarse.meta["error_estimate"] > 0
    assert coarse.tolerance > fine.tolerance
    assert not algebra_service.check_axioms(coarse, samples=20, tolerance=fine.tolerance).passed


def test_basic_form_reports_sampling_failure():
    X, _ = example_service.rotation_data()
    form = OneForm(ChartMap.from_strings(("x1", "x2"), ("x2", "-x1"), ("2", "2"), ("3", "3")))
    report = flow_service.check_basic_form(X, form, *BOX, samples=4)
    assert report.error is not None
    assert not report.passed
