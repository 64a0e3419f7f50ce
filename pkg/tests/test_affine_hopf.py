from fractions import Fraction

import hypothesis
import hypothesis.strategies as strat
import pytest

from tfmonad.errors import NoAntipodeError
from tfmonad.services.affine_hopf_service import affine_hopf_service, scan_values
from tfmonad.services.matrices import MatrixQ

rationals = strat.fractions(min_value=-3, max_value=3, max_denominator=6)


@pytest.mark.parametrize("a, b", [(0, 0), (1, 1), (2, -3), (Fraction(1, 2), 4)])
def test_affine_bimonad_laws(a, b):
    report = affine_hopf_service.verify_affine_laws(a, b, samples=6)
    assert report.passed
    assert all(law.max_residual == 0 for law in report.laws)


@hypothesis.settings(max_examples=20, deadline=None)
@hypothesis.given(rationals, rationals)
def test_affine_laws_for_any_parameters(a, b):
    assert affine_hopf_service.verify_affine_laws(a, b, dim=1, samples=3).passed


def test_antipode_value():
    assert affine_hopf_service.antipode(1, 2) == Fraction(-1, 3)
    assert affine_hopf_service.antipode(0, 5) == -1


def test_no_antipode_when_ab_is_minus_one():
    with pytest.raises(NoAntipodeError):
        affine_hopf_service.antipode(1, -1)


def test_antipode_identities():
    assert affine_hopf_service.verify_antipode(1, 2, samples=6).passed
    assert affine_hopf_service.verify_antipode(Fraction(-1, 2), 3, samples=6).passed


def instances(family):
    if family.parameter_slot is None:
        yield family.instantiate()
        return
    for t in scan_values(5, nonzero=family.nonzero_parameter):
        yield family.instantiate(t)


@pytest.mark.parametrize("a, b, names", [
    (0, 1, ["nilpotent"]),
    (1, -1, ["zero", "scalar", "projection, lower", "projection, upper"]),
    (1, 1, ["projection"]),
])
def test_classified_families_are_hopf_modules(a, b, names):
    families = affine_hopf_service.classify_hopf_modules_2d(a, b)
    assert [f.name for f in families] == names
    for family in families:
        for module in instances(family):
            for x0 in module.x0_samples():
                assert affine_hopf_service.hopf_module_check(a, b, module.A, module.B, x0), family.name


def test_parametrized_family_needs_a_value():
    (family,) = affine_hopf_service.classify_hopf_modules_2d(0, 1)
    with pytest.raises(ValueError):
        family.instantiate()


def test_residuals_point_at_the_broken_identity():
    A = MatrixQ.from_rows([[0, 1], [0, 0]])
    B = MatrixQ.identity(2)
    report = affine_hopf_service.hopf_module_residuals(0, 1, A, B, (1, 0))
    assert report.algebra == 0
    assert report.coalgebra == 0
    assert report.eigenvector == 0
    assert report.compatibility == 1
    assert not report.passed


def test_affine_coalgebra():
    B = MatrixQ.from_rows([[0, 1], [0, -1]])
    assert affine_hopf_service.affine_coalgebra_check((1, -1), B, -1)
    assert not affine_hopf_service.affine_coalgebra_check((1, 0), B, -1)


def test_upper_projection_family_is_identified():
    A = MatrixQ.from_rows([[1, 0], [0, 0]])
    B = MatrixQ.from_rows([[0, 1], [0, -1]])
    family = affine_hopf_service.identify_family(1, -1, A, B, (1, -1))
    assert family is not None
    assert family.name == "projection, upper"


def test_identify_after_basis_change():
    # A = [[0, 0], [1, 0]] is the normal form seen in the basis (e2, e1)
    A = MatrixQ.from_rows([[0, 0], [1, 0]])
    B = MatrixQ.from_rows([[0, 1], [0, 1]])
    assert affine_hopf_service.hopf_module_check(0, 1, A, B, (1, 1))
    family = affine_hopf_service.identify_family(0, 1, A, B, (1, 1))
    assert family is not None and family.name == "nilpotent"


@pytest.mark.parametrize("a, b", [(0, 1), (1, -1)])
def test_lattice_scan_finds_nothing_outside_the_families(a, b):
    report = affine_hopf_service.lattice_scan(a, b)
    assert report.solutions > 0
    assert report.passed


def test_scan_values():
    assert scan_values(5) == [0, Fraction(1, 2), Fraction(-1, 2), 1, -1]
    assert 0 not in scan_values(4, nonzero=True)
