import math
from fractions import Fraction

import numpy as np
import pytest

from tfmonad.errors import ShapeMismatchError
from tfmonad.services.algebra_service import algebra_service
from tfmonad.services.example_service import (
    example_service,
    flat_nilpotent_field,
    line_field,
    nijenhuis_counterexample,
)
from tfmonad.services.expressions import ChartMap
from tfmonad.services.matrices import MatrixQ

NILPOTENT = MatrixQ.from_rows([[0, 1], [0, 0]])


def test_trivial_algebra():
    h = algebra_service.make_trivial(2)
    report = algebra_service.check_axioms(h, samples=10)
    assert report.passed
    assert report.backend == "rational"
    assert report.axiom1 == 0 and report.axiom2 == 0


def test_free_algebra():
    h = algebra_service.make_free(1)
    assert h.n == 2
    assert algebra_service.check_axioms(h, samples=10).passed
    assert algebra_service.rank_at(h, (Fraction(0), Fraction(0))) == 1


def test_affine_algebra_with_square_zero():
    h = algebra_service.make_affine(NILPOTENT)
    assert algebra_service.check_axioms(h, samples=10).passed
    assert algebra_service.endomorphism_at(h, (Fraction(0), Fraction(0))) == NILPOTENT


def test_affine_identity_is_not_an_algebra():
    h = algebra_service.make_affine(MatrixQ.identity(2))
    report = algebra_service.check_axioms(h, samples=10)
    assert not report.passed
    assert report.axiom1 == 0
    assert report.axiom2 > 0
    assert report.witness is not None


def test_affine_needs_square_matrix():
    with pytest.raises(ShapeMismatchError):
        algebra_service.make_affine(MatrixQ.from_rows([[0, 1, 0], [0, 0, 0]]))


def test_semi_affine_examples():
    passing = example_service.build("semi-affine")
    broken = example_service.build("semi-affine-broken")
    assert algebra_service.check_axioms(passing, samples=10).passed
    assert not algebra_service.check_axioms(broken, samples=10).passed


def test_semi_affine_from_field():
    h = example_service.semi_affine("x1")
    assert algebra_service.check_axioms(h, samples=10).passed
    assert h.afield is not None


def test_identities_of_semi_affine():
    report = algebra_service.check_identities(example_service.build("semi-affine"), samples=10)
    assert report.passed
    assert report.backend == "rational"
    assert report.nilpotency == 0
    assert report.max_rank <= 1


def test_trivial_rank_zero_is_projection():
    report = algebra_service.check_identities(algebra_service.make_trivial(2), samples=6)
    assert report.passed
    assert report.rank_profile == {0: 6}
    assert report.rank0_projection == 0


def test_product_algebra():
    h = algebra_service.make_product(algebra_service.make_trivial(1), algebra_service.make_free(1))
    assert h.n == 3
    assert algebra_service.check_axioms(h, samples=8).passed
    assert algebra_service.rank_at(h, (Fraction(0),) * 3) == 1


def test_cylinder_is_periodic_algebra(cylinder):
    report = algebra_service.check_axioms(cylinder, samples=10)
    assert report.passed
    assert report.backend == "float"
    assert cylinder.evaluate((0.0, 6.0), (0.5, 0.0))[1] == pytest.approx(6.5 - 2 * math.pi)


def test_torus_algebra():
    assert algebra_service.check_axioms(example_service.build("torus"), samples=10).passed


def test_radial_closed_form(radial):
    y = radial.evaluate((1.0, 0.0), (0.0, 0.25))
    assert y == pytest.approx((1 / math.sqrt(0.75), 0.0))


def test_radial_is_an_algebra(radial):
    report = algebra_service.check_axioms(radial, samples=10)
    assert report.passed
    assert report.axiom2 < 1e-9


def test_radial_rank_drops_at_origin(radial):
    assert algebra_service.rank_at(radial, (1.0, 0.0)) == 1
    assert algebra_service.rank_at(radial, (0.0, 0.0)) == 0


def test_radial_distribution_is_radial(radial):
    (direction,) = algebra_service.distribution_at(radial, (1.0, 0.0))
    assert abs(direction[0]) == pytest.approx(1.0)
    assert direction[1] == pytest.approx(0.0)


def test_nijenhuis_counterexample():
    table = algebra_service.nijenhuis_at(nijenhuis_counterexample(), (Fraction(1),) * 4)
    assert table[2][3] == (0, 1, 0, 0)
    assert table[3][2] == (0, -1, 0, 0)
    report = algebra_service.check_nijenhuis(nijenhuis_counterexample(), samples=5)
    assert report.max_norm == 1
    assert not report.passed


def test_flat_nilpotent_field_has_vanishing_torsion():
    report = algebra_service.check_nijenhuis(flat_nilpotent_field(), samples=5)
    assert report.backend == "rational"
    assert report.max_norm == 0
    assert report.passed


def test_nijenhuis_of_algebra_from_field():
    h = algebra_service.make_semi_affine(line_field("sin(x1)"))
    report = algebra_service.check_nijenhuis(h, samples=5)
    assert report.passed


def test_nijenhuis_through_second_derivatives(radial):
    table = algebra_service.nijenhuis_at(radial, (0.5, 0.25))
    assert np.abs(np.array(table, dtype=float)).max() < 1e-9


def test_swap_morphism_into_free_algebra():
    # (x1, x2) -> (x2, x1) carries the affine algebra x + E12 v onto x + E21 v
    h = algebra_service.make_affine(NILPOTENT)
    k = algebra_service.make_affine(MatrixQ.from_rows([[0, 0], [1, 0]]))
    swap = ChartMap.from_strings(("x1", "x2"), ("x2", "x1"), ("-1", "-1"), ("1", "1"), name="swap")
    report = algebra_service.check_morphism(swap, h, k, samples=8)
    assert report.passed
    assert report.backend == "rational"


def test_identity_is_not_a_morphism_between_different_algebras():
    h = algebra_service.make_affine(NILPOTENT)
    k = algebra_service.make_affine(MatrixQ.from_rows([[0, 0], [1, 0]]))
    identity = ChartMap.from_strings(("x1", "x2"), ("x1", "x2"), ("-1", "-1"), ("1", "1"))
    report = algebra_service.check_morphism(identity, h, k, samples=8)
    assert not report.square_passed
    assert not report.intertwining_passed


def test_morphism_shape_is_checked():
    h = algebra_service.make_trivial(2)
    f = ChartMap.from_strings(("x",), ("x",), ("-1",), ("1",))
    with pytest.raises(ShapeMismatchError):
        algebra_service.check_morphism(f, h, h)
