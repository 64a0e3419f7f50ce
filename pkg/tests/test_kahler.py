import pytest

from tfmonad.errors import ParseError
from tfmonad.services.kahler_service import differential, kahler_service
from tfmonad.services.polynomials import RationalPoly, TangentPoly, TensorPoly, parse_polynomial


def tp(text):
    return parse_polynomial(text, TangentPoly)


@pytest.mark.parametrize("n", [1, 2])
def test_comonad_laws(n):
    report = kahler_service.verify_comonad(n, samples=3)
    assert report.passed
    assert all(law.max_residual == 0 for law in report.laws)


def test_differential():
    assert differential(tp("X1^2")) == tp("2*X1*dX1")
    assert differential(tp("X1*X2")) == tp("X2*dX1 + X1*dX2")


def test_differential_rejects_repeated_level():
    with pytest.raises(ValueError):
        differential(tp("dX1"))


def test_unknown_generator():
    with pytest.raises(ParseError):
        parse_polynomial("X1 + Y2", TangentPoly)


def test_generator_names_round_trip():
    assert str(tp("dTdX1")) == "dTdX1"
    assert str(tp("3/2*X1^2*dX1")) == "3/2*X1^2*dX1"


def test_comultiplication_on_elements():
    assert kahler_service.mu_A(tp("X1*dX1")) == tp("X1*dX1 + X1*dTX1")
    assert kahler_service.zeta(tp("X1 + X1*dX1")) == RationalPoly.var(0)


def test_coaddition():
    assert kahler_service.coaddition(tp("dX1")) == parse_polynomial("dL1 + dR1", TensorPoly)
    assert kahler_service.mu_via_coaddition(tp("X1*dX1^2")) == kahler_service.mu_A(tp("X1*dX1^2"))


def test_coalgebra_with_matching_b():
    report = kahler_service.coalgebra_check([tp("X1 + (1 + 2*X1)*dX1")], b=2)
    assert report.counit == 0
    assert report.b_condition == 0
    assert report.passed
    assert report.field_components == ["1 + 2*X1"]


def test_coalgebra_with_wrong_b():
    report = kahler_service.coalgebra_check([tp("X1 + (1 + 2*X1)*dX1")], b=3)
    assert not report.passed


def test_constant_field_is_not_strict():
    report = kahler_service.coalgebra_check([tp("X1 + dX1")])
    assert report.strict == 1
    assert not report.passed
    assert kahler_service.coalgebra_check([tp("X1 + dX1")], b=0).passed


def test_counit_failure():
    report = kahler_service.coalgebra_check([tp("2*X1 + dX1")], b=0)
    assert report.counit == 1
    assert not report.passed


def test_tangent_functor_respects_composition():
    phi = kahler_service.base_morphism([tp("X1^2 + 1")])
    psi = kahler_service.base_morphism([tp("2*X1")])
    f = tp("X1*dX1 + dX1^2")
    composed = kahler_service.compose(psi, phi).lift()
    assert composed(f) == phi.lift().then(psi.lift())(f)
    assert kahler_service.tangent_morphism([tp("X1^2")])(tp("dX1")) == tp("2*X1*dX1")


@pytest.mark.parametrize("s, b", [(0, 0), (1, 0), (-2, 3), ("1/2", "-1/3"), (3, "5/2")])
def test_affine_coalgebra_family(s, b):
    h = tp(f"X1 + (({s}) + ({b})*X1)*dX1")
    assert kahler_service.coalgebra_check([h], b=parse_polynomial(str(b)).constant_term()).passed


def test_quadratic_field_is_not_affine():
    assert not kahler_service.coalgebra_check([tp("X1 + X1^2*dX1")], b=0).passed
