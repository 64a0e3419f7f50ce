"""
Example Service
Named algebras from the theory (trivial, free, cylinder, torus, radial,
rotation and friends) as JSON-ready specs, plus the matrix fields and
rank-1 data used by the Nijenhuis and morphism checks.
"""
import logging
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Tuple, Union

from tfmonad.errors import ParseError
from tfmonad.schemas.specs import AlgebraSpec, AlphaSchema, BoxSchema, IntegratorSchema, Rank1Spec
from tfmonad.services.algebra_service import AlgebraMap, algebra_service, coordinate_names
from tfmonad.services.expressions import Bound, ChartMap
from tfmonad.services.flow_service import OneForm, TimeFunction, VectorField
from tfmonad.services.spec_service import AnySpec, Path, spec_service

logger = logging.getLogger(__name__)

# 1/2 - x ^ v keeps the radial closed form away from its pole.
RADIAL_WEDGE = "1/2 - (x1*v2 - x2*v1)"


@dataclass
class ExampleBundle:
    name: str
    spec: AnySpec
    algebra: AlgebraMap
    base_point: Optional[Tuple[Bound, ...]]
    loop: Optional[Path]


def _box(lower: List, upper: List) -> BoxSchema:
    return BoxSchema(min=lower, max=upper)


def trivial_spec() -> AlgebraSpec:
    return AlgebraSpec(
        name="trivial", dim=2, exprs=["x1", "x2"],
        domain=_box(["-1", "-1"], ["1", "1"]),
        base_point=["1/2", "1/2"], loop=["1/2", "1/2"],
    )


def free_spec() -> AlgebraSpec:
    """mu on T R: ((x, v), (xdot, vdot)) -> (x, v + xdot)."""
    return AlgebraSpec(
        name="free", dim=2, exprs=["x1", "x2 + v1"],
        domain=_box(["-1", "-1"], ["1", "1"]),
        base_point=["0", "0"], loop=["0", "0"],
    )


def affine_spec() -> AlgebraSpec:
    return AlgebraSpec(
        name="affine", dim=2, exprs=["x1 + v2", "x2"],
        domain=_box(["-1", "-1"], ["1", "1"]),
        base_point=["0", "0"],
    )


def product_spec() -> AlgebraSpec:
    """trivial(1) x free(1) on R x T R."""
    return AlgebraSpec(
        name="product", dim=3, exprs=["x1", "x2", "x3 + v2"],
        domain=_box(["-1", "-1", "-1"], ["1", "1", "1"]),
        base_point=["0", "0", "0"],
    )


def semi_affine_spec(passing: bool = True) -> AlgebraSpec:
    """(x, y + x v1) is an algebra; (x, y + y v1) is not."""
    coefficient = "x1" if passing else "x2"
    return AlgebraSpec(
        name="semi-affine" if passing else "semi-affine-broken",
        dim=2, exprs=["x1", f"x2 + {coefficient}*v1"],
        domain=_box(["-1", "-1"], ["1", "1"]),
        base_point=["1/2", "0"],
    )


def cylinder_spec() -> AlgebraSpec:
    """A = [[0, 0], [1, 0]] on R x S^1; leaves are the circles {a} x S^1."""
    return AlgebraSpec(
        name="cylinder", dim=2, exprs=["x1", "x2 + v1"],
        domain=_box(["-1", "0", "-8", "-8"], ["1", "2*pi", "8", "8"]),
        periodic=[None, "2*pi"],
        sample_box=_box(["-1", "0"], ["1", "2*pi"]),
        base_point=["0", "1"], loop=["0", "1 + 2*pi*t"],
    )


def torus_spec() -> AlgebraSpec:
    """(x, theta) -> (x, theta + sin(x) xdot) on the torus."""
    return AlgebraSpec(
        name="torus", dim=2, exprs=["x1", "x2 + sin(x1)*v1"],
        domain=_box(["0", "0", "-8", "-8"], ["2*pi", "2*pi", "8", "8"]),
        periodic=["2*pi", "2*pi"],
        sample_box=_box(["0", "0"], ["2*pi", "2*pi"]),
        base_point=["pi/2", "1"], loop=["pi/2", "1 + 2*pi*t"],
    )


def radial_spec() -> AlgebraSpec:
    """h(x, v) = x / sqrt(1 - x ^ v), leaves are the open rays and the origin."""
    return AlgebraSpec(
        name="radial", dim=2,
        exprs=["x1/sqrt(1 - (x1*v2 - x2*v1))", "x2/sqrt(1 - (x1*v2 - x2*v1))"],
        domain=_box(["-2", "-2", "-2", "-2"], ["2", "2", "2", "2"]),
        constraints=[RADIAL_WEDGE],
        sample_box=_box(["-1", "-1"], ["1", "1"]),
        radius_factor=0.05,
        base_point=["1", "0"], loop=["1", "0"],
    )


def rotation_spec(scale: Union[int, str] = 1) -> Rank1Spec:
    """
    X = (-y, x) with alpha_x(v) = -(x1 v1 + x2 v2) / scale^2.

    scale > 1 gives the target of the scaling morphism f(x) = scale * x.
    The v box is wide enough to lift the full unit circle.
    """
    suffix = "" if str(scale) == "1" else f"/({scale})^2"
    return Rank1Spec(
        name="rotation" if not suffix else f"rotation/{scale}",
        dim=2, X=["-x2", "x1"],
        alpha=AlphaSchema(kind="oneform", exprs=[f"-x1{suffix}", f"-x2{suffix}"]),
        integrator=IntegratorSchema(step=0.01, max_steps=1000),
        domain=_box(["-4", "-4"], ["4", "4"]),
        fiber_bound=8,
        sample_box=_box(["-1", "-1"], ["1", "1"]),
        base_point=["1", "0"], loop=["cos(2*pi*t)", "sin(2*pi*t)"],
    )


def radial_flow_spec() -> Rank1Spec:
    """The radial algebra as phi_alpha with X = x and alpha = -log(1 - x ^ v) / 2."""
    return Rank1Spec(
        name="radial-flow", dim=2, X=["x1", "x2"],
        alpha=AlphaSchema(kind="scalar", exprs=["-log(1 - (x1*v2 - x2*v1))/2"], constraints=[RADIAL_WEDGE]),
        integrator=IntegratorSchema(step=0.01, max_steps=1000),
        domain=_box(["-4", "-4"], ["4", "4"]),
        fiber_bound=2,
        sample_box=_box(["-1", "-1"], ["1", "1"]),
        radius_factor=0.05,
        base_point=["1", "0"],
    )


def free_rank1_spec() -> Rank1Spec:
    """The free algebra on T R recast with X = d/dv and alpha = xdot."""
    return Rank1Spec(
        name="free-rank1", dim=2, X=["0", "1"],
        alpha=AlphaSchema(kind="scalar", exprs=["v1"]),
        integrator=IntegratorSchema(step=0.01, max_steps=1000),
        domain=_box(["-4", "-4"], ["4", "4"]),
        sample_box=_box(["-1", "-1"], ["1", "1"]),
        base_point=["0", "0"],
    )


NAMED: Dict[str, Callable[[], AnySpec]] = {
    "trivial": trivial_spec,
    "free": free_spec,
    "affine": affine_spec,
    "product": product_spec,
    "semi-affine": semi_affine_spec,
    "semi-affine-broken": lambda: semi_affine_spec(passing=False),
    "cylinder": cylinder_spec,
    "torus": torus_spec,
    "radial": radial_spec,
    "radial-flow": radial_flow_spec,
    "rotation": rotation_spec,
    "free-rank1": free_rank1_spec,
}


# Matrix fields for the Nijenhuis checks


def matrix_field(entries: List[str], n: int, name: str, lower: str = "-2", upper: str = "2") -> ChartMap:
    """Row-major n x n matrix field in x1..xn."""
    xs = coordinate_names("x", n)
    return ChartMap.from_strings(xs, entries, (lower,) * n, (upper,) * n, name=name)


def elementary_field(terms: Dict[Tuple[int, int], str], n: int, name: str) -> ChartMap:
    """sum of coefficient * E_ij (1-based, E_ij e_j = e_i)."""
    entries = ["0"] * (n * n)
    for (i, j), coefficient in terms.items():
        entries[(i - 1) * n + (j - 1)] = coefficient
    return matrix_field(entries, n, name)


def nijenhuis_counterexample() -> ChartMap:
    """A = E13 + x1 E24: A^2 = 0 with N_A(e3, e4) = e2 everywhere."""
    return elementary_field({(1, 3): "1", (2, 4): "x1"}, 4, "E13 + x1*E24")


def flat_nilpotent_field() -> ChartMap:
    """A = x2 E13 + x1 E23: A^2 = 0 and N_A vanishes identically."""
    return elementary_field({(1, 3): "x2", (2, 3): "x1"}, 4, "x2*E13 + x1*E23")


def line_field(coefficient: str = "sin(x1)") -> ChartMap:
    """f(x) [[0, 0], [1, 0]] with f depending on x1 only."""
    return matrix_field(["0", "0", coefficient, "0"], 2, f"{coefficient}*E21")


class ExampleService:
    """Catalog of named examples."""

    def names(self) -> List[str]:
        return sorted(NAMED)

    def spec(self, name: str) -> AnySpec:
        try:
            return NAMED[name]()
        except KeyError:
            raise ParseError(f"unknown example '{name}'; choose from {', '.join(self.names())}") from None

    def build(self, name: str) -> AlgebraMap:
        return spec_service.build(self.spec(name))

    def bundle(self, name: str) -> ExampleBundle:
        spec = self.spec(name)
        return ExampleBundle(
            name=name,
            spec=spec,
            algebra=spec_service.build(spec),
            base_point=spec_service.point(spec.base_point) if spec.base_point else None,
            loop=spec_service.path(spec.loop) if spec.loop else None,
        )

    def radial_example(self) -> AlgebraMap:
        return self.build("radial")

    def rotation_data(self, scale: Union[int, str] = 1) -> Tuple[VectorField, OneForm]:
        """(X, alpha) of the rotation algebra, optionally rescaled for f(x) = scale * x."""
        spec = rotation_spec(scale)
        return spec_service.vector_field(spec), spec_service.alpha(spec)

    def radial_flow_data(self) -> Tuple[VectorField, TimeFunction]:
        spec = radial_flow_spec()
        return spec_service.vector_field(spec), spec_service.alpha(spec)

    def semi_affine(self, coefficient: str = "x1") -> AlgebraMap:
        """x + A(x) v with A = coefficient * E21, built from the matrix field."""
        field = matrix_field(["0", "0", coefficient, "0"], 2, f"{coefficient}*E21", "-1", "1")
        return algebra_service.make_semi_affine(field, name=f"semi-affine {coefficient}")


# Global service instance
example_service = ExampleService()
