"""
Spec Service
Loads algebra and rank-1 spec JSON and builds the corresponding AlgebraMap,
leaf paths and Hopf module candidates.
"""
import json
import logging
from pathlib import Path as FilePath
from typing import Callable, Dict, Optional, Sequence, Tuple, Union

from pydantic import ValidationError

from tfmonad.errors import ParseError
from tfmonad.schemas.specs import AlgebraSpec, BoxSchema, CoalgebraSpec, HopfCheckSpec, Rank1Spec
from tfmonad.services.algebra_service import AlgebraMap, coordinate_names
from tfmonad.services.expressions import FLOAT, Bound, ChartMap, parse_constant
from tfmonad.services.flow_service import OneForm, TimeFunction, VectorField, flow_service
from tfmonad.services.matrices import MatrixQ, to_rational
from tfmonad.services.polynomials import TangentPoly, parse_polynomial

logger = logging.getLogger(__name__)

AnySpec = Union[AlgebraSpec, Rank1Spec]
Path = Callable[[float], Tuple[float, ...]]


def _validation_message(exc: ValidationError) -> str:
    parts = []
    for error in exc.errors():
        where = ".".join(str(p) for p in error.get("loc", ())) or "spec"
        parts.append(f"{where}: {error.get('msg')}")
    return "; ".join(parts)


def read_json(source: Union[str, FilePath, Dict]) -> Dict:
    if isinstance(source, dict):
        return source
    text = FilePath(source).read_text(encoding="utf-8")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", text, exc.pos) from exc


def _validate(model, data: Dict):
    try:
        return model.model_validate(data)
    except ValidationError as exc:
        raise ParseError(_validation_message(exc)) from exc


class SpecService:
    """JSON specs to algebras and paths."""

    def load_spec(self, source: Union[str, FilePath, Dict]) -> AnySpec:
        """Rank-1 when the document has a vector field "X" or kind "rank1"; a chart algebra otherwise."""
        data = read_json(source)
        if not isinstance(data, dict):
            raise ParseError("spec must be a JSON object")
        if data.get("kind") == "rank1" or "X" in data:
            return _validate(Rank1Spec, data)
        return _validate(AlgebraSpec, data)

    def load_hopf(self, source: Union[str, FilePath, Dict]) -> HopfCheckSpec:
        return _validate(HopfCheckSpec, read_json(source))

    def load_coalgebra(self, source: Union[str, FilePath, Dict]) -> CoalgebraSpec:
        return _validate(CoalgebraSpec, read_json(source))

    # Builders

    @staticmethod
    def _box(box: BoxSchema) -> Tuple[Tuple[Bound, ...], Tuple[Bound, ...]]:
        return tuple(parse_constant(v) for v in box.min), tuple(parse_constant(v) for v in box.max)

    def build(self, spec: AnySpec) -> AlgebraMap:
        if isinstance(spec, Rank1Spec):
            return self.build_rank1(spec)
        return self.build_chart(spec)

    def build_chart(self, spec: AlgebraSpec) -> AlgebraMap:
        n = spec.dim
        xs, vs = coordinate_names("x", n), coordinate_names("v", n)
        lower, upper = self._box(spec.domain)
        if len(lower) == n:
            lower = lower + (parse_constant(-1),) * n
            upper = upper + (parse_constant(1),) * n
        name = spec.name or "algebra"
        h = ChartMap.from_strings(xs + vs, spec.exprs, lower, upper, spec.constraints, name=name)
        periods = tuple(parse_constant(p) if p is not None else None for p in spec.periodic)
        sample_lower, sample_upper = self._box(spec.sample_box) if spec.sample_box else (None, None)
        logger.debug(f"[SPEC] chart algebra {name}: n={n}, periodic={spec.periodic}")
        return AlgebraMap(
            n, h, name=name, periods=periods, tolerance=spec.tolerance,
            sample_lower=sample_lower, sample_upper=sample_upper, radius_factor=spec.radius_factor,
        )

    def vector_field(self, spec: Rank1Spec) -> VectorField:
        xs = coordinate_names("x", spec.dim)
        lower, upper = self._box(spec.domain)
        field = ChartMap.from_strings(xs, spec.X, lower, upper, name="X")
        return VectorField(field, spec.integrator.step, spec.integrator.max_steps)

    def alpha(self, spec: Rank1Spec) -> Union[TimeFunction, OneForm]:
        n = spec.dim
        xs, vs = coordinate_names("x", n), coordinate_names("v", n)
        lower, upper = self._box(spec.domain)
        if spec.alpha.kind == "oneform":
            return OneForm(ChartMap.from_strings(xs, spec.alpha.exprs, lower, upper, name="alpha"))
        fiber = parse_constant(spec.fiber_bound)
        return TimeFunction(ChartMap.from_strings(
            xs + vs, spec.alpha.exprs, lower + (-fiber,) * n, upper + (fiber,) * n,
            spec.alpha.constraints, name="alpha",
        ))

    def build_rank1(self, spec: Rank1Spec) -> AlgebraMap:
        sample_lower, sample_upper = self._box(spec.sample_box) if spec.sample_box else (None, None)
        return flow_service.make_rank1(
            self.vector_field(spec), self.alpha(spec),
            name=spec.name or "rank-1 flow algebra",
            sample_lower=sample_lower, sample_upper=sample_upper,
            fiber_bound=parse_constant(spec.fiber_bound),
            radius_factor=spec.radius_factor, tolerance=spec.tolerance,
        )

    # Points and paths

    def point(self, values: Sequence) -> Tuple[Bound, ...]:
        return tuple(parse_constant(v) for v in values)

    def path(self, exprs: Sequence[str]) -> Path:
        """gamma(t) for t in [0, 1] from one expression per coordinate."""
        chart = ChartMap.from_strings(("t",), list(exprs), ("0",), ("1",), name="path")

        def gamma(t: float) -> Tuple[float, ...]:
            return tuple(float(c) for c in chart.evaluate((float(t),), FLOAT))

        return gamma

    def base_point(self, spec: AnySpec, override: Optional[Sequence] = None) -> Tuple[Bound, ...]:
        values = override if override is not None else spec.base_point
        if values is None:
            raise ParseError("no base point: pass --point or add base_point to the spec")
        if len(values) != spec.dim:
            raise ParseError(f"base point must have {spec.dim} coordinates, got {len(values)}")
        return self.point(values)

    def loop(self, spec: AnySpec, override: Optional[Sequence[str]] = None) -> Path:
        exprs = override if override is not None else spec.loop
        if exprs is None:
            raise ParseError("no loop: pass --path or add loop to the spec")
        if len(exprs) != spec.dim:
            raise ParseError(f"path must have {spec.dim} components, got {len(exprs)}")
        return self.path(exprs)

    # Hopf and coalgebra inputs

    def hopf_inputs(self, spec: HopfCheckSpec):
        """(a, b, A, B, X0) as exact rationals."""
        def exact(value):
            bound = parse_constant(value)
            return to_rational(bound)

        A = MatrixQ.from_rows([[exact(v) for v in row] for row in spec.A])
        B = MatrixQ.from_rows([[exact(v) for v in row] for row in spec.B])
        return exact(spec.a), exact(spec.b), A, B, tuple(exact(v) for v in spec.X0)

    def coalgebra_inputs(self, spec: CoalgebraSpec):
        images = [parse_polynomial(text, TangentPoly) for text in spec.h]
        b = to_rational(parse_constant(spec.b)) if spec.b is not None else None
        return images, b


# Global service instance
spec_service = SpecService()
