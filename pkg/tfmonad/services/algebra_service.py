"""
Algebra Service
Algebras h: TM -> M over the tangent functor monad: constructors, axiom and
identity checks, associated endomorphisms, Nijenhuis tensors and morphisms.
"""
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from tfmonad.config import settings
from tfmonad.errors import SamplingError, ShapeMismatchError
from tfmonad.helpers.numeric import format_vector, is_exact, max_abs, real, vector_difference
from tfmonad.helpers.sampling import Sampler, ball_radii, run_sampled
from tfmonad.services.derivatives import (
    mixed_second_derivative,
    partial_jacobian,
    tangent_evaluate,
)
from tfmonad.services.expressions import (
    FLOAT,
    RATIONAL,
    Bound,
    ChartMap,
    Expr,
    SmoothMap,
    Var,
)
from tfmonad.services.matrices import (
    MatrixQ,
    distance_to_span,
    numerical_rank,
    range_basis,
)

logger = logging.getLogger(__name__)

Matrix = Union[MatrixQ, np.ndarray]


def coordinate_names(prefix: str, n: int) -> Tuple[str, ...]:
    return tuple(f"{prefix}{i + 1}" for i in range(n))


def _wrap(value, lo, period):
    if period is None:
        return value
    k = math.floor((real(value) - lo) / period)
    return value - k * period if k else value


@dataclass
class AlgebraMap:
    """
    A candidate algebra h(x, v) on an n-dimensional chart.

    h is any SmoothMap with 2n inputs (x then v) and n outputs. Periodic
    coordinates are wrapped into the box on input and output and compared
    modulo their period.
    """

    n: int
    h: SmoothMap
    name: str = ""
    periods: Tuple[Optional[Bound], ...] = ()
    tolerance: Optional[float] = None
    sample_lower: Optional[Tuple[Bound, ...]] = None
    sample_upper: Optional[Tuple[Bound, ...]] = None
    radius_factor: Optional[float] = None
    afield: Optional[ChartMap] = None
    meta: Dict[str, object] = field(default_factory=dict)

    def __post_init__(self):
        if self.h.n_in != 2 * self.n or self.h.n_out != self.n:
            raise ShapeMismatchError(
                f"{self.name}: h must map {2 * self.n} inputs to {self.n} outputs, "
                f"got {self.h.n_in} -> {self.h.n_out}"
            )
        if not self.periods:
            self.periods = (None,) * self.n
        lower, upper = self.h.box()
        self.sample_lower = tuple(self.sample_lower or lower[:self.n])
        self.sample_upper = tuple(self.sample_upper or upper[:self.n])

    @property
    def lower(self) -> Tuple[Bound, ...]:
        return self.h.box()[0][:self.n]

    @property
    def upper(self) -> Tuple[Bound, ...]:
        return self.h.box()[1][:self.n]

    def exact_possible(self) -> bool:
        return (
            self.h.rational()
            and all(p is None for p in self.periods)
            and not any(isinstance(b, float) for b in self.sample_lower + self.sample_upper)
        )

    def transcendental(self) -> bool:
        return not self.h.rational()

    def resolve_backend(self, requested: str = "auto") -> str:
        if requested == FLOAT or not self.exact_possible():
            return FLOAT
        return RATIONAL

    def default_tolerance(self, backend: str) -> float:
        if self.tolerance is not None:
            return self.tolerance
        return settings.tolerance_for(backend, self.transcendental())

    def radii(self, exact: bool) -> tuple:
        return ball_radii(self.sample_lower, self.sample_upper, self.radius_factor, exact)

    def wrap(self, point: Sequence) -> tuple:
        lower = self.lower
        return tuple(_wrap(x, lower[i], p) for i, (x, p) in enumerate(zip(point, self.periods)))

    def evaluate(self, x: Sequence, v: Sequence) -> tuple:
        out = self.h.evaluate(self.wrap(x) + tuple(v))
        return self.wrap(out)

    def __call__(self, x: Sequence, v: Sequence) -> tuple:
        return self.evaluate(x, v)

    def as_function(self):
        """h as a function of the concatenated 2n-vector."""
        n = self.n
        return lambda p: self.evaluate(p[:n], p[n:])

    def derivative(self, x: Sequence, v: Sequence, xdot: Sequence, vdot: Sequence) -> Tuple[tuple, tuple]:
        """(h(x, v), h'(x, v)(xdot, vdot)) by one dual-number evaluation."""
        return tangent_evaluate(self.as_function(), tuple(x) + tuple(v), tuple(xdot) + tuple(vdot))

    def difference(self, a: Sequence, b: Sequence) -> tuple:
        return vector_difference(a, b, self.periods)


class ProductMap(SmoothMap):
    """h x k on the product chart: ((x, y), (v, w)) -> (h(x, v), k(y, w))."""

    def __init__(self, first: AlgebraMap, second: AlgebraMap):
        self.first = first
        self.second = second

    @property
    def n_in(self) -> int:
        return 2 * (self.first.n + self.second.n)

    @property
    def n_out(self) -> int:
        return self.first.n + self.second.n

    def box(self):
        (l1, u1), (l2, u2) = self.first.h.box(), self.second.h.box()
        n, m = self.first.n, self.second.n
        return (l1[:n] + l2[:m] + l1[n:] + l2[m:], u1[:n] + u2[:m] + u1[n:] + u2[m:])

    def rational(self) -> bool:
        return self.first.h.rational() and self.second.h.rational()

    def evaluate(self, point, backend=None):
        n, m = self.first.n, self.second.n
        x, y = point[:n], point[n:n + m]
        v, w = point[n + m:2 * n + m], point[2 * n + m:]
        return self.first.evaluate(x, v) + self.second.evaluate(y, w)


# Reports


@dataclass
class AlgebraReport:
    name: str
    backend: str
    samples: int
    axiom1: Union[Fraction, float]
    axiom2: Union[Fraction, float]
    tolerance: float
    rejected: int = 0
    witness: Optional[List[str]] = None
    error: Optional[str] = None

    @property
    def passed(self) -> bool:
        return self.error is None and self.axiom1 <= self.tolerance and self.axiom2 <= self.tolerance


@dataclass
class IdentityReport:
    name: str
    backend: str
    samples: int
    d_invariance: Union[Fraction, float]
    nilpotency: Union[Fraction, float]
    image_inclusion: float
    max_rank: int
    rank_bound: int
    rank_profile: Dict[int, int]
    tolerance: float
    nilpotency_tolerance: float
    inclusion_tolerance: float = 0.0
    nilpotency_ratio: Optional[float] = None
    rank0_projection: Optional[Union[Fraction, float]] = None
    error: Optional[str] = None

    @property
    def passed(self) -> bool:
        if self.error is not None:
            return False
        checks = [
            self.d_invariance <= self.tolerance,
            self.nilpotency <= self.nilpotency_tolerance,
            self.image_inclusion <= self.inclusion_tolerance,
            self.max_rank <= self.rank_bound,
        ]
        if self.rank0_projection is not None:
            checks.append(self.rank0_projection <= self.tolerance)
        return all(checks)


@dataclass
class NijenhuisReport:
    name: str
    backend: str
    samples: int
    max_norm: Union[Fraction, float]
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_norm <= self.tolerance


@dataclass
class MorphismReport:
    name: str
    backend: str
    samples: int
    square: Union[Fraction, float]
    intertwining: Union[Fraction, float]
    tolerance: float
    rejected: int = 0
    error: Optional[str] = None

    @property
    def square_passed(self) -> bool:
        return self.error is None and self.square <= self.tolerance

    @property
    def intertwining_passed(self) -> bool:
        return self.error is None and self.intertwining <= self.tolerance

    @property
    def passed(self) -> bool:
        return self.square_passed and self.intertwining_passed


class EndomorphismField:
    """
    x -> A_x, from an algebra (A_x = h_x'(0)) or from a row-major n*n matrix field.

    Directional derivatives D_u A are taken by Weil lifts: mixed second
    derivatives of h for algebras, dual numbers for matrix fields.
    """

    def __init__(self, source: Union[AlgebraMap, ChartMap], n: Optional[int] = None):
        self.source = source
        if isinstance(source, AlgebraMap):
            self.n = source.n
        else:
            self.n = n or int(round(math.sqrt(source.n_out)))
            if self.n * self.n != source.n_out or source.n_in != self.n:
                raise ShapeMismatchError("matrix field must map n inputs to n*n entries")

    def _reshape(self, entries: Sequence) -> List[list]:
        n = self.n
        return [list(entries[i * n:(i + 1) * n]) for i in range(n)]

    def at(self, x: Sequence) -> List[list]:
        if isinstance(self.source, AlgebraMap):
            n = self.n
            return partial_jacobian(self.source.as_function(), tuple(x) + (0,) * n, range(n, 2 * n))
        return self._reshape([real(e) for e in self.source.evaluate(tuple(x))])

    def derivative(self, x: Sequence, u: Sequence) -> List[list]:
        n = self.n
        if isinstance(self.source, AlgebraMap):
            f = self.source.as_function()
            point = tuple(x) + (0,) * n
            direction = tuple(u) + (0,) * n
            columns = [
                mixed_second_derivative(f, point, direction, (0,) * n + tuple(int(i == j) for i in range(n)))
                for j in range(n)
            ]
            return [[columns[j][i] for j in range(n)] for i in range(n)]
        _, du = tangent_evaluate(self.source.evaluate, tuple(x), tuple(u))
        return self._reshape(du)


def _apply(matrix: List[list], vector: Sequence) -> tuple:
    return tuple(sum(a * b for a, b in zip(row, vector)) for row in matrix)


def _unit(n: int, i: int) -> tuple:
    return tuple(int(j == i) for j in range(n))


def _sub(a: Sequence, b: Sequence) -> tuple:
    return tuple(x - y for x, y in zip(a, b))


class AlgebraService:
    """Construction and verification of algebras over the tangent functor monad."""

    # Constructors

    def make_trivial(self, n: int, lower: Sequence = None, upper: Sequence = None) -> AlgebraMap:
        """tau_M: h(x, v) = x."""
        xs, vs = coordinate_names("x", n), coordinate_names("v", n)
        lower = tuple(lower or ("-1",) * n)
        upper = tuple(upper or ("1",) * n)
        h = ChartMap.from_strings(xs + vs, xs, lower + ("-1",) * n, upper + ("1",) * n, name="trivial")
        return AlgebraMap(n, h, name=f"trivial({n})")

    def make_free(self, n: int, lower: Sequence = None, upper: Sequence = None) -> AlgebraMap:
        """mu_M on TM = M x R^n: h((x, v), (xdot, vdot)) = (x, v + xdot), dimension 2n."""
        dim = 2 * n
        xs, vs = coordinate_names("x", dim), coordinate_names("v", dim)
        outputs = [xs[i] for i in range(n)] + [f"{xs[n + i]} + {vs[i]}" for i in range(n)]
        lower = tuple(lower or ("-1",) * dim)
        upper = tuple(upper or ("1",) * dim)
        h = ChartMap.from_strings(xs + vs, outputs, lower + ("-1",) * dim, upper + ("1",) * dim, name="free")
        return AlgebraMap(dim, h, name=f"free({n})")

    def make_affine(self, matrix: MatrixQ, lower: Sequence = None, upper: Sequence = None,
                    name: str = "") -> AlgebraMap:
        """h(x, v) = x + A v; A^2 = 0 is left for the checker to decide."""
        if not matrix.is_square():
            raise ShapeMismatchError(f"affine algebra needs a square matrix, got {matrix.shape}")
        n = matrix.nrows
        xs, vs = coordinate_names("x", n), coordinate_names("v", n)
        outputs = []
        for i, row in enumerate(matrix.rows):
            expr: Expr = Var(xs[i])
            for j, a in enumerate(row):
                if a != 0:
                    expr = expr + a * Var(vs[j])
            outputs.append(expr)
        lower = tuple(lower or ("-1",) * n)
        upper = tuple(upper or ("1",) * n)
        h = ChartMap.from_strings(xs + vs, [str(e) for e in outputs], lower + ("-1",) * n, upper + ("1",) * n,
                                  name="affine")
        return AlgebraMap(n, h, name=name or f"affine {matrix}", meta={"A": matrix})

    def make_semi_affine(self, afield: ChartMap, name: str = "", periods: Sequence = ()) -> AlgebraMap:
        """h(x, v) = x + A(x) v for a row-major matrix field A."""
        n = afield.n_in
        if afield.n_out != n * n:
            raise ShapeMismatchError(f"matrix field must have {n * n} entries, got {afield.n_out}")
        xs, vs = coordinate_names("x", n), coordinate_names("v", n)
        renamed = afield.substitute({old: Var(new) for old, new in zip(afield.inputs, xs)},
                                    xs, afield.lower, afield.upper)
        outputs = []
        for i in range(n):
            expr: Expr = Var(xs[i])
            for j in range(n):
                expr = expr + renamed.outputs[i * n + j] * Var(vs[j])
            outputs.append(expr)
        h = ChartMap(xs + vs, tuple(outputs), renamed.lower + (Fraction(-1),) * n,
                     renamed.upper + (Fraction(1),) * n, renamed.constraints, "semi-affine")
        return AlgebraMap(n, h, name=name or "semi-affine", periods=tuple(periods), afield=renamed)

    def make_product(self, first: AlgebraMap, second: AlgebraMap) -> AlgebraMap:
        tolerances = [t for t in (first.tolerance, second.tolerance) if t is not None]
        return AlgebraMap(
            first.n + second.n,
            ProductMap(first, second),
            name=f"{first.name} x {second.name}",
            periods=first.periods + second.periods,
            tolerance=max(tolerances) if tolerances else None,
            sample_lower=first.sample_lower + second.sample_lower,
            sample_upper=first.sample_upper + second.sample_upper,
        )

    # Axioms

    def check_axioms(self, h: AlgebraMap, samples: Optional[int] = None, seed: Optional[int] = None,
                     backend: str = "auto", tolerance: Optional[float] = None) -> AlgebraReport:
        """
        Sample both algebra axioms.

        Axiom 1: h(x, 0) = x. Axiom 2: h(h(x, v), h'(x, v)(xdot, vdot)) = h(x, v + xdot),
        with h' by dual numbers. Draws leaving the domain are resampled.
        """
        samples = samples or settings.samples
        seed = settings.seed if seed is None else seed
        backend = h.resolve_backend(backend)
        exact = backend == RATIONAL
        tol = tolerance if tolerance is not None else h.default_tolerance(backend)
        n = h.n
        zeros = (0,) * n
        sampler = Sampler(seed, exact)
        radii = h.radii(exact)

        def draw_base():
            return sampler.point(h.sample_lower, h.sample_upper)

        def draw_full():
            return (draw_base(), sampler.vector(radii), sampler.vector(radii), sampler.vector(radii))

        def axiom1(x):
            return max_abs(h.difference(h.evaluate(x, zeros), h.wrap(x)))

        def axiom2(parts):
            x, v, xdot, vdot = parts
            y, w = h.derivative(x, v, xdot, vdot)
            lhs = h.evaluate(y, w)
            rhs = h.evaluate(x, _sum(v, xdot))
            return max_abs(h.difference(lhs, rhs))

        try:
            first = run_sampled(draw_base, axiom1, samples, label=f"{h.name} axiom 1")
            second = run_sampled(draw_full, axiom2, samples, label=f"{h.name} axiom 2")
        except SamplingError as exc:
            logger.warning(f"[ALGEBRA] {h.name}: {exc}")
            return AlgebraReport(h.name, backend, samples, 0, 0, tol, error=str(exc))

        worst = max(range(samples), key=lambda i: second.results[i])
        witness = None
        if second.results[worst] > tol:
            witness = format_vector([c for part in second.inputs[worst] for c in part])
        report = AlgebraReport(
            h.name, backend, samples,
            max_abs(first.results), max_abs(second.results), tol,
            first.rejected + second.rejected, witness,
        )
        logger.info(
            f"[ALGEBRA] {h.name}: axiom1={float(report.axiom1):.3g} axiom2={float(report.axiom2):.3g} "
            f"({backend}) -> {'pass' if report.passed else 'FAIL'}"
        )
        return report

    # Endomorphism, rank, distribution

    def endomorphism_at(self, h: AlgebraMap, x: Sequence) -> Matrix:
        """A_x = h_x'(0); a MatrixQ when x and h are exact, a float array otherwise."""
        n = h.n
        rows = partial_jacobian(h.as_function(), tuple(x) + (0,) * n, range(n, 2 * n))
        if all(is_exact(a) for row in rows for a in row) and all(is_exact(c) for c in x):
            return MatrixQ.from_rows(rows)
        return np.array([[float(a) for a in row] for row in rows], dtype=float)

    def rank_at(self, h: AlgebraMap, x: Sequence) -> int:
        matrix = self.endomorphism_at(h, x)
        if isinstance(matrix, MatrixQ):
            return matrix.rank()
        return numerical_rank(matrix, settings.rank_threshold)

    def distribution_at(self, h: AlgebraMap, x: Sequence) -> List[tuple]:
        """Basis of D_x = im A_x: pivot columns when exact, orthonormal SVD columns otherwise."""
        matrix = self.endomorphism_at(h, x)
        if isinstance(matrix, MatrixQ):
            return matrix.column_space()
        basis = range_basis(matrix, settings.rank_threshold)
        return [tuple(float(c) for c in col) for col in basis.T]

    def check_identities(self, h: AlgebraMap, samples: Optional[int] = None, seed: Optional[int] = None,
                         backend: str = "auto", tolerance: Optional[float] = None) -> IdentityReport:
        """
        Identities every algebra satisfies: D-invariance h(x, xdot + A_x w) = h(x, xdot),
        A_x^2 = 0, im h_x'(v) inside D_{h(x,v)}, rank at most n/2, and h = tau when
        the rank vanishes everywhere.
        """
        samples = samples or settings.samples
        seed = settings.seed if seed is None else seed
        backend = h.resolve_backend(backend)
        exact = backend == RATIONAL
        n = h.n
        if tolerance is None:
            tolerance = 0.0 if exact else max(h.default_tolerance(backend), settings.flow_tolerance)
        nil_tol = 0.0 if exact else settings.float_transcendental_tolerance
        # the inclusion distance always comes from a float SVD
        inclusion_tol = max(tolerance, settings.float_poly_tolerance)
        sampler = Sampler(seed + 7, exact)
        radii = h.radii(exact)

        def draw():
            return (sampler.point(h.sample_lower, h.sample_upper), sampler.vector(radii), sampler.vector(radii))

        def check(parts):
            x, xdot, w = parts
            a_x = self._rows(self.endomorphism_at(h, x))
            shift = _sum(xdot, _apply(a_x, w))
            invariance = max_abs(h.difference(h.evaluate(x, shift), h.evaluate(x, xdot)))
            square = _matmul(a_x, a_x)
            nilpotency = max_abs(a for row in square for a in row)
            rank = self.rank_at(h, x)
            y = h.evaluate(x, xdot)
            jac = partial_jacobian(h.as_function(), tuple(x) + tuple(xdot), range(n, 2 * n))
            a_y = np.array([[float(real(a)) for a in row] for row in self._rows(self.endomorphism_at(h, y))])
            basis = range_basis(a_y, settings.rank_threshold)
            inclusion = distance_to_span(np.array([[float(real(a)) for a in row] for row in jac]), basis)
            projection = max_abs(h.difference(y, h.wrap(x))) if rank == 0 else None
            return invariance, nilpotency, inclusion, rank, projection

        try:
            run = run_sampled(draw, check, samples, label=f"{h.name} identities")
        except SamplingError as exc:
            return IdentityReport(h.name, backend, 0, 0, 0, 0.0, 0, n // 2, {}, tolerance, nil_tol, error=str(exc))

        ranks = [r[3] for r in run.results]
        profile: Dict[int, int] = {}
        for r in ranks:
            profile[r] = profile.get(r, 0) + 1
        projections = [r[4] for r in run.results if r[4] is not None]
        nilpotency = max_abs(r[1] for r in run.results)
        axiom_tol = h.default_tolerance(backend)
        report = IdentityReport(
            h.name, backend, samples,
            d_invariance=max_abs(r[0] for r in run.results),
            nilpotency=nilpotency,
            image_inclusion=max(r[2] for r in run.results),
            max_rank=max(ranks),
            rank_bound=n // 2,
            rank_profile=profile,
            tolerance=tolerance,
            nilpotency_tolerance=nil_tol,
            inclusion_tolerance=inclusion_tol,
            nilpotency_ratio=(float(nilpotency) / axiom_tol) if axiom_tol > 0 else None,
            rank0_projection=max_abs(projections) if len(projections) == len(ranks) else None,
        )
        logger.info(f"[IDENTITIES] {h.name}: ranks {profile}, ||A^2|| = {float(nilpotency):.3g}")
        return report

    @staticmethod
    def _rows(matrix: Matrix) -> List[list]:
        if isinstance(matrix, MatrixQ):
            return [list(row) for row in matrix.rows]
        return matrix.tolist()

    # Nijenhuis tensor

    def nijenhuis_at(self, source: Union[AlgebraMap, ChartMap, EndomorphismField], x: Sequence) -> List[List[tuple]]:
        """
        N[i][j] = N_A(e_i, e_j) at x, from the expanded form
        (D_{Ae_i} A) e_j - (D_{Ae_j} A) e_i - A((D_{e_i} A) e_j) + A((D_{e_j} A) e_i).
        """
        field_ = source if isinstance(source, EndomorphismField) else EndomorphismField(source)
        n = field_.n
        a_x = field_.at(x)
        images = [_apply(a_x, _unit(n, i)) for i in range(n)]
        along_image = [field_.derivative(x, images[i]) for i in range(n)]
        along_axis = [field_.derivative(x, _unit(n, i)) for i in range(n)]
        table = []
        for i in range(n):
            row = []
            for j in range(n):
                first = _sub(_apply(along_image[i], _unit(n, j)), _apply(along_image[j], _unit(n, i)))
                second = _sub(_apply(a_x, _apply(along_axis[i], _unit(n, j))),
                              _apply(a_x, _apply(along_axis[j], _unit(n, i))))
                row.append(_sub(first, second))
            table.append(row)
        return table

    def check_nijenhuis(self, h: Union[AlgebraMap, ChartMap], samples: Optional[int] = None,
                        seed: Optional[int] = None, tolerance: Optional[float] = None) -> NijenhuisReport:
        """Largest |N_A| entry over seeded sample points."""
        samples = samples or settings.samples
        seed = settings.seed if seed is None else seed
        if isinstance(h, AlgebraMap):
            source = h.afield if h.afield is not None else h
            name = h.name
            exact = h.exact_possible()
            lower, upper = h.sample_lower, h.sample_upper
        else:
            source = h
            name = h.name
            exact = h.rational()
            lower, upper = h.lower, h.upper
        field_ = EndomorphismField(source)
        sampler = Sampler(seed + 11, exact)
        worst = 0
        for _ in range(samples):
            x = sampler.point(lower, upper)
            table = self.nijenhuis_at(field_, x)
            worst = max(worst, max_abs(c for row in table for vec in row for c in vec))
        tol = tolerance if tolerance is not None else (0.0 if exact else settings.float_transcendental_tolerance)
        return NijenhuisReport(name, RATIONAL if exact else FLOAT, samples, worst, tol)

    # Morphisms

    def check_morphism(self, f: SmoothMap, h: AlgebraMap, k: AlgebraMap, samples: Optional[int] = None,
                       seed: Optional[int] = None, backend: str = "auto",
                       tolerance: Optional[float] = None) -> MorphismReport:
        """
        Morphism square k(f(x), f'(x)v) = f(h(x, v)) and the intertwining
        f'(x) A^h_x = A^k_{f(x)} f'(x).
        """
        if f.n_in != h.n or f.n_out != k.n:
            raise ShapeMismatchError(f"f maps {f.n_in} -> {f.n_out}, algebras have dimensions {h.n} and {k.n}")
        samples = samples or settings.samples
        seed = settings.seed if seed is None else seed
        exact = backend != FLOAT and h.exact_possible() and k.exact_possible() and f.rational()
        used = RATIONAL if exact else FLOAT
        if tolerance is None:
            tolerance = max(h.default_tolerance(used), k.default_tolerance(used))
        sampler = Sampler(seed + 13, exact)
        radii = h.radii(exact)

        def draw():
            return sampler.point(h.sample_lower, h.sample_upper), sampler.vector(radii)

        def check(parts):
            x, v = parts
            fx, dfv = tangent_evaluate(f.evaluate, x, v)
            lhs = k.evaluate(fx, dfv)
            rhs = f.evaluate(h.evaluate(x, v))
            square = max_abs(k.difference(lhs, rhs))
            jac = partial_jacobian(f.evaluate, x, range(h.n))
            a_h = self._rows(self.endomorphism_at(h, x))
            a_k = self._rows(self.endomorphism_at(k, fx))
            gap = _matrix_sub(_matmul(jac, a_h), _matmul(a_k, jac))
            return square, max_abs(a for row in gap for a in row)

        try:
            run = run_sampled(draw, check, samples, label="morphism")
        except SamplingError as exc:
            return MorphismReport(f"{h.name} -> {k.name}", used, 0, 0, 0, tolerance, error=str(exc))
        report = MorphismReport(
            f"{h.name} -> {k.name}", used, samples,
            max_abs(r[0] for r in run.results), max_abs(r[1] for r in run.results),
            tolerance, run.rejected,
        )
        logger.info(f"[MORPHISM] {report.name}: square={float(report.square):.3g} "
                    f"intertwining={float(report.intertwining):.3g}")
        return report


def _sum(a: Sequence, b: Sequence) -> tuple:
    return tuple(x + y for x, y in zip(a, b))


def _matmul(a: List[list], b: List[list]) -> List[list]:
    return [[sum(a[i][k] * b[k][j] for k in range(len(b))) for j in range(len(b[0]))] for i in range(len(a))]


def _matrix_sub(a: List[list], b: List[list]) -> List[list]:
    return [[x - y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


# Global service instance
algebra_service = AlgebraService()
