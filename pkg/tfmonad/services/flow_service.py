"""
Flow Service
Rank-1 algebras h(x, v) = phi_{alpha(x,v)}(x) from a vector field flow and a
time function, with the time-function and basic-form checks.
"""
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations_with_replacement, product
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from tfmonad.config import settings
from tfmonad.errors import (
    DegenerateRank1Error,
    DomainExitError,
    DomainViolationError,
    FlowError,
    SamplingError,
    ShapeMismatchError,
    StepBudgetExceededError,
)
from tfmonad.helpers.numeric import format_vector, max_abs, real
from tfmonad.helpers.sampling import Sampler, ball_radii, run_sampled
from tfmonad.services.algebra_service import AlgebraMap, coordinate_names
from tfmonad.services.derivatives import coordinate_directions, jacobian, tangent_evaluate
from tfmonad.services.expressions import FLOAT, Bound, ChartMap, SmoothMap
from tfmonad.services.weil import WeilElement

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class VectorField:
    """A chart map n -> n integrated by fixed-step RK4."""

    field: ChartMap
    step: Optional[float] = None
    max_steps: Optional[int] = None

    def __post_init__(self):
        if self.field.n_in != self.field.n_out:
            raise ShapeMismatchError(f"vector field must map n -> n, got {self.field.n_in} -> {self.field.n_out}")

    @property
    def n(self) -> int:
        return self.field.n_in

    def step_size(self) -> float:
        if self.step is not None:
            return float(self.step)
        diameter = math.sqrt(sum((float(hi) - float(lo)) ** 2 for lo, hi in zip(self.field.lower, self.field.upper)))
        return diameter / settings.step_divisor

    def step_budget(self) -> int:
        return self.max_steps or settings.max_steps

    def evaluate(self, x: Sequence) -> tuple:
        return self.field.evaluate(tuple(x), FLOAT)


@dataclass(frozen=True)
class TimeFunction:
    """alpha(x, v) as a chart map 2n -> 1, with alpha(x, 0) = 0."""

    expr: ChartMap

    @property
    def n(self) -> int:
        return self.expr.n_in // 2

    def __call__(self, x: Sequence, v: Sequence):
        return self.expr.evaluate(tuple(x) + tuple(v))[0]


@dataclass(frozen=True)
class OneForm:
    """Covector coefficients a(x) as a chart map n -> n; alpha_x(v) = sum a_i(x) v_i."""

    coefficients: ChartMap

    @property
    def n(self) -> int:
        return self.coefficients.n_in

    def at(self, x: Sequence) -> tuple:
        return self.coefficients.evaluate(tuple(x))

    def __call__(self, x: Sequence, v: Sequence):
        return sum(a * w for a, w in zip(self.at(x), v))


Alpha = Union[TimeFunction, OneForm]


@dataclass
class FlowResult:
    point: tuple
    steps: int
    error_estimate: float


def _is_zero(t) -> bool:
    if isinstance(t, WeilElement):
        return t.is_zero()
    return t == 0


def _axpy(x: Sequence, a, k: Sequence) -> tuple:
    return tuple(xi + a * ki for xi, ki in zip(x, k))


class FlowMap(SmoothMap):
    """(x, v) -> phi_{alpha(x, v)}(x) as a smooth map on generic scalars."""

    def __init__(self, service: "FlowService", X: VectorField, alpha: Alpha,
                 lower: Tuple[Bound, ...], upper: Tuple[Bound, ...]):
        self.service = service
        self.X = X
        self.alpha = alpha
        self.lower = tuple(lower)
        self.upper = tuple(upper)

    @property
    def n_in(self) -> int:
        return 2 * self.X.n

    @property
    def n_out(self) -> int:
        return self.X.n

    def box(self):
        return self.lower, self.upper

    def rational(self) -> bool:
        return False

    def evaluate(self, point: Sequence, backend: Optional[str] = None) -> tuple:
        n = self.X.n
        x, v = tuple(point[:n]), tuple(point[n:])
        t = self.alpha(x, v)
        return self.service.integrate(self.X, x, t)


# Reports


@dataclass
class TimeAxiomReport:
    samples: int
    zero_section: float
    semibasic: float
    cocycle: float
    tolerance: float
    witness: Optional[List[str]] = None
    error: Optional[str] = None

    @property
    def semibasic_passed(self) -> bool:
        return self.error is None and self.semibasic <= self.tolerance

    @property
    def passed(self) -> bool:
        return (
            self.error is None
            and self.zero_section <= self.tolerance
            and self.semibasic <= self.tolerance
            and self.cocycle <= self.tolerance
        )


@dataclass
class BasicFormReport:
    samples: int
    contraction: float
    lie_derivative: float
    pullback: Optional[float]
    tolerance: float
    error: Optional[str] = None

    @property
    def passed(self) -> bool:
        if self.error is not None:
            return False
        checks = [self.contraction <= self.tolerance, self.lie_derivative <= self.tolerance]
        if self.pullback is not None:
            checks.append(self.pullback <= self.tolerance)
        return all(checks)


@dataclass
class ObstructionReport:
    """Smallest singular value of the polynomial 1-form panel under (i_X, L_X)."""
    degree: int
    columns: int
    rows: int
    sigma_min: float
    threshold: float

    @property
    def obstructed(self) -> bool:
        return self.sigma_min > self.threshold


@dataclass
class Rank1MorphismReport:
    samples: int
    square: float
    linear: Optional[float]
    tolerance: float
    rejected: int = 0
    error: Optional[str] = None

    @property
    def passed(self) -> bool:
        if self.error is not None or self.square > self.tolerance:
            return False
        return self.linear is None or self.linear <= self.tolerance


class FlowService:
    """Numerical flows and the rank-1 algebras built from them."""

    def integrate(self, X: VectorField, x: Sequence, t) -> tuple:
        """
        RK4 from x for time t with N = ceil(|t|/step) steps (at least one when t != 0).

        Scalars may be Weil elements, in which case the integrator arithmetic
        itself carries the derivatives. N depends only on the real part of t.
        """
        if _is_zero(t):
            return tuple(x)
        steps = max(1, math.ceil(abs(float(real(t))) / X.step_size()))
        return self._rk4(X, x, t, steps)

    def _rk4(self, X: VectorField, x: Sequence, t, steps: int) -> tuple:
        if steps > X.step_budget():
            raise StepBudgetExceededError(f"time {float(real(t)):.6g} needs {steps} steps, budget is {X.step_budget()}")
        h = t / steps
        y = tuple(x)
        try:
            for _ in range(steps):
                k1 = X.evaluate(y)
                k2 = X.evaluate(_axpy(y, h / 2, k1))
                k3 = X.evaluate(_axpy(y, h / 2, k2))
                k4 = X.evaluate(_axpy(y, h, k3))
                y = tuple(
                    yi + h / 6 * (a + 2 * b + 2 * c + d)
                    for yi, a, b, c, d in zip(y, k1, k2, k3, k4)
                )
        except DomainViolationError as exc:
            raise DomainExitError(f"trajectory left the domain: {exc}") from exc
        return y

    def flow(self, X: VectorField, x: Sequence, t) -> FlowResult:
        """Flow point with the Richardson estimate |y_N - y_2N| / 15."""
        if _is_zero(t):
            return FlowResult(tuple(x), 0, 0.0)
        steps = max(1, math.ceil(abs(float(real(t))) / X.step_size()))
        coarse = self._rk4(X, x, t, steps)
        try:
            fine = self._rk4(X, x, t, 2 * steps)
            estimate = float(max_abs(a - b for a, b in zip(coarse, fine))) / 15
        except StepBudgetExceededError:
            estimate = math.nan
        return FlowResult(coarse, steps, estimate)

    def error_tolerance(self, estimates: Iterable[float], floor: Optional[float] = None) -> float:
        """richardson_factor times the largest finite estimate, never below the configured flow tolerance."""
        floor = settings.flow_tolerance if floor is None else floor
        finite = [e for e in estimates if not math.isnan(e)]
        return max(floor, settings.richardson_factor * max(finite, default=0.0))

    def box_error(self, X: VectorField, alpha: Alpha, lower: Sequence[Bound], upper: Sequence[Bound],
                  radii: Sequence[float]) -> float:
        """Largest Richardson estimate over flows from the box center and corners with v = +-radii."""
        center = tuple((float(lo) + float(hi)) / 2 for lo, hi in zip(lower, upper))
        corners = [tuple(float(c) for c in corner) for corner in product(*zip(lower, upper))]
        worst = 0.0
        for x in [center] + corners:
            for sign in (1.0, -1.0):
                v = tuple(sign * float(r) for r in radii)
                try:
                    estimate = self.flow(X, x, alpha(x, v)).error_estimate
                except (DomainViolationError, FlowError):
                    continue
                if not math.isnan(estimate):
                    worst = max(worst, estimate)
        return worst

    def make_rank1(
        self,
        X: VectorField,
        alpha: Alpha,
        name: str = "",
        sample_lower: Optional[Sequence[Bound]] = None,
        sample_upper: Optional[Sequence[Bound]] = None,
        fiber_bound: Bound = 1,
        radius_factor: Optional[float] = None,
        tolerance: Optional[float] = None,
    ) -> AlgebraMap:
        """
        h(x, v) = phi_{alpha(x, v)}(x); alpha_x(v) when alpha is a one-form.

        Without an explicit tolerance the algebra is checked against error_tolerance
        of the Richardson estimates of flows from the sample box center and corners.
        """
        if alpha.n != X.n:
            raise ShapeMismatchError(f"time function is on dimension {alpha.n}, vector field on {X.n}")
        n = X.n
        fiber = Fraction(fiber_bound) if not isinstance(fiber_bound, float) else fiber_bound
        lower = tuple(X.field.lower) + (-fiber,) * n
        upper = tuple(X.field.upper) + (fiber,) * n
        flow_map = FlowMap(self, X, alpha, lower, upper)
        h = AlgebraMap(
            n, flow_map,
            name=name or "rank-1 flow algebra",
            tolerance=tolerance,
            sample_lower=tuple(sample_lower) if sample_lower else None,
            sample_upper=tuple(sample_upper) if sample_upper else None,
            radius_factor=radius_factor,
            meta={"X": X, "alpha": alpha},
        )
        if tolerance is None:
            estimate = self.box_error(X, alpha, h.sample_lower, h.sample_upper, h.radii(False))
            h.tolerance = self.error_tolerance([estimate])
            h.meta["error_estimate"] = estimate
            logger.debug(f"[FLOW] {h.name}: Richardson estimate {estimate:.3g}, tolerance {h.tolerance:.3g}")
        return h

    def check_time_axioms(self, X: VectorField, alpha: Alpha, lower: Sequence[Bound], upper: Sequence[Bound],
                          samples: Optional[int] = None, seed: Optional[int] = None,
                          tolerance: Optional[float] = None) -> TimeAxiomReport:
        """
        alpha(x, 0) = 0, the semibasic axiom alpha(x, v + l X_x) = alpha(x, v) for l in [-1, 1],
        and the cocycle alpha(phi_t(x), phi_t'(x) xdot) = alpha(x, v + xdot) - alpha(x, v)
        at t = alpha(x, v), with phi_t' by dual numbers through the integrator.
        """
        samples = samples or settings.samples
        seed = settings.seed if seed is None else seed
        sampler = Sampler(seed + 17, exact=False)
        radii = ball_radii(lower, upper)
        zeros = (0.0,) * X.n

        def draw():
            return (sampler.point(lower, upper), sampler.vector(radii), sampler.vector(radii),
                    sampler.scalar(-1, 1))

        def check(parts):
            x, v, xdot, lam = parts
            base = alpha(x, v)
            zero = abs(float(alpha(x, zeros)))
            shifted = _axpy(v, lam, X.evaluate(x))
            semibasic = abs(float(alpha(x, shifted) - base))
            y, dy = tangent_evaluate(lambda p: self.integrate(X, p, base), x, xdot)
            cocycle = abs(float(alpha(y, dy) - (alpha(x, _axpy(v, 1, xdot)) - base)))
            estimate = self.flow(X, x, float(base)).error_estimate
            return zero, semibasic, cocycle, estimate

        try:
            run = run_sampled(draw, check, samples, label="time axioms")
        except SamplingError as exc:
            fallback = settings.flow_tolerance if tolerance is None else tolerance
            return TimeAxiomReport(0, 0.0, 0.0, 0.0, fallback, error=str(exc))
        if tolerance is None:
            tolerance = self.error_tolerance(r[3] for r in run.results)
        worst = max(range(samples), key=lambda i: max(run.results[i][:3]))
        witness = None
        if max(run.results[worst][:3]) > tolerance:
            x, v, xdot, lam = run.inputs[worst]
            witness = format_vector(tuple(x) + tuple(v) + tuple(xdot) + (lam,))
        report = TimeAxiomReport(
            samples,
            max(r[0] for r in run.results),
            max(r[1] for r in run.results),
            max(r[2] for r in run.results),
            tolerance,
            witness,
        )
        logger.info(f"[TIME] semibasic={report.semibasic:.3g} cocycle={report.cocycle:.3g}")
        return report

    # Basic forms

    def contraction(self, X: VectorField, form: OneForm, x: Sequence):
        """i_X alpha at x."""
        return sum(a * b for a, b in zip(form.at(x), X.evaluate(x)))

    def lie_derivative(self, X: VectorField, form: OneForm, x: Sequence) -> tuple:
        """
        Cartan: (L_X alpha)_j = sum_i X_i (d_i a_j - d_j a_i) + d_j (i_X alpha),
        both differentials from one jacobian-algebra evaluation each.
        """
        n = X.n
        dirs = coordinate_directions(n, range(n))
        da = jacobian(form.at, x, dirs)
        dcontraction = jacobian(lambda p: (self.contraction(X, form, p),), x, dirs)[0]
        field_ = X.evaluate(x)
        return tuple(
            sum(field_[i] * (da[j][i] - da[i][j]) for i in range(n)) + dcontraction[j]
            for j in range(n)
        )

    def pullback_residual(self, X: VectorField, form: OneForm, x: Sequence, t: float) -> float:
        """max_j |alpha_{phi_t(x)}(phi_t' e_j) - alpha_x(e_j)|."""
        n = X.n
        worst = 0.0
        for w in coordinate_directions(n, range(n)):
            y, dy = tangent_evaluate(lambda p: self.integrate(X, p, t), x, w)
            worst = max(worst, abs(float(form(y, dy) - form(x, w))))
        return worst

    def check_basic_form(self, X: VectorField, form: OneForm, lower: Sequence[Bound], upper: Sequence[Bound],
                         samples: Optional[int] = None, seed: Optional[int] = None,
                         tolerance: Optional[float] = None, pullback_time: float = 0.5) -> BasicFormReport:
        """Residuals of i_X alpha, L_X alpha and, when pullback_time > 0, phi_t* alpha - alpha."""
        samples = samples or settings.samples
        seed = settings.seed if seed is None else seed
        sampler = Sampler(seed + 19, exact=False)

        def draw():
            return sampler.point(lower, upper), sampler.scalar(-pullback_time, pullback_time)

        def check(parts):
            x, t = parts
            contraction = abs(float(self.contraction(X, form, x)))
            lie = float(max_abs(self.lie_derivative(X, form, x)))
            pullback, estimate = None, 0.0
            if pullback_time > 0:
                pullback = self.pullback_residual(X, form, x, t)
                estimate = self.flow(X, x, t).error_estimate
            return contraction, lie, pullback, estimate

        try:
            run = run_sampled(draw, check, samples, label="basic form")
        except SamplingError as exc:
            logger.warning(f"[BASIC] {exc}")
            fallback = settings.flow_tolerance if tolerance is None else tolerance
            return BasicFormReport(0, 0.0, 0.0, None, fallback, error=str(exc))
        if tolerance is None:
            tolerance = self.error_tolerance(r[3] for r in run.results)
        pullbacks = [r[2] for r in run.results if r[2] is not None]
        report = BasicFormReport(
            samples,
            max(r[0] for r in run.results),
            max(r[1] for r in run.results),
            max(pullbacks) if pullbacks else None,
            tolerance,
        )
        logger.info(f"[BASIC] i_X={report.contraction:.3g} L_X={report.lie_derivative:.3g}")
        return report

    def basic_form_obstruction(self, X: VectorField, lower: Sequence[Bound], upper: Sequence[Bound],
                               degree: int = 2, samples: int = 24, seed: Optional[int] = None,
                               threshold: float = 1e-6) -> ObstructionReport:
        """
        Smallest singular value of the linear map sending the coefficients of a
        polynomial 1-form of the given degree to its stacked (i_X, L_X) samples.
        A value bounded away from 0 rules out a basic form in that panel.
        """
        seed = settings.seed if seed is None else seed
        n = X.n
        names = coordinate_names("x", n)
        monomials = _monomials(names, degree)
        sampler = Sampler(seed + 23, exact=False)
        points = [sampler.point(lower, upper) for _ in range(samples)]
        columns = []
        for slot in range(n):
            for mono in monomials:
                exprs = [mono if k == slot else "0" for k in range(n)]
                form = OneForm(ChartMap.from_strings(names, exprs, X.field.lower, X.field.upper, name=mono))
                column = []
                for x in points:
                    column.append(float(self.contraction(X, form, x)))
                    column.extend(float(c) for c in self.lie_derivative(X, form, x))
                columns.append(column)
        matrix = np.array(columns, dtype=float).T
        sigma = np.linalg.svd(matrix, compute_uv=False)
        report = ObstructionReport(degree, matrix.shape[1], matrix.shape[0], float(sigma[-1]), threshold)
        logger.info(f"[BASIC] obstruction sigma_min={report.sigma_min:.3g} over {report.columns} forms")
        return report

    # Morphisms between rank-1 algebras

    def check_rank1_morphism(self, f: SmoothMap, source: Tuple[VectorField, Alpha], target: Tuple[VectorField, Alpha],
                             lower: Sequence[Bound], upper: Sequence[Bound], samples: Optional[int] = None,
                             seed: Optional[int] = None, tolerance: Optional[float] = None) -> Rank1MorphismReport:
        """
        Morphism square k(f(x), f'(x)v) = f(h(x, v)) and, for one-forms, the
        linear relation beta_{f(x)}(f'(x)w) = g(x) alpha_x(w) with
        g(x) = beta_{f(x)}(f'(x)a(x)) / alpha_x(a(x)), a the coefficients of alpha.
        """
        (X, alpha), (Y, beta) = source, target
        # evaluated only; the report tolerance comes from the sampled flows
        h = self.make_rank1(X, alpha, name="source", tolerance=settings.flow_tolerance)
        k = self.make_rank1(Y, beta, name="target", tolerance=settings.flow_tolerance)
        samples = samples or settings.samples
        seed = settings.seed if seed is None else seed
        forms = isinstance(alpha, OneForm) and isinstance(beta, OneForm)
        sampler = Sampler(seed + 29, exact=False)
        radii = ball_radii(lower, upper)

        def draw():
            return sampler.point(lower, upper), sampler.vector(radii)

        def check(parts):
            x, v = parts
            fx, dfv = tangent_evaluate(f.evaluate, x, v)
            square = float(max_abs(a - b for a, b in zip(k.evaluate(fx, dfv), f.evaluate(h.evaluate(x, v)))))
            linear = None
            if forms:
                a = alpha.at(x)
                denominator = float(alpha(x, a))
                if abs(denominator) < 1e-12:
                    raise DegenerateRank1Error(f"alpha vanishes at {format_vector(x)}")
                _, dfa = tangent_evaluate(f.evaluate, x, a)
                g = float(beta(fx, dfa)) / denominator
                linear = 0.0
                for w in coordinate_directions(X.n, range(X.n)):
                    _, dfw = tangent_evaluate(f.evaluate, x, w)
                    linear = max(linear, abs(float(beta(fx, dfw)) - g * float(alpha(x, w))))
            estimate = max(self.flow(X, x, float(alpha(x, v))).error_estimate,
                           self.flow(Y, fx, float(beta(fx, dfv))).error_estimate)
            return square, linear, estimate

        try:
            run = run_sampled(draw, check, samples, label="rank-1 morphism")
        except SamplingError as exc:
            fallback = settings.flow_tolerance if tolerance is None else tolerance
            return Rank1MorphismReport(0, 0.0, None, fallback, error=str(exc))
        if tolerance is None:
            tolerance = self.error_tolerance(r[2] for r in run.results)
        linears = [r[1] for r in run.results if r[1] is not None]
        report = Rank1MorphismReport(
            samples,
            max(r[0] for r in run.results),
            max(linears) if linears else None,
            tolerance,
            run.rejected,
        )
        logger.info(f"[MORPHISM] rank-1 square={report.square:.3g}")
        return report


def _monomials(names: Sequence[str], degree: int) -> List[str]:
    """Monomials of total degree <= degree as expression strings, "1" first."""
    terms = [t for d in range(degree + 1) for t in combinations_with_replacement(range(len(names)), d)]
    return ["*".join(names[i] for i in t) if t else "1" for t in terms]


# Global service instance
flow_service = FlowService()
