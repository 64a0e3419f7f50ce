"""
Monad Service
The tangent functor monad in charts: structure maps, tangent maps, law
verification and the checkers for uniqueness and for the missing comonad.
"""
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np

from tfmonad.config import settings
from tfmonad.errors import SamplingError
from tfmonad.helpers.numeric import format_vector, format_scalar, max_abs, residual
from tfmonad.helpers.sampling import Sampler, run_sampled
from tfmonad.services.derivatives import second_tangent_evaluate, tangent_evaluate
from tfmonad.services.expressions import ChartMap, FLOAT, RATIONAL
from tfmonad.services.matrices import MatrixQ

logger = logging.getLogger(__name__)

Vector = Tuple


@dataclass(frozen=True)
class TangentPoint:
    x: Vector
    v: Vector


@dataclass(frozen=True)
class T2Point:
    x: Vector
    v: Vector
    xdot: Vector
    vdot: Vector


@dataclass(frozen=True)
class T3Point:
    """(x, v, xdot, vdot) at the base and its tangent (x1, v1, xdot1, vdot1)."""
    x: Vector
    v: Vector
    xdot: Vector
    vdot: Vector
    x1: Vector
    v1: Vector
    xdot1: Vector
    vdot1: Vector


def _add(*vectors: Vector) -> Vector:
    return tuple(sum(parts) for parts in zip(*vectors))


def _zeros(n: int) -> Vector:
    return (0,) * n


# Structure maps


def zero_section(x: Vector) -> TangentPoint:
    return TangentPoint(tuple(x), _zeros(len(x)))


def tau(p: TangentPoint) -> Vector:
    return p.x


def mu(xi: T2Point) -> TangentPoint:
    """mu(x, v, xdot, vdot) = (x, v + xdot)."""
    return TangentPoint(xi.x, _add(xi.v, xi.xdot))


def zeta_T(p: TangentPoint) -> T2Point:
    """Zero section of TM: (x, v) -> (x, v, 0, 0)."""
    n = len(p.x)
    return T2Point(p.x, p.v, _zeros(n), _zeros(n))


def T_zeta(p: TangentPoint) -> T2Point:
    """Tangent map of the zero section: (x, v) -> (x, 0, v, 0)."""
    n = len(p.x)
    return T2Point(p.x, _zeros(n), p.v, _zeros(n))


def tau_T(xi: T2Point) -> TangentPoint:
    return TangentPoint(xi.x, xi.v)


def T_tau(xi: T2Point) -> TangentPoint:
    return TangentPoint(xi.x, xi.xdot)


def mu_T(xi: T3Point) -> T2Point:
    """mu of TM: (x, v, xdot + x1, vdot + v1)."""
    return T2Point(xi.x, xi.v, _add(xi.xdot, xi.x1), _add(xi.vdot, xi.v1))


def T_mu(xi: T3Point) -> T2Point:
    """Tangent map of mu: (x, v + xdot, x1, v1 + xdot1)."""
    return T2Point(xi.x, _add(xi.v, xi.xdot), xi.x1, _add(xi.v1, xi.xdot1))


# Tangent maps


def tangent_map(f: ChartMap, p: TangentPoint) -> TangentPoint:
    """Tf(x, v) = (f(x), f'(x)v) by dual-number evaluation."""
    y, w = tangent_evaluate(f.evaluate, p.x, p.v)
    return TangentPoint(y, w)


def second_tangent_map(f: ChartMap, xi: T2Point) -> T2Point:
    """T^2 f by evaluation over the second tangent algebra."""
    y, w, ydot, wdot = second_tangent_evaluate(f.evaluate, xi.x, xi.v, xi.xdot, xi.vdot)
    return T2Point(y, w, ydot, wdot)


def flatten(point) -> tuple:
    if isinstance(point, TangentPoint):
        return point.x + point.v
    if isinstance(point, T2Point):
        return point.x + point.v + point.xdot + point.vdot
    if isinstance(point, T3Point):
        return (point.x + point.v + point.xdot + point.vdot
                + point.x1 + point.v1 + point.xdot1 + point.vdot1)
    return tuple(point)


# Reports


@dataclass
class LawResult:
    """Outcome of one law on the sampled points."""
    name: str
    backend: str
    samples: int
    max_residual: Union[Fraction, float]
    tolerance: float
    witness: Optional[List[str]] = None
    rejected: int = 0
    error: Optional[str] = None

    @property
    def passed(self) -> bool:
        return self.error is None and self.max_residual <= self.tolerance

    @property
    def verdict(self) -> str:
        return "consistent" if self.passed else "violated"


@dataclass
class LawReport:
    """Per-law results; laws are checked on finite panels, never proved."""
    title: str
    laws: List[LawResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(law.passed for law in self.laws)

    def law(self, name: str) -> LawResult:
        return next(law for law in self.laws if law.name == name)


@dataclass
class FitResult:
    a: Union[Fraction, float]
    b: Union[Fraction, float]
    residual: Union[Fraction, float]


@dataclass
class Mismatch:
    """The candidate is not of the form a tau_T + b T_tau."""
    residual: Union[Fraction, float]
    reason: str


@dataclass
class Witness:
    """Two sides of a naturality square that disagree."""
    description: str
    point: TangentPoint
    lhs: T2Point
    rhs: T2Point
    gap: Union[Fraction, float]
    slot: str


def default_maps(dim: int) -> List[ChartMap]:
    """Naturality panel: linear, quadratic and transcendental endomorphisms of [-1, 1]^dim."""
    names = tuple(f"x{i + 1}" for i in range(dim))
    lower, upper = ("-1",) * dim, ("1",) * dim
    nxt = [names[(i + 1) % dim] for i in range(dim)]
    linear = [f"{names[i]}/2 - {nxt[i]}/3" for i in range(dim)]
    quadratic = [f"{names[i]}^2/2 - {names[i]}*{nxt[i]}/3 + 1/5" for i in range(dim)]
    transcendental = [f"sin({names[i]})/2 + exp({nxt[i]})/5 - 1/4" for i in range(dim)]
    return [
        ChartMap.from_strings(names, linear, lower, upper, name="linear"),
        ChartMap.from_strings(names, quadratic, lower, upper, name="quadratic"),
        ChartMap.from_strings(names, transcendental, lower, upper, name="transcendental"),
    ]


class MonadService:
    """Law verification for the tangent functor monad."""

    def verify_monad_laws(
        self,
        dim: int,
        samples: Optional[int] = None,
        seed: Optional[int] = None,
        maps: Optional[Sequence[ChartMap]] = None,
        backend: str = "auto",
        tolerance: Optional[float] = None,
    ) -> LawReport:
        """
        Check unit, associativity and naturality laws on seeded samples.

        Args:
            dim: Chart dimension.
            samples: Points per law.
            seed: Base seed; every law draws from its own stream.
            maps: Naturality panel; defaults to linear, quadratic and transcendental maps.
            backend: "rational", "float" or "auto" (exact whenever the map allows it).
            tolerance: Overrides the backend default tolerance.

        Returns:
            LawReport with one entry per law and map.
        """
        samples = samples or settings.samples
        seed = settings.seed if seed is None else seed
        maps = list(maps) if maps is not None else default_maps(dim)
        report = LawReport(title=f"tangent functor monad, dim={dim}")
        structure_backend = FLOAT if backend == FLOAT else RATIONAL
        box = (("-1",) * dim, ("1",) * dim)
        lower = tuple(Fraction(b) for b in box[0])
        upper = tuple(Fraction(b) for b in box[1])

        def law(name, arity, check, law_backend, transcendental=False, offset=0):
            sampler = Sampler(seed + offset, exact=law_backend == RATIONAL)

            def draw():
                return tuple(sampler.point(lower, upper) for _ in range(arity))

            tol = tolerance if tolerance is not None else settings.tolerance_for(law_backend, transcendental)
            try:
                run = run_sampled(draw, check, samples, label=name)
            except SamplingError as exc:
                report.laws.append(LawResult(name, law_backend, 0, 0, tol, error=str(exc)))
                return
            worst = max(range(len(run.results)), key=lambda i: run.results[i], default=None)
            witness = None
            if worst is not None and run.results[worst] > 0:
                witness = format_vector([c for part in run.inputs[worst] for c in part])
            report.laws.append(LawResult(
                name, law_backend, len(run.results),
                max_abs(run.results), tol, witness, run.rejected,
            ))

        def unit_zeta(parts):
            p = TangentPoint(*parts)
            return residual(flatten(mu(zeta_T(p))), flatten(p))

        def unit_T_zeta(parts):
            p = TangentPoint(*parts)
            return residual(flatten(mu(T_zeta(p))), flatten(p))

        def associativity(parts):
            xi = T3Point(*parts)
            return residual(flatten(mu(mu_T(xi))), flatten(mu(T_mu(xi))))

        law("unit: mu o zeta_T = id", 2, unit_zeta, structure_backend, offset=1)
        law("unit: mu o T zeta = id", 2, unit_T_zeta, structure_backend, offset=2)
        law("associativity: mu o mu_T = mu o T mu", 8, associativity, structure_backend, offset=3)

        for index, f in enumerate(maps):
            exact = f.rational() and backend != FLOAT
            map_backend = RATIONAL if exact else FLOAT
            transcendental = not f.rational()
            offset = 10 * (index + 1)

            def nat_zeta(parts, f=f):
                x = parts[0]
                return residual(flatten(tangent_map(f, zero_section(x))), flatten(zero_section(f.evaluate(x))))

            def nat_tau(parts, f=f):
                p = TangentPoint(*parts)
                return residual(tau(tangent_map(f, p)), f.evaluate(tau(p)))

            def nat_mu(parts, f=f):
                xi = T2Point(*parts)
                return residual(flatten(tangent_map(f, mu(xi))), flatten(mu(second_tangent_map(f, xi))))

            law(f"naturality of zeta under {f.name}", 1, nat_zeta, map_backend, transcendental, offset + 1)
            law(f"naturality of tau under {f.name}", 2, nat_tau, map_backend, transcendental, offset + 2)
            law(f"naturality of mu under {f.name}", 4, nat_mu, map_backend, transcendental, offset + 3)

        logger.info(f"[MONAD] dim={dim}: {sum(l.passed for l in report.laws)}/{len(report.laws)} laws consistent")
        return report

    def check_candidate_laws(
        self,
        candidate: Callable[[T2Point], TangentPoint],
        dim: int,
        samples: Optional[int] = None,
        seed: Optional[int] = None,
    ) -> LawReport:
        """Unit laws for an arbitrary T^2 -> T candidate, exact."""
        samples = samples or settings.samples
        seed = settings.seed if seed is None else seed
        sampler = Sampler(seed, exact=True)
        lower, upper = (Fraction(-1),) * dim, (Fraction(1),) * dim
        points = [TangentPoint(sampler.point(lower, upper), sampler.point(lower, upper)) for _ in range(samples)]
        report = LawReport(title="candidate multiplication")
        for name, unit in (("unit: zeta_T", zeta_T), ("unit: T zeta", T_zeta)):
            residuals = [residual(flatten(candidate(unit(p))), flatten(p)) for p in points]
            worst = max(range(samples), key=lambda i: residuals[i])
            witness = format_vector(flatten(points[worst])) if residuals[worst] > 0 else None
            report.laws.append(LawResult(name, RATIONAL, samples, max_abs(residuals), 0.0, witness))
        return report

    def fit_T2_to_T(
        self,
        candidate: Callable[[T2Point], TangentPoint],
        dims: Sequence[int] = (1, 2, 3),
        samples: Optional[int] = None,
        seed: Optional[int] = None,
        tolerance: Optional[float] = None,
    ) -> Union[FitResult, Mismatch]:
        """
        Least-squares fit of candidate to a tau_T + b T_tau.

        The fit is exact (normal equations over Fractions) when the candidate
        returns rationals on rational samples.
        """
        samples = samples or settings.samples
        seed = settings.seed if seed is None else seed
        rows: List[Tuple] = []
        targets: List = []
        base_gap = 0
        for dim in dims:
            sampler = Sampler(seed + dim, exact=True)
            lower, upper = (Fraction(-1),) * dim, (Fraction(1),) * dim
            for _ in range(samples):
                xi = T2Point(*(sampler.point(lower, upper) for _ in range(4)))
                out = candidate(xi)
                base_gap = max(base_gap, residual(out.x, xi.x))
                for i in range(dim):
                    rows.append((xi.v[i], xi.xdot[i]))
                    targets.append(out.v[i])
        exact = all(isinstance(t, (int, Fraction)) for t in targets)
        if exact:
            gram = MatrixQ.from_rows([
                [sum(r[0] * r[0] for r in rows), sum(r[0] * r[1] for r in rows)],
                [sum(r[0] * r[1] for r in rows), sum(r[1] * r[1] for r in rows)],
            ])
            rhs = [sum(r[0] * t for r, t in zip(rows, targets)), sum(r[1] * t for r, t in zip(rows, targets))]
            a, b = gram.solve(rhs)
            tol = 0 if tolerance is None else tolerance
        else:
            design = np.array([[float(r[0]), float(r[1])] for r in rows])
            values = np.array([float(t) for t in targets])
            (a, b), *_ = np.linalg.lstsq(design, values, rcond=None)
            a, b = float(a), float(b)
            tol = settings.float_transcendental_tolerance if tolerance is None else tolerance
        fit_residual = max_abs(t - (a * r[0] + b * r[1]) for r, t in zip(rows, targets))
        worst = max(fit_residual, base_gap)
        if worst > tol:
            reason = "base point moved" if base_gap > tol else "tangent part is not a combination of v and xdot"
            logger.info(f"[FIT] mismatch: {reason} (residual {format_scalar(worst)})")
            return Mismatch(worst, reason)
        return FitResult(a, b, fit_residual)

    def comonad_naturality_witness(self, b=0, f: Optional[ChartMap] = None) -> Witness:
        """
        Naturality gap of delta_b(x, v) = (x, v, v, b v) under T^2 f.

        Defaults to f(x) = x + x^2 at (x, v) = (0, 1), where the gap is f''(0)(1, 1) = 2.
        """
        f = f or ChartMap.from_strings(("x",), ("x + x^2",), ("-2",), ("2",), name="x + x^2")
        b = Fraction(b) if not isinstance(b, float) else b
        n = f.n_in
        point = TangentPoint((Fraction(0),) * n, (Fraction(1),) * n)

        def delta(p: TangentPoint) -> T2Point:
            return T2Point(p.x, p.v, p.v, tuple(b * c for c in p.v))

        lhs = second_tangent_map(f, delta(point))
        rhs = delta(tangent_map(f, point))
        slots = ("x", "v", "xdot", "vdot")
        gaps = [residual(getattr(lhs, s), getattr(rhs, s)) for s in slots]
        worst = max(range(4), key=lambda i: gaps[i])
        return Witness(f"T2 f o delta_b vs delta_b o T f for f = {f.output_strings()}, b = {b}",
                       point, lhs, rhs, gaps[worst], slots[worst])


# Global service instance
monad_service = MonadService()
