"""
Foliation Service
Leaves of the foliation induced by an algebra: sampled accessible sets,
path lifting into the tangent space at the base point, transitivity trials
and linear holonomy.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from tfmonad.config import settings
from tfmonad.errors import (
    DomainViolationError,
    FlowError,
    LoopNotClosedError,
    NotTameError,
    PathNotInLeafError,
    SamplingError,
    StepUnderflowError,
    TanMonadError,
)
from tfmonad.helpers.numeric import as_float_list, format_vector
from tfmonad.helpers.sampling import Sampler, run_sampled
from tfmonad.services.algebra_service import AlgebraMap, algebra_service
from tfmonad.services.derivatives import partial_jacobian
from tfmonad.services.matrices import numerical_rank, orthogonal_complement, pseudo_inverse, range_basis

logger = logging.getLogger(__name__)

Path = Callable[[float], Sequence[float]]


@dataclass
class LeafCloud:
    """Points h(x, v_i) of the leaf through x with the parameters that produced them."""
    base: Tuple[float, ...]
    params: List[Tuple[float, ...]]
    points: List[Tuple[float, ...]]
    dimension: int
    rank_profile: Dict[int, int] = field(default_factory=dict)
    rejected: int = 0

    @property
    def tame(self) -> bool:
        """True when every sampled point has the base point's rank."""
        return set(self.rank_profile) <= {self.dimension}


@dataclass
class LiftedPath:
    times: List[float]
    targets: List[Tuple[float, ...]]
    params: List[Tuple[float, ...]]
    residuals: List[float]
    halvings: int = 0

    @property
    def endpoint(self) -> Tuple[float, ...]:
        return self.params[-1]

    @property
    def max_residual(self) -> float:
        return max(self.residuals) if self.residuals else 0.0


@dataclass
class PartitionReport:
    trials: int
    successes: int
    max_endpoint_error: float
    tolerance: float
    failures: List[str] = field(default_factory=list)

    @property
    def fraction(self) -> float:
        return self.successes / self.trials if self.trials else 0.0

    @property
    def passed(self) -> bool:
        return self.fraction >= 0.99


@dataclass
class HolonomyResult:
    matrix: np.ndarray
    loop_parameter: Tuple[float, ...]
    closure_error: float
    transversal: np.ndarray
    eigenvalues: List[complex]
    has_eigenvalue_one: bool


@dataclass
class _Solve:
    u: np.ndarray
    residual: float
    converged: bool


class FoliationService:
    """Leaf sampling, continuation-based path lifting and holonomy."""

    def _residual(self, h: AlgebraMap, x: Sequence[float], u: np.ndarray, target: Sequence[float]) -> np.ndarray:
        return np.array(as_float_list(h.difference(h.evaluate(x, tuple(u)), target)), dtype=float)

    def _jacobian(self, h: AlgebraMap, x: Sequence[float], u: np.ndarray) -> np.ndarray:
        n = h.n
        rows = partial_jacobian(h.as_function(), tuple(x) + tuple(float(c) for c in u), range(n, 2 * n))
        return np.array([[float(a) for a in row] for row in rows], dtype=float)

    def _gauss_newton(self, h: AlgebraMap, x: Sequence[float], u0: np.ndarray, target: Sequence[float],
                      tolerance: float, rank_needed: Optional[int]) -> _Solve:
        """
        Minimise |h(x, u) - target| from u0 with pseudoinverse steps and
        backtracking. Raises NotTameError when the Jacobian rank drops below
        rank_needed.
        """
        u = np.array(u0, dtype=float)
        r = self._residual(h, x, u, target)
        norm = float(np.linalg.norm(r))
        for _ in range(settings.gauss_newton_max_iter):
            if norm <= tolerance:
                return _Solve(u, norm, True)
            jac = self._jacobian(h, x, u)
            if rank_needed is not None and numerical_rank(jac, settings.rank_threshold) < rank_needed:
                raise NotTameError(f"Jacobian rank below {rank_needed} at parameter {format_vector(u.tolist())}")
            delta = -pseudo_inverse(jac, settings.rank_threshold) @ r
            scale = 1.0
            improved = False
            while scale > 1e-4:
                trial = u + scale * delta
                try:
                    r_trial = self._residual(h, x, trial, target)
                except (DomainViolationError, FlowError):
                    r_trial = None
                if r_trial is not None and float(np.linalg.norm(r_trial)) < norm:
                    u, r, norm = trial, r_trial, float(np.linalg.norm(r_trial))
                    improved = True
                    break
                scale *= settings.backtrack_factor
            if not improved:
                break
        return _Solve(u, norm, norm <= tolerance)

    # Leaves

    def sample_leaf(self, h: AlgebraMap, x: Sequence, count: int = 200, radius: Optional[float] = None,
                    seed: Optional[int] = None) -> LeafCloud:
        """Cloud of h(x, v) for v uniform in a ball, with the rank of A at each point."""
        seed = settings.seed if seed is None else seed
        sampler = Sampler(seed + 31, exact=False)
        radii = (radius,) * h.n if radius is not None else h.radii(exact=False)
        base = tuple(float(c) for c in x)

        def draw():
            return sampler.vector(radii)

        def check(v):
            point = tuple(float(c) for c in h.evaluate(base, v))
            return point, algebra_service.rank_at(h, point)

        run = run_sampled(draw, check, count, label=f"{h.name} leaf")
        profile: Dict[int, int] = {}
        for _, rank in run.results:
            profile[rank] = profile.get(rank, 0) + 1
        cloud = LeafCloud(
            base=base,
            params=[tuple(v) for v in run.inputs],
            points=[p for p, _ in run.results],
            dimension=algebra_service.rank_at(h, base),
            rank_profile=profile,
            rejected=run.rejected,
        )
        logger.info(f"[LEAF] {h.name} at {format_vector(base)}: dimension {cloud.dimension}, ranks {profile}")
        return cloud

    def validate_leaf_path(self, h: AlgebraMap, x: Sequence, gamma: Path, samples: int = 16,
                           tolerance: Optional[float] = None) -> List[float]:
        """
        Project samples of gamma onto the leaf of x by warm-started Gauss-Newton
        and return the distances. Raises PathNotInLeafError past the tolerance.
        """
        tolerance = settings.flow_tolerance if tolerance is None else tolerance
        base = tuple(float(c) for c in x)
        u = np.zeros(h.n)
        distances = []
        for j in range(samples + 1):
            t = j / samples
            target = tuple(float(c) for c in gamma(t))
            solve = self._gauss_newton(h, base, u, target, settings.lift_tolerance, None)
            if solve.residual > tolerance:
                raise PathNotInLeafError(
                    f"path sample at t={t:.4g} is {solve.residual:.3g} from the leaf of {format_vector(base)}"
                )
            u = solve.u
            distances.append(solve.residual)
        return distances

    def lift_path(self, h: AlgebraMap, x: Sequence, gamma: Path, steps: Optional[int] = None,
                  tolerance: Optional[float] = None, path_tolerance: Optional[float] = None) -> LiftedPath:
        """
        Continuation: at each step solve h(x, u + delta) = gamma(t_next) by
        Gauss-Newton from the previous parameter. Failed steps halve dt.
        """
        steps = steps or settings.lift_steps
        tolerance = settings.lift_tolerance if tolerance is None else tolerance
        path_tolerance = settings.flow_tolerance if path_tolerance is None else path_tolerance
        base = tuple(float(c) for c in x)
        start = tuple(float(c) for c in gamma(0.0))
        start_gap = float(np.linalg.norm(as_float_list(h.difference(start, base))))
        if start_gap > path_tolerance:
            raise PathNotInLeafError(f"path starts {start_gap:.3g} away from the base point")
        rank_needed = algebra_service.rank_at(h, base)
        lifted = LiftedPath([0.0], [start], [(0.0,) * h.n], [start_gap])
        u = np.zeros(h.n)
        t, base_dt = 0.0, 1.0 / steps
        dt = base_dt
        while t < 1.0:
            t_next = min(1.0, t + dt)
            target = tuple(float(c) for c in gamma(t_next))
            solve = self._gauss_newton(h, base, u, target, tolerance, rank_needed)
            if not solve.converged:
                dt /= 2
                lifted.halvings += 1
                if dt < settings.min_lift_step:
                    if solve.residual > path_tolerance:
                        raise PathNotInLeafError(
                            f"path at t={t_next:.4g} stays {solve.residual:.3g} from the leaf"
                        )
                    raise StepUnderflowError(f"continuation step fell below {settings.min_lift_step} at t={t:.4g}")
                continue
            u, t = solve.u, t_next
            lifted.times.append(t)
            lifted.targets.append(target)
            lifted.params.append(tuple(float(c) for c in u))
            lifted.residuals.append(solve.residual)
            dt = min(base_dt, 2 * dt)
        logger.debug(f"[LIFT] {h.name}: {len(lifted.times)} steps, {lifted.halvings} halvings")
        return lifted

    def check_partition(self, h: AlgebraMap, x: Sequence, trials: int = 100, seed: Optional[int] = None,
                        tolerance: Optional[float] = None, steps: Optional[int] = None) -> PartitionReport:
        """
        Transitivity trials: z = h(h(x, v), w) must be reached as h(x, u) by lifting
        the concatenated path h(x, 2tv), h(y, (2t - 1)w).
        """
        seed = settings.seed if seed is None else seed
        tolerance = settings.flow_tolerance if tolerance is None else tolerance
        sampler = Sampler(seed + 37, exact=False)
        radii = h.radii(exact=False)
        base = tuple(float(c) for c in x)

        inputs = []
        attempts = 0
        while len(inputs) < trials:
            attempts += 1
            if attempts > trials * settings.resample_cap_factor:
                raise SamplingError(f"partition trials: too many draws left the domain ({attempts})")
            v, w = sampler.vector(radii), sampler.vector(radii)
            try:
                y = h.evaluate(base, v)
                z = h.evaluate(y, w)
            except (DomainViolationError, FlowError):
                continue
            inputs.append((v, w, tuple(float(c) for c in y), tuple(float(c) for c in z)))

        def trial(item):
            v, w, y, z = item

            def gamma(t):
                if t <= 0.5:
                    return h.evaluate(base, tuple(2 * t * c for c in v))
                return h.evaluate(y, tuple((2 * t - 1) * c for c in w))

            try:
                lifted = self.lift_path(h, base, gamma, steps=steps)
            except (TanMonadError, FlowError) as exc:
                return None, f"v={format_vector(v)} w={format_vector(w)}: {exc}"
            error = float(np.linalg.norm(as_float_list(h.difference(h.evaluate(base, lifted.endpoint), z))))
            return error, None

        with ThreadPoolExecutor(max_workers=settings.max_workers) as executor:
            outcomes = list(executor.map(trial, inputs))

        errors = [e for e, _ in outcomes if e is not None]
        report = PartitionReport(
            trials=trials,
            successes=sum(1 for e in errors if e <= tolerance),
            max_endpoint_error=max(errors) if errors else float("inf"),
            tolerance=tolerance,
            failures=[msg for _, msg in outcomes if msg is not None],
        )
        logger.info(f"[PARTITION] {h.name}: {report.successes}/{trials} witnesses found")
        return report

    # Holonomy

    def holonomy_linear_map(self, h: AlgebraMap, x: Sequence, loop: Path,
                            transversal: Optional[np.ndarray] = None, steps: Optional[int] = None,
                            tolerance: Optional[float] = None) -> HolonomyResult:
        """
        Lift the loop once to get v0 with h(x, v0) = x, then differentiate the
        slide y -> h(y, v0) and restrict it to the transversal. The transversal
        defaults to the orthogonal complement of D_x.
        """
        tolerance = settings.flow_tolerance if tolerance is None else tolerance
        base = tuple(float(c) for c in x)
        end = tuple(float(c) for c in loop(1.0))
        gap = float(np.linalg.norm(as_float_list(h.difference(end, base))))
        if gap > tolerance:
            raise LoopNotClosedError(f"loop ends {gap:.3g} away from its base point")
        lifted = self.lift_path(h, base, loop, steps=steps)
        v0 = lifted.endpoint
        closure = float(np.linalg.norm(as_float_list(h.difference(h.evaluate(base, v0), base))))
        if closure > tolerance:
            raise LoopNotClosedError(f"lifted loop returns {closure:.3g} away from its base point")

        n = h.n
        rows = partial_jacobian(h.as_function(), base + v0, range(n))
        slide = np.array([[float(a) for a in row] for row in rows], dtype=float)
        if transversal is None:
            a_x = np.array(algebra_service.endomorphism_at(h, base), dtype=float)
            transversal = orthogonal_complement(range_basis(a_x, settings.rank_threshold), n)
        matrix = transversal.T @ slide @ transversal
        eigenvalues = list(np.linalg.eigvals(matrix)) if matrix.size else []
        result = HolonomyResult(
            matrix=matrix,
            loop_parameter=v0,
            closure_error=closure,
            transversal=transversal,
            eigenvalues=eigenvalues,
            has_eigenvalue_one=self.check_eigenvalue_one(matrix, tolerance),
        )
        logger.info(f"[HOLONOMY] {h.name}: eigenvalues {[complex(e) for e in eigenvalues]}")
        return result

    def check_eigenvalue_one(self, matrix, tolerance: float = 1e-6) -> bool:
        """True when some eigenvalue lies within tolerance of 1; an empty map counts as identity."""
        matrix = np.asarray(matrix, dtype=float)
        if matrix.size == 0:
            return True
        return bool(np.any(np.abs(np.linalg.eigvals(matrix) - 1.0) <= tolerance))


# Global service instance
foliation_service = FoliationService()
