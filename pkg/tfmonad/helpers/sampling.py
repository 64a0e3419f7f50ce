"""
Sampling Helpers
Seeded point generation for the verifiers and the resampling loop that
rejects out-of-domain draws.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Generic, List, Sequence, TypeVar

import numpy as np

from tfmonad.config import settings
from tfmonad.errors import DomainViolationError, FlowError, SamplingError

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


class Sampler:
    """
    Draws points and tangent vectors from a numpy Generator.

    In rational mode every coordinate is lo + (hi - lo) * k / D for an integer
    k, so downstream arithmetic stays exact.
    """

    def __init__(self, seed: int, exact: bool, denominator: int = None):
        self.rng = np.random.default_rng(seed)
        self.exact = exact
        self.denominator = denominator or settings.rational_denominator

    def scalar(self, lo, hi):
        if self.exact:
            k = int(self.rng.integers(0, self.denominator + 1))
            return Fraction(lo) + (Fraction(hi) - Fraction(lo)) * Fraction(k, self.denominator)
        return float(lo) + (float(hi) - float(lo)) * float(self.rng.random())

    def point(self, lower: Sequence, upper: Sequence) -> tuple:
        return tuple(self.scalar(lo, hi) for lo, hi in zip(lower, upper))

    def vector(self, radii: Sequence) -> tuple:
        """
        Vector in the ellipsoid with the given semi-axes.

        Rational draws use the inscribed cube of half-side radius/n.
        """
        n = len(radii)
        if n == 0:
            return ()
        if self.exact:
            return tuple(self.scalar(-Fraction(r) / n, Fraction(r) / n) for r in radii)
        direction = self.rng.normal(size=n)
        norm = float(np.linalg.norm(direction)) or 1.0
        scale = float(self.rng.random()) ** (1.0 / n)
        return tuple(float(r) * scale * float(d) / norm for r, d in zip(radii, direction))

    def integer(self, lo: int, hi: int) -> int:
        return int(self.rng.integers(lo, hi + 1))


def ball_radii(lower: Sequence, upper: Sequence, factor: float = None, exact: bool = False) -> tuple:
    """factor times the half-width of each box side."""
    factor = settings.ball_radius_factor if factor is None else factor
    if exact:
        f = Fraction(str(factor))
        return tuple(f * (Fraction(hi) - Fraction(lo)) / 2 for lo, hi in zip(lower, upper))
    return tuple(factor * (float(hi) - float(lo)) / 2 for lo, hi in zip(lower, upper))


@dataclass
class SampledRun(Generic[R]):
    """Accepted results in draw order plus the rejection count."""
    results: List[R] = field(default_factory=list)
    inputs: List[Any] = field(default_factory=list)
    rejected: int = 0


def run_sampled(
    draw: Callable[[], T],
    check: Callable[[T], R],
    count: int,
    cap_factor: int = None,
    max_workers: int = None,
    label: str = "samples",
) -> SampledRun:
    """
    Draw inputs and evaluate check on each until count succeed.

    Draws that raise a domain or flow error are rejected and replaced. The run
    fails once count * cap_factor draws have been made. Inputs are drawn
    sequentially, so results do not depend on the worker count.
    """
    cap_factor = cap_factor or settings.resample_cap_factor
    max_workers = max_workers or settings.max_workers
    run: SampledRun = SampledRun()
    attempts = 0

    def guarded(item):
        try:
            return True, check(item)
        except (DomainViolationError, FlowError) as exc:
            return False, exc

    with ThreadPoolExecutor(max_workers=max_workers) as executor:
        while len(run.results) < count:
            needed = count - len(run.results)
            if attempts + needed > count * cap_factor:
                raise SamplingError(
                    f"{label}: {run.rejected} of {attempts} draws rejected; cap is {count * cap_factor}"
                )
            batch = [draw() for _ in range(needed)]
            attempts += needed
            for item, (ok, value) in zip(batch, executor.map(guarded, batch)):
                if ok:
                    run.results.append(value)
                    run.inputs.append(item)
                else:
                    run.rejected += 1
                    logger.debug(f"[{label}] rejected draw: {value}")
    if run.rejected:
        logger.info(f"[{label}] {run.rejected} draws rejected, {count} accepted")
    return run
