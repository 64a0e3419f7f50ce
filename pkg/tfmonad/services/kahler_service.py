"""
Kahler Service
The tangent functor comonad on polynomial algebras over the rationals:
TA = A[dX1..dXn], its counit and comultiplication, the coaddition into
TA (x)_A TA, and coalgebra checks.
"""
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Union

from tfmonad.config import settings
from tfmonad.errors import ShapeMismatchError
from tfmonad.helpers.sampling import Sampler
from tfmonad.services.expressions import RATIONAL
from tfmonad.services.matrices import to_rational
from tfmonad.services.monad_service import LawReport, LawResult
from tfmonad.services.polynomials import (
    Generator,
    Polynomial,
    RationalPoly,
    TangentPoly,
    TensorPoly,
    generator_name,
    narrowest,
    random_polynomial,
    tower_generators,
)

logger = logging.getLogger(__name__)

Rule = Callable[[Generator], Polynomial]


def derive(poly: Polynomial, level: int) -> TangentPoly:
    """
    The derivation adding bit `level` to every generator: sum over generators
    g of (dpoly/dg) * D(g). Generators already carrying the bit are rejected.
    """
    result = TangentPoly()
    for gen in poly.generators():
        tag, mask, index = gen
        if tag or mask >> level & 1:
            raise ValueError(f"{generator_name(gen)} already has a level-{level + 1} differential")
        result = result + poly.partial(gen) * TangentPoly.gen((tag, mask | 1 << level, index))
    return result.as_class(TangentPoly)


def differential(f: Polynomial, level: int = 0) -> TangentPoly:
    """df = sum_i df/dX_i dX_i (level 0); d_T and higher for level >= 1."""
    return derive(f, level)


@dataclass
class AlgebraMorphism:
    """
    Algebra morphism T^k A -> T^l A given by its value on generators.
    lift() is the tangent map T^{k+1} A -> T^{l+1} A.
    """
    n: int
    source_level: int
    target_level: int
    rule: Rule
    name: str = ""

    def image(self, gen: Generator) -> Polynomial:
        tag, mask, index = gen
        if tag or index >= self.n or mask >> self.source_level:
            raise ShapeMismatchError(f"{generator_name(gen)} is not a generator of T^{self.source_level} A")
        return self.rule(gen)

    def apply(self, poly: Polynomial) -> Polynomial:
        return narrowest(poly.substitute(self.image))

    def __call__(self, poly: Polynomial) -> Polynomial:
        return self.apply(poly)

    def lift(self) -> "AlgebraMorphism":
        k, l = self.source_level, self.target_level

        def rule(gen: Generator) -> Polynomial:
            tag, mask, index = gen
            if mask >> k & 1:
                return derive(self.rule((tag, mask & ~(1 << k), index)), l)
            return self.rule(gen)

        return AlgebraMorphism(self.n, k + 1, l + 1, rule, f"T{self.name}")

    def then(self, other: "AlgebraMorphism") -> "AlgebraMorphism":
        """other after self."""
        if other.source_level != self.target_level:
            raise ShapeMismatchError("morphism levels do not compose")
        return AlgebraMorphism(self.n, self.source_level, other.target_level,
                               lambda gen: other.apply(self.rule(gen)), f"{other.name}o{self.name}")


@dataclass
class CoalgebraReport:
    """Counit, strict comonad residual, and the vector-field condition X'(X) = bX."""
    counit: Fraction
    strict: Fraction
    b: Optional[Fraction]
    b_condition: Optional[Fraction]
    field_components: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        if self.counit != 0:
            return False
        if self.b is not None:
            return self.b_condition == 0
        return self.strict == 0


class KahlerService:
    """Exact comonad structure of T on polynomial algebras."""

    # Structure morphisms

    def base_morphism(self, images: Union[Sequence[Polynomial], Dict[int, Polynomial]], n: Optional[int] = None,
                      name: str = "phi") -> AlgebraMorphism:
        """A -> A from the images of X1..Xn."""
        images = dict(enumerate(images)) if not isinstance(images, dict) else dict(images)
        n = n if n is not None else len(images)
        if set(images) != set(range(n)):
            raise ShapeMismatchError(f"expected images of {n} generators, got {len(images)}")
        for i, poly in images.items():
            for tag, mask, index in poly.generators():
                if tag or mask or index >= n:
                    raise ShapeMismatchError(f"image of X{i + 1} uses a generator outside A")
        return AlgebraMorphism(n, 0, 0, lambda gen: images[gen[2]], name)

    def tangent_morphism(self, images: Union[Sequence[Polynomial], Dict[int, Polynomial]],
                         n: Optional[int] = None) -> AlgebraMorphism:
        """T phi: X_i -> phi(X_i), dX_i -> d(phi(X_i))."""
        return self.base_morphism(images, n).lift()

    def compose(self, psi: AlgebraMorphism, phi: AlgebraMorphism) -> AlgebraMorphism:
        """psi o phi on A: X_i -> psi(phi(X_i))."""
        return phi.then(psi)

    def identity(self, n: int, level: int = 0) -> AlgebraMorphism:
        return AlgebraMorphism(n, level, level, TangentPoly.gen, "id")

    def zeta_morphism(self, n: int, level: int = 1) -> AlgebraMorphism:
        """T^level A -> T^{level-1} A, killing the level-th differentials."""
        bit = 1 << (level - 1)
        return AlgebraMorphism(n, level, level - 1,
                               lambda gen: TangentPoly() if gen[1] & bit else TangentPoly.gen(gen), "zeta")

    def tau_morphism(self, n: int, level: int = 0) -> AlgebraMorphism:
        """Inclusion T^level A -> T^{level+1} A."""
        return AlgebraMorphism(n, level, level + 1, TangentPoly.gen, "tau")

    def mu_morphism(self, n: int, level: int = 1) -> AlgebraMorphism:
        """
        T^level A -> T^{level+1} A: a generator with the level-th differential g
        goes to g + (g with that differential moved one level up); others are fixed.
        """
        low, high = 1 << (level - 1), 1 << level

        def rule(gen: Generator) -> Polynomial:
            tag, mask, index = gen
            if mask & low:
                return TangentPoly.gen(gen) + TangentPoly.gen((tag, mask - low + high, index))
            return TangentPoly.gen(gen)

        return AlgebraMorphism(n, level, level + 1, rule, "mu")

    # Operations on elements

    def zeta(self, f: Polynomial, level: int = 1) -> Polynomial:
        """Projection to the degree-0 part in the level-th differentials."""
        bit = 1 << (level - 1)
        return narrowest(f.map_generators(lambda gen: None if gen[1] & bit else gen))

    def tau(self, f: Polynomial) -> TangentPoly:
        return f.as_class(TangentPoly)

    def mu_A(self, f: Polynomial, level: int = 1) -> Polynomial:
        n = _variable_count(f)
        return self.mu_morphism(n, level).apply(f)

    def coaddition(self, f: Polynomial) -> TensorPoly:
        """The A-algebra morphism dX_i -> dL_i + dR_i."""

        def rule(gen: Generator) -> Polynomial:
            tag, mask, index = gen
            if tag or mask > 1:
                raise ShapeMismatchError(f"{generator_name(gen)} is not a generator of TA")
            if mask == 0:
                return TensorPoly.gen(gen)
            return TensorPoly.gen(("L", 1, index)) + TensorPoly.gen(("R", 1, index))

        return f.substitute(rule, TensorPoly)

    def mu_via_coaddition(self, f: Polynomial) -> Polynomial:
        """tau_TA (+) T tau_A: coaddition, then dL -> tau_TA(dX), dR -> T tau_A(dX)."""
        n = _variable_count(f)
        left = self.tau_morphism(n, 1)
        right = self.tau_morphism(n, 0).lift()

        def rule(gen: Generator) -> Polynomial:
            tag, mask, index = gen
            if tag == "L":
                return left.image(("", 1, index))
            if tag == "R":
                return right.image(("", 1, index))
            return TangentPoly.gen(gen)

        return narrowest(self.coaddition(f).substitute(rule))

    # Verification

    def verify_comonad(self, n_vars: int, samples: int = 20, seed: Optional[int] = None) -> LawReport:
        """
        Counit and coassociativity on the generators of TA, which suffices for
        algebra morphisms, then again on random elements of TA. Also checks that
        coaddition is multiplicative and reproduces mu_A.
        """
        seed = settings.seed if seed is None else seed
        n = n_vars
        mu = self.mu_morphism(n, 1)
        mu_T = self.mu_morphism(n, 2)
        T_mu = self.mu_morphism(n, 1).lift()
        zeta_T = self.zeta_morphism(n, 2)
        T_zeta = self.zeta_morphism(n, 1).lift()

        generators = [TangentPoly.gen(g) for g in tower_generators(n, 1)]
        sampler = Sampler(seed, exact=True)
        elements = [random_polynomial(tower_generators(n, 1), sampler, degree=3, cls=TangentPoly)
                    for _ in range(samples)]
        pairs = [(random_polynomial(tower_generators(n, 1), sampler, degree=3, cls=TangentPoly),
                  random_polynomial(tower_generators(n, 1), sampler, degree=3, cls=TangentPoly))
                 for _ in range(samples)]

        laws = {
            "counit: zeta_TA o mu_A = id": lambda f: zeta_T(mu(f)) - f,
            "counit: T zeta_A o mu_A = id": lambda f: T_zeta(mu(f)) - f,
            "coassociativity: mu_TA o mu_A = T mu_A o mu_A": lambda f: mu_T(mu(f)) - T_mu(mu(f)),
            "mu_A = tau_TA (+) T tau_A": lambda f: mu(f) - self.mu_via_coaddition(f),
        }
        report = LawReport(title=f"tangent comonad on Q[X1..X{n}]")
        for tier, panel in (("generators", generators), ("random elements", elements)):
            for name, law in laws.items():
                report.laws.append(_polynomial_law(f"{name} ({tier})", panel, law))
        report.laws.append(_polynomial_law(
            "coaddition multiplicative", pairs,
            lambda pair: self.coaddition(pair[0] * pair[1]) - self.coaddition(pair[0]) * self.coaddition(pair[1]),
        ))
        logger.info(f"[KAHLER] n={n}: {sum(l.passed for l in report.laws)}/{len(report.laws)} laws consistent")
        return report

    def coalgebra_check(self, h: Sequence[Polynomial], b=None) -> CoalgebraReport:
        """
        h assigns each X_i an element of TA. Reports the counit residual
        zeta_A(h(X_i)) - X_i, the strict residual Th(h(X_i)) - mu_A(h(X_i)) and,
        when b is given, the residual of X'(X) = bX for the vector field with
        components c_i = coefficient of dX_i in h(X_i).
        """
        n = len(h)
        images = [p.as_class(TangentPoly) for p in h]
        morphism = AlgebraMorphism(n, 0, 1, lambda gen: images[gen[2]], "h")
        lifted = morphism.lift()
        mu = self.mu_morphism(n, 1)
        counit = Fraction(0)
        strict = Fraction(0)
        for i in range(n):
            x_i = TangentPoly.var(i)
            counit = max(counit, (self.zeta(images[i]) - x_i).max_abs())
            strict = max(strict, (lifted(images[i]) - mu(images[i])).max_abs())

        components = [_dx_coefficient(images[i], i) for i in range(n)]
        b_value = None if b is None else to_rational(b)
        b_condition = None
        if b_value is not None:
            b_condition = Fraction(0)
            for i in range(n):
                flow = sum((components[i].partial(("", 0, j)) * components[j] for j in range(n)), RationalPoly())
                b_condition = max(b_condition, (flow - b_value * components[i]).max_abs())
        report = CoalgebraReport(counit, strict, b_value, b_condition, [str(c) for c in components])
        if counit != 0:
            logger.warning(f"[KAHLER] h does not satisfy zeta o h = id (residual {counit})")
        return report


def _variable_count(f: Polynomial) -> int:
    return max((index + 1 for _, _, index in f.generators()), default=1)


def _dx_coefficient(poly: Polynomial, i: int) -> RationalPoly:
    target = ("", 1, i)
    terms = {}
    for mono, coeff in poly.terms.items():
        powers = dict(mono)
        if powers.get(target) != 1:
            continue
        rest = tuple((g, e) for g, e in mono if g != target)
        if all(g[1] == 0 for g, _ in rest):
            terms[rest] = coeff
    return RationalPoly(terms)


def _polynomial_law(name: str, panel: Sequence, law: Callable) -> LawResult:
    worst = Fraction(0)
    witness = None
    for item in panel:
        gap = law(item)
        size = gap.max_abs()
        if size > worst:
            worst = size
            witness = [str(item) if not isinstance(item, tuple) else " ; ".join(map(str, item)), str(gap)]
    return LawResult(name, RATIONAL, len(panel), worst, 0.0, witness)


# Global service instance
kahler_service = KahlerService()
