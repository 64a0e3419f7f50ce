"""
Affine Hopf Service
The monads mu^a and comonads delta^b on the tangent functor of affine
manifolds, their bimonad and antipode identities, and Hopf modules on K^2.
Everything here is exact rational arithmetic.
"""
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from tfmonad.config import settings
from tfmonad.errors import NoAntipodeError
from tfmonad.helpers.numeric import format_vector, max_abs, residual
from tfmonad.helpers.sampling import Sampler
from tfmonad.services.expressions import RATIONAL, parse_expression
from tfmonad.services.matrices import MatrixQ, Rational, format_rational, rational_vector, to_rational
from tfmonad.services.monad_service import (
    LawReport,
    LawResult,
    T2Point,
    T3Point,
    TangentPoint,
    flatten,
    tau,
    zero_section,
)

logger = logging.getLogger(__name__)

Entwining = Callable[[T3Point, Fraction, Fraction], T3Point]


def _scale(c, v) -> tuple:
    return tuple(c * x for x in v)


def _add(*vectors) -> tuple:
    return tuple(sum(parts) for parts in zip(*vectors))


# Structure maps


def mu_a(xi: T2Point, a) -> TangentPoint:
    """mu^a(x, v, xdot, vdot) = (x, v + xdot + a vdot)."""
    return TangentPoint(xi.x, _add(xi.v, xi.xdot, _scale(a, xi.vdot)))


def delta_b(p: TangentPoint, b) -> T2Point:
    """delta^b(x, v) = (x, v, v, b v)."""
    return T2Point(p.x, p.v, p.v, _scale(b, p.v))


def lambda_map(xi: T2Point, a, b) -> T2Point:
    """Entwining lambda(x, v, xdot, vdot) = (x, xdot, v + xdot + a vdot, b xdot - vdot)."""
    return T2Point(xi.x, xi.xdot, _add(xi.v, xi.xdot, _scale(a, xi.vdot)),
                   _add(_scale(b, xi.xdot), _scale(-1, xi.vdot)))


def _split(xi: T3Point) -> Tuple[T2Point, T2Point]:
    """A point of T^3 M read as T^2(TM): X = (x, v), V = (xdot, vdot), Xdot = (x1, v1), Vdot = (xdot1, vdot1)."""
    return (T2Point(xi.x, xi.v, xi.xdot, xi.vdot), T2Point(xi.x1, xi.v1, xi.xdot1, xi.vdot1))


def _on_TM(fn: Callable[[T2Point], T2Point], xi: T3Point) -> T3Point:
    """Apply a map of T^2 N to the point of T^2(TM) underlying xi, with N = TM taken coordinatewise."""
    n = len(xi.x)
    pairs = T2Point(xi.x + xi.v, xi.xdot + xi.vdot, xi.x1 + xi.v1, xi.xdot1 + xi.vdot1)
    out = fn(pairs)
    return T3Point(out.x[:n], out.x[n:], out.v[:n], out.v[n:],
                   out.xdot[:n], out.xdot[n:], out.vdot[:n], out.vdot[n:])


def mu_a_T(xi: T3Point, a) -> T2Point:
    """mu^a of TM: (x, v, xdot + x1 + a xdot1, vdot + v1 + a vdot1)."""
    return T2Point(xi.x, xi.v, _add(xi.xdot, xi.x1, _scale(a, xi.xdot1)),
                   _add(xi.vdot, xi.v1, _scale(a, xi.vdot1)))


def T_mu_a(xi: T3Point, a) -> T2Point:
    """Tangent map of mu^a: (x, v + xdot + a vdot, x1, v1 + xdot1 + a vdot1)."""
    base, tangent = _split(xi)
    image = mu_a(base, a)
    return T2Point(image.x, image.v, tangent.x, _add(tangent.v, tangent.xdot, _scale(a, tangent.vdot)))


def delta_b_T(xi: T2Point, b) -> T3Point:
    """delta^b of TM on (X, V) = ((x, v), (xdot, vdot))."""
    return T3Point(xi.x, xi.v, xi.xdot, xi.vdot, xi.xdot, xi.vdot, _scale(b, xi.xdot), _scale(b, xi.vdot))


def T_delta_b(xi: T2Point, b) -> T3Point:
    """Tangent map of delta^b: point delta^b(x, v), tangent (xdot, vdot, vdot, b vdot)."""
    return T3Point(xi.x, xi.v, xi.v, _scale(b, xi.v), xi.xdot, xi.vdot, xi.vdot, _scale(b, xi.vdot))


def lambda_T(xi: T3Point, a, b, entwining: Optional[Callable] = None) -> T3Point:
    entwining = entwining or lambda_map
    return _on_TM(lambda p: entwining(p, a, b), xi)


def sigma_T(xi: T2Point, t) -> T2Point:
    """Antipode of TM, fiberwise scaling of the outer tangent: (x, v, t xdot, t vdot)."""
    return T2Point(xi.x, xi.v, _scale(t, xi.xdot), _scale(t, xi.vdot))


def T_sigma(xi: T2Point, t) -> T2Point:
    """Tangent map of the antipode: (x, t v, xdot, t vdot)."""
    return T2Point(xi.x, _scale(t, xi.v), xi.xdot, _scale(t, xi.vdot))


# Hopf modules on K^2


@dataclass
class HopfModule2D:
    """(A, B) with the admissible X0 as a basis of a subspace of K^2."""
    a: Fraction
    b: Fraction
    A: MatrixQ
    B: MatrixQ
    x0_basis: List[Tuple[Fraction, ...]]

    def x0_samples(self) -> List[Tuple[Fraction, ...]]:
        """Zero, each basis vector and their sum."""
        vectors = [(Fraction(0), Fraction(0))] + list(self.x0_basis)
        if len(self.x0_basis) > 1:
            vectors.append(tuple(sum(c) for c in zip(*self.x0_basis)))
        return vectors


@dataclass
class HopfFamily:
    """
    One case of the K^2 classification. Matrix and vector entries are
    expressions in a, b and the family parameter t; parameter_slot is the
    entry of B that carries t.
    """
    name: str
    a: Fraction
    b: Fraction
    A: Tuple[Tuple[str, str], Tuple[str, str]]
    B: Tuple[Tuple[str, str], Tuple[str, str]]
    x0_basis: List[Tuple[str, str]]
    condition: str
    parameter_slot: Optional[Tuple[int, int]] = None
    nonzero_parameter: bool = False

    def _value(self, text: str, t) -> Fraction:
        env = {"a": self.a, "b": self.b, "t": Fraction(0) if t is None else to_rational(t)}
        return parse_expression(text, ("a", "b", "t")).evaluate(env, RATIONAL)

    def instantiate(self, t: Optional[Rational] = None) -> HopfModule2D:
        if self.parameter_slot is not None and t is None:
            raise ValueError(f"family {self.name} needs a parameter value")
        A = MatrixQ.from_rows([[self._value(e, t) for e in row] for row in self.A])
        B = MatrixQ.from_rows([[self._value(e, t) for e in row] for row in self.B])
        basis = [tuple(self._value(e, t) for e in vec) for vec in self.x0_basis]
        return HopfModule2D(self.a, self.b, A, B, basis)

    def contains(self, A: MatrixQ, B: MatrixQ, x0: Sequence[Fraction]) -> bool:
        """Membership of an already normalized triple."""
        t = None
        if self.parameter_slot is not None:
            i, j = self.parameter_slot
            t = B.rows[i][j]
            if self.nonzero_parameter and t == 0:
                return False
        module = self.instantiate(t)
        if module.A != A or module.B != B:
            return False
        return _in_span(x0, module.x0_basis)

    def to_dict(self) -> Dict:
        return {
            "name": self.name,
            "a": format_rational(self.a),
            "b": format_rational(self.b),
            "condition": self.condition,
            "parameter": "t" if self.parameter_slot is not None else None,
            "parameter_nonzero": self.nonzero_parameter,
            "A": [list(row) for row in self.A],
            "B": [list(row) for row in self.B],
            "X0_span": [list(vec) for vec in self.x0_basis],
        }


def _in_span(vector: Sequence[Fraction], basis: Sequence[Sequence[Fraction]]) -> bool:
    if all(c == 0 for c in vector):
        return True
    if not basis:
        return False
    return MatrixQ.from_columns(list(basis) + [tuple(vector)]).rank() == MatrixQ.from_columns(list(basis)).rank()


@dataclass
class HopfCheckReport:
    """Exact residuals of the four Hopf module identities."""
    algebra: Fraction
    coalgebra: Fraction
    eigenvector: Fraction
    compatibility: Fraction

    @property
    def passed(self) -> bool:
        return self.algebra == 0 and self.coalgebra == 0 and self.eigenvector == 0 and self.compatibility == 0


@dataclass
class LatticeScanReport:
    a: Fraction
    b: Fraction
    values: List[Fraction]
    solutions: int
    outside: List[Dict] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.outside


def scan_values(count: int = 25, nonzero: bool = False) -> List[Fraction]:
    """count rationals centred on 0 in steps of 1/2."""
    values = []
    k = 0
    while len(values) < count:
        for candidate in ((Fraction(k, 2),) if k == 0 else (Fraction(k, 2), Fraction(-k, 2))):
            if len(values) < count and not (nonzero and candidate == 0):
                values.append(candidate)
        k += 1
    return values


def lattice_values() -> List[Fraction]:
    """Entries of the brute-force lattice: {-2..2} / {1, 2}."""
    return sorted({Fraction(p, q) for p in range(-2, 3) for q in (1, 2)})


class AffineHopfService:
    """Bimonad, antipode and Hopf module checks for mu^a and delta^b."""

    def verify_affine_laws(self, a: Rational, b: Rational, dim: int = 2, samples: Optional[int] = None,
                           seed: Optional[int] = None, entwining: Optional[Callable] = None) -> LawReport:
        """
        Exact residuals of the mu^a monad laws, the delta^b comonad laws and the
        compatibility square delta^b o mu^a = T mu^a o lambda_T o T delta^b.
        """
        a, b = to_rational(a), to_rational(b)
        samples = samples or settings.samples
        seed = settings.seed if seed is None else seed
        sampler = Sampler(seed, exact=True)
        lower, upper = (Fraction(-1),) * dim, (Fraction(1),) * dim

        def points(k):
            return [sampler.point(lower, upper) for _ in range(k)]

        tangents = [TangentPoint(*points(2)) for _ in range(samples)]
        seconds = [T2Point(*points(4)) for _ in range(samples)]
        thirds = [T3Point(*points(8)) for _ in range(samples)]

        checks = [
            ("mu^a unit: zeta_T", tangents,
             lambda p: residual(flatten(mu_a(T2Point(p.x, p.v, (0,) * dim, (0,) * dim), a)), flatten(p))),
            ("mu^a unit: T zeta", tangents,
             lambda p: residual(flatten(mu_a(T2Point(p.x, (0,) * dim, p.v, (0,) * dim), a)), flatten(p))),
            ("mu^a associativity", thirds,
             lambda xi: residual(flatten(mu_a(mu_a_T(xi, a), a)), flatten(mu_a(T_mu_a(xi, a), a)))),
            ("delta^b counit: tau_T", tangents,
             lambda p: residual(flatten(TangentPoint(p.x, delta_b(p, b).v)), flatten(p))),
            ("delta^b counit: T tau", tangents,
             lambda p: residual(flatten(TangentPoint(p.x, delta_b(p, b).xdot)), flatten(p))),
            ("delta^b coassociativity", tangents,
             lambda p: residual(flatten(delta_b_T(delta_b(p, b), b)), flatten(T_delta_b(delta_b(p, b), b)))),
            ("bimonad compatibility", seconds,
             lambda xi: residual(
                 flatten(delta_b(mu_a(xi, a), b)),
                 flatten(T_mu_a(lambda_T(T_delta_b(xi, b), a, b, entwining), a)),
             )),
        ]
        report = LawReport(title=f"affine bimonad a={format_rational(a)} b={format_rational(b)}")
        for name, panel, check in checks:
            residuals = [check(p) for p in panel]
            worst = max(range(len(panel)), key=lambda i: residuals[i])
            witness = format_vector(flatten(panel[worst])) if residuals[worst] != 0 else None
            report.laws.append(LawResult(name, RATIONAL, len(panel), max_abs(residuals), 0.0, witness))
        logger.info(f"[HOPF] {report.title}: {'consistent' if report.passed else 'violated'}")
        return report

    def antipode(self, a: Rational, b: Rational) -> Fraction:
        """t = -1/(1 + ab); the antipode is fiberwise scaling by t."""
        a, b = to_rational(a), to_rational(b)
        if 1 + a * b == 0:
            raise NoAntipodeError(f"1 + ab = 0 for a={format_rational(a)}, b={format_rational(b)}")
        return -1 / (1 + a * b)

    def verify_antipode(self, a: Rational, b: Rational, dim: int = 2, samples: Optional[int] = None,
                        seed: Optional[int] = None) -> LawReport:
        """mu^a o sigma_T o delta^b = mu^a o T sigma o delta^b = zeta o tau, exactly."""
        a, b = to_rational(a), to_rational(b)
        t = self.antipode(a, b)
        samples = samples or settings.samples
        seed = settings.seed if seed is None else seed
        sampler = Sampler(seed + 1, exact=True)
        lower, upper = (Fraction(-1),) * dim, (Fraction(1),) * dim
        panel = [TangentPoint(sampler.point(lower, upper), sampler.point(lower, upper)) for _ in range(samples)]
        report = LawReport(title=f"antipode t={format_rational(t)}")
        for name, scaling in (("mu^a o sigma_T o delta^b", sigma_T), ("mu^a o T sigma o delta^b", T_sigma)):
            residuals = [
                residual(flatten(mu_a(scaling(delta_b(p, b), t), a)), flatten(zero_section(tau(p))))
                for p in panel
            ]
            report.laws.append(LawResult(f"{name} = zeta o tau", RATIONAL, samples, max_abs(residuals), 0.0))
        return report

    # Hopf modules

    def hopf_module_residuals(self, a: Rational, b: Rational, A: MatrixQ, B: MatrixQ,
                              x0: Sequence[Rational]) -> HopfCheckReport:
        a, b = to_rational(a), to_rational(b)
        x0 = rational_vector(x0)
        identity = MatrixQ.identity(2)
        return HopfCheckReport(
            algebra=(A @ A - a * A).max_abs(),
            coalgebra=(B @ B - b * B).max_abs(),
            eigenvector=max_abs(p - b * q for p, q in zip(B.apply(x0), x0)),
            compatibility=((A - a * identity) @ B + (B - b * identity) @ A - identity).max_abs(),
        )

    def hopf_module_check(self, a: Rational, b: Rational, A: MatrixQ, B: MatrixQ, x0: Sequence[Rational]) -> bool:
        """A^2 = aA, B^2 = bB, B X0 = b X0 and (A - a)B + (B - b)A = I, exactly."""
        return self.hopf_module_residuals(a, b, A, B, x0).passed

    def affine_coalgebra_check(self, x0: Sequence[Rational], B: MatrixQ, b: Rational) -> bool:
        """B X0 = b X0 and B^2 = bB."""
        b = to_rational(b)
        x0 = rational_vector(x0)
        if any(p != b * q for p, q in zip(B.apply(x0), x0)):
            return False
        return (B @ B - b * B).is_zero()

    def classify_hopf_modules_2d(self, a: Rational, b: Rational) -> List[HopfFamily]:
        """
        Hopf modules on K^2 up to the basis change that normalizes A.

        For a = 0, A is nilpotent of rank 1 and normalized to [[0, 1], [0, 0]].
        For a != 0, A is 0, aI or conjugate to diag(a, 0). In the last case with
        ab + 1 = 0 there are two families, with B[1][0] or B[0][1] free.
        """
        a, b = to_rational(a), to_rational(b)
        s = a * b + 1
        if a == 0:
            return [HopfFamily(
                "nilpotent", a, b,
                A=(("0", "1"), ("0", "0")),
                B=(("t", "t*(b - t)"), ("1", "b - t")),
                x0_basis=[("t", "1")],
                condition="a = 0",
                parameter_slot=(0, 0),
            )]
        families = []
        if s == 0:
            families.append(HopfFamily(
                "zero", a, b, A=(("0", "0"), ("0", "0")), B=(("b", "0"), ("0", "b")),
                x0_basis=[("1", "0"), ("0", "1")], condition="ab + 1 = 0",
            ))
            families.append(HopfFamily(
                "scalar", a, b, A=(("a", "0"), ("0", "a")), B=(("0", "0"), ("0", "0")),
                x0_basis=[], condition="ab + 1 = 0",
            ))
            families.append(HopfFamily(
                "projection, lower", a, b, A=(("a", "0"), ("0", "0")), B=(("0", "0"), ("t", "b")),
                x0_basis=[("0", "1")], condition="ab + 1 = 0", parameter_slot=(1, 0),
            ))
            families.append(HopfFamily(
                "projection, upper", a, b, A=(("a", "0"), ("0", "0")), B=(("0", "t"), ("0", "b")),
                x0_basis=[("t", "b")], condition="ab + 1 = 0", parameter_slot=(0, 1),
            ))
        else:
            # t = -1/a is the representative [[1/a + b, 1/a + b], [-1/a, -1/a]]
            families.append(HopfFamily(
                "projection", a, b, A=(("a", "0"), ("0", "0")),
                B=(("b + 1/a", "-(a*b + 1)/(a^2*t)"), ("t", "-1/a")),
                x0_basis=[("(a*b + 1)/(a*t)", "1")],
                condition="ab + 1 != 0", parameter_slot=(1, 0), nonzero_parameter=True,
            ))
        return families

    def normalize(self, a: Fraction, A: MatrixQ) -> Optional[MatrixQ]:
        """
        Basis P (as columns) bringing A to its normal form: [Aw, w] for nilpotent
        A, [u, k] with u a column of A and k in ker A for rank-1 A = aP.
        The identity for A = 0 and A = aI; None when A fits no case.
        """
        if A.is_zero() or A == a * MatrixQ.identity(2):
            return MatrixQ.identity(2)
        if A.rank() != 1:
            return None
        if a == 0:
            w = next(e for e in ((Fraction(1), Fraction(0)), (Fraction(0), Fraction(1))) if any(A.apply(e)))
            return MatrixQ.from_columns([A.apply(w), w])
        u = next(col for col in A.columns() if any(col))
        k = A.nullspace()[0]
        return MatrixQ.from_columns([u, k])

    def identify_family(self, a: Rational, b: Rational, A: MatrixQ, B: MatrixQ,
                        x0: Sequence[Rational]) -> Optional[HopfFamily]:
        """The classified family containing (A, B, X0) once A is normalized, if any."""
        a, b = to_rational(a), to_rational(b)
        basis = self.normalize(a, A)
        if basis is None:
            return None
        inverse = basis.inverse()
        A_n, B_n = inverse @ A @ basis, inverse @ B @ basis
        x0_n = inverse.apply(rational_vector(x0))
        return next((f for f in self.classify_hopf_modules_2d(a, b) if f.contains(A_n, B_n, x0_n)), None)

    def lattice_scan(self, a: Rational, b: Rational, values: Optional[Sequence[Rational]] = None) -> LatticeScanReport:
        """
        Brute-force every (A, B, X0) with entries in the lattice, keep those
        passing hopf_module_check, normalize A and confirm each lies in a
        classified family.
        """
        a, b = to_rational(a), to_rational(b)
        values = [to_rational(v) for v in (values or lattice_values())]
        matrices = [MatrixQ.from_rows([[p, q], [r, s]]) for p, q, r, s in product(values, repeat=4)]
        algebras = [A for A in matrices if (A @ A - a * A).is_zero()]
        coalgebras = [B for B in matrices if (B @ B - b * B).is_zero()]
        vectors = [(p, q) for p, q in product(values, repeat=2)]
        identity = MatrixQ.identity(2)
        families = self.classify_hopf_modules_2d(a, b)
        report = LatticeScanReport(a, b, values, 0)
        for A in algebras:
            basis = self.normalize(a, A)
            inverse = basis.inverse() if basis is not None else None
            for B in coalgebras:
                if not ((A - a * identity) @ B + (B - b * identity) @ A - identity).is_zero():
                    continue
                for x0 in vectors:
                    if any(p != b * q for p, q in zip(B.apply(x0), x0)):
                        continue
                    report.solutions += 1
                    if inverse is None:
                        report.outside.append({"A": A.to_strings(), "B": B.to_strings(), "X0": format_vector(x0)})
                        continue
                    A_n, B_n = inverse @ A @ basis, inverse @ B @ basis
                    x0_n = inverse.apply(x0)
                    if not any(f.contains(A_n, B_n, x0_n) for f in families):
                        report.outside.append({"A": A.to_strings(), "B": B.to_strings(), "X0": format_vector(x0)})
        logger.info(
            f"[HOPF] lattice scan a={format_rational(a)} b={format_rational(b)}: "
            f"{report.solutions} solutions, {len(report.outside)} outside the families"
        )
        return report


# Global service instance
affine_hopf_service = AffineHopfService()
