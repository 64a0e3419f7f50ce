"""
Polynomials
Sparse multivariate polynomials over the rationals in the generators of the
tangent tower T^k A (X, dX, dTX, dTdX, ...) and of the tensor square (dL, dR).
"""
import re
from fractions import Fraction
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Tuple, Union

from tfmonad.errors import BackendError, DomainViolationError, ParseError
from tfmonad.services.expressions import RATIONAL, ExpressionParser
from tfmonad.services.matrices import to_rational

# (tag, mask, index): tag "" for the tower, "L"/"R" for tensor factors.
# Bit j of mask records one differential at level j + 1.
Generator = Tuple[str, int, int]
Monomial = Tuple[Tuple[Generator, int], ...]
Scalar = Union[int, Fraction]

_NAME = re.compile(r"^(?P<tower>(?:dT\d*)*d?)X(?P<index>\d+)$|^d(?P<side>[LR])(?P<tindex>\d+)$")


def generator(index: int, mask: int = 0, tag: str = "") -> Generator:
    return (tag, mask, index)


def generator_name(gen: Generator) -> str:
    tag, mask, index = gen
    if tag:
        return f"d{tag}{index + 1}"
    prefix = ""
    for level in range(mask.bit_length() - 1, -1, -1):
        if mask >> level & 1:
            prefix += "d" if level == 0 else ("dT" if level == 1 else f"dT{level}")
    return f"{prefix}X{index + 1}"


def parse_generator(name: str) -> Optional[Generator]:
    match = _NAME.match(name)
    if not match:
        return None
    if match.group("side"):
        return (match.group("side"), 1, int(match.group("tindex")) - 1)
    index = int(match.group("index")) - 1
    mask = 0
    for piece in re.findall(r"dT\d*|d", match.group("tower")):
        level = 0 if piece == "d" else (1 if piece == "dT" else int(piece[2:]))
        if mask >> level & 1:
            return None
        mask |= 1 << level
    if generator_name(("", mask, index)) != name:
        return None
    return ("", mask, index)


def _monomial_mul(a: Monomial, b: Monomial) -> Monomial:
    powers: Dict[Generator, int] = dict(a)
    for gen, exp in b:
        powers[gen] = powers.get(gen, 0) + exp
    return tuple(sorted(powers.items()))


class Polynomial:
    """
    Canonical sparse form: a dict from sorted monomials to nonzero Fractions.

    Results of arithmetic take the more general class of the two operands.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: Optional[Mapping[Monomial, Scalar]] = None):
        clean: Dict[Monomial, Fraction] = {}
        for mono, coeff in (terms or {}).items():
            coeff = to_rational(coeff)
            if coeff != 0:
                key = tuple(sorted((g, e) for g, e in mono if e))
                self._check(key)
                clean[key] = clean.get(key, Fraction(0)) + coeff
                if clean[key] == 0:
                    del clean[key]
        self.terms = clean

    @classmethod
    def allows(cls, gen: Generator) -> bool:
        return True

    def _check(self, mono: Monomial) -> None:
        for gen, _ in mono:
            if not self.allows(gen):
                raise ValueError(f"{type(self).__name__} cannot hold generator {generator_name(gen)}")

    # Construction

    @classmethod
    def constant(cls, value: Scalar) -> "Polynomial":
        return cls({(): value})

    @classmethod
    def gen(cls, gen: Generator) -> "Polynomial":
        return cls({((gen, 1),): 1})

    @classmethod
    def var(cls, index: int, mask: int = 0, tag: str = "") -> "Polynomial":
        return cls.gen(generator(index, mask, tag))

    def as_class(self, cls) -> "Polynomial":
        return cls(self.terms)

    # Inspection

    def is_zero(self) -> bool:
        return not self.terms

    def generators(self) -> List[Generator]:
        return sorted({g for mono in self.terms for g, _ in mono})

    def coefficient(self, mono: Monomial) -> Fraction:
        return self.terms.get(tuple(sorted(mono)), Fraction(0))

    def constant_term(self) -> Fraction:
        return self.terms.get((), Fraction(0))

    def max_abs(self) -> Fraction:
        return max((abs(c) for c in self.terms.values()), default=Fraction(0))

    def degree(self) -> int:
        return max((sum(e for _, e in mono) for mono in self.terms), default=0)

    # Arithmetic

    def _result_class(self, other) -> type:
        a, b = type(self), type(other) if isinstance(other, Polynomial) else type(self)
        if issubclass(a, b):
            return b
        if issubclass(b, a):
            return a
        return Polynomial

    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            return other
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return Polynomial.constant(other)
        raise TypeError(f"cannot combine a polynomial with {type(other).__name__}")

    def __add__(self, other):
        try:
            rhs = self._coerce(other)
        except TypeError:
            return NotImplemented
        terms = dict(self.terms)
        for mono, coeff in rhs.terms.items():
            terms[mono] = terms.get(mono, Fraction(0)) + coeff
        return self._result_class(other)(terms)

    __radd__ = __add__

    def __neg__(self):
        return type(self)({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        try:
            rhs = self._coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-rhs)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return type(self)({m: c * other for m, c in self.terms.items()})
        if not isinstance(other, Polynomial):
            return NotImplemented
        terms: Dict[Monomial, Fraction] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                mono = _monomial_mul(m1, m2)
                terms[mono] = terms.get(mono, Fraction(0)) + c1 * c2
        return self._result_class(other)(terms)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Polynomial):
            if other.generators():
                raise TypeError("division by a non-constant polynomial")
            other = other.constant_term()
        if not isinstance(other, (int, Fraction)) or isinstance(other, bool):
            return NotImplemented
        if other == 0:
            raise DomainViolationError("division by zero")
        return type(self)({m: c / other for m, c in self.terms.items()})

    def __pow__(self, exponent: int):
        if not isinstance(exponent, int) or exponent < 0:
            return NotImplemented
        result = type(self).constant(1)
        for _ in range(exponent):
            result = result * self
        return result

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            other = Polynomial.constant(other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    # Calculus and substitution

    def partial(self, gen: Generator) -> "Polynomial":
        terms: Dict[Monomial, Fraction] = {}
        for mono, coeff in self.terms.items():
            powers = dict(mono)
            exp = powers.get(gen, 0)
            if not exp:
                continue
            powers[gen] = exp - 1
            key = tuple(sorted((g, e) for g, e in powers.items() if e))
            terms[key] = terms.get(key, Fraction(0)) + coeff * exp
        return Polynomial(terms)

    def substitute(self, images: Callable[[Generator], "Polynomial"], cls: Optional[type] = None) -> "Polynomial":
        """The algebra morphism sending each generator to images(gen)."""
        cache: Dict[Generator, Polynomial] = {}
        result: Polynomial = (cls or Polynomial)()
        for mono, coeff in self.terms.items():
            term: Polynomial = (cls or Polynomial).constant(coeff)
            for gen, exp in mono:
                if gen not in cache:
                    cache[gen] = images(gen)
                term = term * cache[gen] ** exp
            result = result + term
        return result.as_class(cls) if cls else result

    def map_generators(self, rename: Callable[[Generator], Optional[Generator]]) -> "Polynomial":
        """Rename generators; monomials containing a generator mapped to None vanish."""
        terms: Dict[Monomial, Fraction] = {}
        for mono, coeff in self.terms.items():
            renamed = []
            for gen, exp in mono:
                target = rename(gen)
                if target is None:
                    break
                renamed.append((target, exp))
            else:
                key = _monomial_mul(tuple(renamed), ())
                terms[key] = terms.get(key, Fraction(0)) + coeff
        return Polynomial(terms)

    # Text

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        ordered = sorted(self.terms.items(), key=lambda item: (sum(e for _, e in item[0]), item[0]))
        for i, (mono, coeff) in enumerate(ordered):
            sign = "-" if coeff < 0 else "+"
            magnitude = abs(coeff)
            factors = [generator_name(g) + (f"^{e}" if e > 1 else "") for g, e in mono]
            if magnitude != 1 or not factors:
                text = str(magnitude.numerator) if magnitude.denominator == 1 else f"{magnitude.numerator}/{magnitude.denominator}"
                factors.insert(0, text)
            body = "*".join(factors)
            if i == 0:
                parts.append(f"-{body}" if sign == "-" else body)
            else:
                parts.append(f" {sign} {body}")
        return "".join(parts)

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self})"


class TangentPoly(Polynomial):
    """Polynomial in the tangent tower generators X, dX, dTX, dTdX, ..."""

    @classmethod
    def allows(cls, gen: Generator) -> bool:
        return gen[0] == ""


class RationalPoly(TangentPoly):
    """Polynomial in X1..Xn only."""

    @classmethod
    def allows(cls, gen: Generator) -> bool:
        return gen[0] == "" and gen[1] == 0


class TensorPoly(Polynomial):
    """Element of S_A(E) (x)_A S_A(E): X coefficients with left and right differentials dL, dR."""

    @classmethod
    def allows(cls, gen: Generator) -> bool:
        return (gen[0] == "" and gen[1] == 0) or gen[0] in ("L", "R")


def narrowest(poly: Polynomial) -> Polynomial:
    """The most specific class able to hold poly."""
    for cls in (RationalPoly, TangentPoly, TensorPoly):
        if all(cls.allows(g) for g in poly.generators()):
            return poly.as_class(cls)
    return poly


def parse_polynomial(text: str, cls: type = Polynomial) -> Polynomial:
    """Read the text format, e.g. "3/2*X1^2*dX1 + X2"."""
    expr = ExpressionParser(text, mixed_case=True).parse()
    env = {}
    for name in sorted(expr.variables()):
        gen = parse_generator(name)
        if gen is None or not cls.allows(gen):
            raise ParseError(f"unknown generator '{name}'", text, text.find(name))
        env[name] = cls.gen(gen)
    try:
        value = expr.evaluate(env, RATIONAL)
    except (TypeError, BackendError) as exc:
        raise ParseError(f"not a polynomial: {exc}", text, None) from exc
    if not isinstance(value, Polynomial):
        value = cls.constant(value)
    return value.as_class(cls)


def tower_generators(n: int, level: int) -> List[Generator]:
    """Generators of T^level A over n variables."""
    return [("", mask, i) for mask in range(1 << level) for i in range(n)]


def random_polynomial(gens: Iterable[Generator], sampler, degree: int = 2, terms: int = 4,
                      cls: type = Polynomial) -> Polynomial:
    """Sum of random monomials of degree <= degree with small rational coefficients."""
    gens = list(gens)
    result = cls()
    for _ in range(terms):
        mono: Dict[Generator, int] = {}
        for _ in range(sampler.integer(0, degree)):
            g = gens[sampler.integer(0, len(gens) - 1)]
            mono[g] = mono.get(g, 0) + 1
        coeff = Fraction(sampler.integer(-4, 4), sampler.integer(1, 3))
        result = result + cls({tuple(sorted(mono.items())): coeff})
    return result
