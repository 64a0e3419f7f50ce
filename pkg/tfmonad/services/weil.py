"""
Weil Algebra Service
Finite-dimensional algebras R1 + N (N nilpotent) given by structure constants,
their elements, and the Taylor lifts of the primitive functions. Evaluating an
expression over these elements yields exact jets of the expression.
"""
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

from tfmonad.errors import (
    AlgebraMismatchError,
    BackendError,
    DomainViolationError,
    InvalidWeilAlgebraError,
)
from tfmonad.services.matrices import MatrixQ

Scalar = Union[int, Fraction, float]
Entry = Tuple[int, int, int, Fraction]

PRIMITIVES = ("sin", "cos", "exp", "log", "sqrt", "atan2")


@dataclass(frozen=True)
class WeilAlgebra:
    """
    Commutative algebra with basis e_0..e_{d-1}, e_i e_j = sum_k c[i][j][k] e_k.

    Structure constants are stored sparsely as (i, j, k, c) with both orders
    (i, j) and (j, i) listed. The nilpotency degree is the smallest r with
    N^r = 0 and is validated on construction.
    """

    dimension: int
    unit: int
    constants: Tuple[Entry, ...]
    nilpotency: int
    name: str = ""
    labels: Tuple[str, ...] = ()

    def __post_init__(self):
        entries = tuple((int(i), int(j), int(k), Fraction(c)) for i, j, k, c in self.constants if c != 0)
        object.__setattr__(self, "constants", entries)
        if not self.labels:
            object.__setattr__(self, "labels", tuple(f"e{i}" for i in range(self.dimension)))
        table: Dict[Tuple[int, int], List[Tuple[int, Union[int, Fraction]]]] = {}
        for i, j, k, c in entries:
            if not all(0 <= idx < self.dimension for idx in (i, j, k)):
                raise InvalidWeilAlgebraError(f"{self.name}: index out of range in ({i},{j},{k})")
            coeff = c.numerator if c.denominator == 1 else c
            table.setdefault((i, j), []).append((k, coeff))
        object.__setattr__(self, "_table", table)
        self._validate()

    def __hash__(self):
        return hash((self.dimension, self.unit, self.constants))

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, WeilAlgebra):
            return NotImplemented
        return (self.dimension, self.unit, self.constants) == (other.dimension, other.unit, other.constants)

    # Basis-level products

    def _basis_product(self, i: int, j: int) -> Tuple[Fraction, ...]:
        out = [Fraction(0)] * self.dimension
        for k, c in self._table.get((i, j), ()):
            out[k] += c
        return tuple(out)

    def _vector_product(self, a: Sequence[Fraction], b: Sequence[Fraction]) -> Tuple[Fraction, ...]:
        out = [Fraction(0)] * self.dimension
        for (i, j), targets in self._table.items():
            if a[i] == 0 or b[j] == 0:
                continue
            for k, c in targets:
                out[k] += a[i] * b[j] * c
        return tuple(out)

    def _validate(self) -> None:
        d = self.dimension
        if not 0 <= self.unit < d:
            raise InvalidWeilAlgebraError(f"{self.name}: unit index {self.unit} out of range")
        basis = [tuple(Fraction(int(i == j)) for j in range(d)) for i in range(d)]
        for i in range(d):
            if self._basis_product(self.unit, i) != basis[i]:
                raise InvalidWeilAlgebraError(f"{self.name}: unit does not fix e{i}")
            for j in range(i + 1, d):
                if self._basis_product(i, j) != self._basis_product(j, i):
                    raise InvalidWeilAlgebraError(f"{self.name}: e{i} e{j} != e{j} e{i}")
        for i, j, k in product(range(d), repeat=3):
            left = self._vector_product(self._basis_product(i, j), basis[k])
            right = self._vector_product(basis[i], self._basis_product(j, k))
            if left != right:
                raise InvalidWeilAlgebraError(f"{self.name}: (e{i} e{j}) e{k} != e{i} (e{j} e{k})")
        degree = self._nilpotency_from_span(basis)
        if degree != self.nilpotency:
            raise InvalidWeilAlgebraError(
                f"{self.name}: stored nilpotency {self.nilpotency} but N^{degree} is the first zero power"
            )

    def _nilpotency_from_span(self, basis: List[Tuple[Fraction, ...]]) -> int:
        ideal = [basis[i] for i in range(self.dimension) if i != self.unit]
        power = [row for row in MatrixQ.from_rows(ideal).row_basis()] if ideal else []
        degree = 1
        while power:
            if degree > self.dimension:
                raise InvalidWeilAlgebraError(f"{self.name}: the non-unit span is not nilpotent")
            products = [self._vector_product(p, n) for p in power for n in ideal]
            power = MatrixQ.from_rows(products).row_basis() if products else []
            degree += 1
        return degree

    # Elements

    def element(self, coeffs: Sequence[Scalar]) -> "WeilElement":
        return WeilElement(self, tuple(coeffs))

    def constant(self, value: Scalar) -> "WeilElement":
        coeffs = [0] * self.dimension
        coeffs[self.unit] = value
        return WeilElement(self, tuple(coeffs))

    def basis_element(self, index: int, scale: Scalar = 1) -> "WeilElement":
        coeffs = [0] * self.dimension
        coeffs[index] = scale
        return WeilElement(self, tuple(coeffs))

    def lift(self, value: Scalar, parts: Optional[Dict[int, Scalar]] = None) -> "WeilElement":
        """Element value*1 + sum parts[k] e_k."""
        coeffs = [0] * self.dimension
        coeffs[self.unit] = value
        for k, c in (parts or {}).items():
            coeffs[k] = c
        return WeilElement(self, tuple(coeffs))

    def multiply(self, a: Sequence[Scalar], b: Sequence[Scalar]) -> Tuple[Scalar, ...]:
        out: List[Optional[Scalar]] = [None] * self.dimension
        for (i, j), targets in self._table.items():
            ai = a[i]
            bj = b[j]
            if ai == 0 or bj == 0:
                continue
            term = ai * bj
            for k, c in targets:
                value = term if c == 1 else term * c
                out[k] = value if out[k] is None else out[k] + value
        return tuple(0 if x is None else x for x in out)


def _check_same(a: "WeilElement", b: "WeilElement") -> None:
    if a.algebra is not b.algebra and a.algebra != b.algebra:
        raise AlgebraMismatchError(
            f"elements of {a.algebra.name or 'algebra'} and {b.algebra.name or 'algebra'} cannot be combined"
        )


@dataclass(frozen=True)
class WeilElement:
    """Coefficient vector over a Weil algebra; the scalar part sits at the unit index."""

    algebra: WeilAlgebra
    coeffs: Tuple[Scalar, ...]

    @property
    def scalar(self) -> Scalar:
        return self.coeffs[self.algebra.unit]

    def coefficient(self, index: int) -> Scalar:
        return self.coeffs[index]

    def nilpotent_part(self) -> "WeilElement":
        coeffs = list(self.coeffs)
        coeffs[self.algebra.unit] = 0
        return WeilElement(self.algebra, tuple(coeffs))

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    def __add__(self, other):
        if isinstance(other, WeilElement):
            _check_same(self, other)
            return WeilElement(self.algebra, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))
        if not isinstance(other, (int, float, Fraction)):
            return NotImplemented
        coeffs = list(self.coeffs)
        coeffs[self.algebra.unit] = coeffs[self.algebra.unit] + other
        return WeilElement(self.algebra, tuple(coeffs))

    def __radd__(self, other):
        if not isinstance(other, (int, float, Fraction)):
            return NotImplemented
        coeffs = list(self.coeffs)
        coeffs[self.algebra.unit] = other + coeffs[self.algebra.unit]
        return WeilElement(self.algebra, tuple(coeffs))

    def __neg__(self):
        return WeilElement(self.algebra, tuple(-a for a in self.coeffs))

    def __sub__(self, other):
        if isinstance(other, WeilElement):
            _check_same(self, other)
            return WeilElement(self.algebra, tuple(a - b for a, b in zip(self.coeffs, other.coeffs)))
        if not isinstance(other, (int, float, Fraction)):
            return NotImplemented
        coeffs = list(self.coeffs)
        coeffs[self.algebra.unit] = coeffs[self.algebra.unit] - other
        return WeilElement(self.algebra, tuple(coeffs))

    def __rsub__(self, other):
        if not isinstance(other, (int, float, Fraction)):
            return NotImplemented
        unit = self.algebra.unit
        coeffs = tuple(other - a if k == unit else -a for k, a in enumerate(self.coeffs))
        return WeilElement(self.algebra, coeffs)

    def __mul__(self, other):
        if isinstance(other, WeilElement):
            return weil_mul(self, other)
        if not isinstance(other, (int, float, Fraction)):
            return NotImplemented
        return WeilElement(self.algebra, tuple(a * other for a in self.coeffs))

    def __rmul__(self, other):
        if not isinstance(other, (int, float, Fraction)):
            return NotImplemented
        return WeilElement(self.algebra, tuple(other * a for a in self.coeffs))

    def __truediv__(self, other):
        if isinstance(other, WeilElement):
            _check_same(self, other)
            return _divide(self, other)
        if not isinstance(other, (int, float, Fraction)):
            return NotImplemented
        if other == 0:
            raise DomainViolationError("division by zero")
        return WeilElement(self.algebra, tuple(a / other for a in self.coeffs))

    def __rtruediv__(self, other):
        if not isinstance(other, (int, float, Fraction)):
            return NotImplemented
        return _divide(self.algebra.constant(other), self)

    def __pow__(self, exponent: int):
        if not isinstance(exponent, int):
            return NotImplemented
        return int_power(self, exponent)

    def __str__(self) -> str:
        parts = [f"{c}*{label}" for c, label in zip(self.coeffs, self.algebra.labels) if c != 0]
        return " + ".join(parts) if parts else "0"


def weil_mul(a: WeilElement, b: WeilElement) -> WeilElement:
    """Product through the structure constants."""
    _check_same(a, b)
    return WeilElement(a.algebra, a.algebra.multiply(a.coeffs, b.coeffs))


def _divide(a: WeilElement, b: WeilElement) -> WeilElement:
    # a / (l + n) = (a / l) * sum_k (-n / l)^k, finite since n^r = 0
    lam = b.scalar
    if lam == 0:
        raise DomainViolationError("division by an element with zero scalar part")
    quotient = WeilElement(a.algebra, tuple(c / lam for c in a.coeffs))
    if a.algebra.nilpotency == 1:
        return quotient
    ratio = -(b.nilpotent_part() / lam)
    series = a.algebra.constant(1)
    term = series
    for _ in range(1, a.algebra.nilpotency):
        term = term * ratio
        series = series + term
    return quotient * series


def int_power(base, exponent: int):
    """Repeated squaring, shared by every scalar type so results agree bit for bit."""
    if exponent < 0:
        return 1 / int_power(base, -exponent)
    if exponent == 0:
        if isinstance(base, WeilElement):
            return base.algebra.constant(1)
        return base * 0 + 1
    result = None
    square = base
    n = exponent
    while n:
        if n & 1:
            result = square if result is None else result * square
        n >>= 1
        if n:
            square = square * square
    return result


# Primitive functions


def _taylor_coefficients(name: str, lam: float, count: int, has_nilpotent: bool) -> List[float]:
    """Coefficients f^(i)(lam)/i! for i < count."""
    if name == "sin":
        cycle = (math.sin(lam), math.cos(lam), -math.sin(lam), -math.cos(lam))
        return [cycle[i % 4] / math.factorial(i) for i in range(count)]
    if name == "cos":
        cycle = (math.cos(lam), -math.sin(lam), -math.cos(lam), math.sin(lam))
        return [cycle[i % 4] / math.factorial(i) for i in range(count)]
    if name == "exp":
        value = math.exp(lam)
        return [value / math.factorial(i) for i in range(count)]
    if name == "log":
        if lam <= 0:
            raise DomainViolationError(f"log of non-positive scalar part {lam}")
        return [math.log(lam)] + [(-1) ** (i - 1) / (i * lam ** i) for i in range(1, count)]
    if name == "sqrt":
        if lam < 0:
            raise DomainViolationError(f"sqrt of negative scalar part {lam}")
        if lam == 0 and count > 1 and has_nilpotent:
            raise DomainViolationError("sqrt is not differentiable at scalar part 0")
        root = math.sqrt(lam)
        coeffs = [root]
        binom = 1.0
        for i in range(1, count):
            binom *= (0.5 - (i - 1)) / i
            coeffs.append(binom * root / lam ** i)
        return coeffs
    if name == "atan0":
        if lam != 0:
            raise DomainViolationError("atan series is expanded at 0 only")
        return [0.0 if i % 2 == 0 else (-1) ** (i // 2) / i for i in range(count)]
    raise BackendError(f"unknown primitive '{name}'")


def _series(a: WeilElement, coeffs: List[float]) -> WeilElement:
    result = a.algebra.constant(coeffs[0])
    if a.algebra.nilpotency == 1:
        return result
    n = a.nilpotent_part()
    power = n
    for c in coeffs[1:]:
        if power.is_zero():
            break
        if c != 0:
            result = result + power * c
        power = power * n
    return result


def scalar_primitive(name: str, args: Sequence[Scalar]) -> float:
    """Plain float evaluation with the same domain rules as the lifts."""
    values = [float(a) for a in args]
    if name == "atan2":
        y, x = values
        if x == 0.0 and y == 0.0:
            raise DomainViolationError("atan2(0, 0) is undefined")
        return math.atan2(y, x)
    (x,) = values
    if name == "sin":
        return math.sin(x)
    if name == "cos":
        return math.cos(x)
    if name == "exp":
        return math.exp(x)
    if name == "log":
        if x <= 0:
            raise DomainViolationError(f"log of non-positive value {x}")
        return math.log(x)
    if name == "sqrt":
        if x < 0:
            raise DomainViolationError(f"sqrt of negative value {x}")
        return math.sqrt(x)
    raise BackendError(f"unknown primitive '{name}'")


def lift_primitive(name: str, args: Sequence[Union[Scalar, WeilElement]]) -> WeilElement:
    """Taylor lift of a primitive at Weil-element arguments."""
    algebra = next(a.algebra for a in args if isinstance(a, WeilElement))
    elems = [a if isinstance(a, WeilElement) else algebra.constant(a) for a in args]
    for e in elems:
        _check_same(elems[0], e)
    if name == "atan2":
        y, x = elems
        y0, x0 = float(y.scalar), float(x.scalar)
        if x0 == 0.0 and y0 == 0.0:
            raise DomainViolationError("atan2(0, 0) is undefined")
        # angle(z * conj(z0)) has zero scalar part, so atan is expanded at 0
        w = (x0 * y - y0 * x) / (x0 * x + y0 * y)
        return math.atan2(y0, x0) + taylor_lift("atan0", w)
    if len(elems) != 1:
        raise BackendError(f"primitive '{name}' takes one argument")
    return taylor_lift(name, elems[0])


def taylor_lift(f: Union[str, Any], a: WeilElement) -> WeilElement:
    """
    Lift f to the Weil algebra of a: sum_i f^(i)(l)/i! n^i for a = l + n.

    Args:
        f: A primitive name or any one-input, one-output map with evaluate().
        a: The element to lift at.
    """
    if not isinstance(f, str):
        return f.evaluate((a,))[0]
    lam = float(a.scalar)
    count = a.algebra.nilpotency
    coeffs = _taylor_coefficients(f, lam, count, not a.nilpotent_part().is_zero())
    return _series(a, coeffs)


# Constructors


@lru_cache(maxsize=None)
def trivial_algebra() -> WeilAlgebra:
    return WeilAlgebra(1, 0, ((0, 0, 0, Fraction(1)),), 1, name="R", labels=("1",))


@lru_cache(maxsize=None)
def dual_numbers() -> WeilAlgebra:
    return WeilAlgebra(
        2, 0,
        ((0, 0, 0, Fraction(1)), (0, 1, 1, Fraction(1)), (1, 0, 1, Fraction(1))),
        2, name="D", labels=("1", "e"),
    )


@lru_cache(maxsize=None)
def tensor_algebra(a: WeilAlgebra, b: WeilAlgebra) -> WeilAlgebra:
    """Basis e_i (x) f_j at index i*dim(b) + j; constants by bilinearity."""
    db = b.dimension
    entries = tuple(
        (i1 * db + i2, j1 * db + j2, k1 * db + k2, c1 * c2)
        for i1, j1, k1, c1 in a.constants
        for i2, j2, k2, c2 in b.constants
    )
    labels = tuple(_join_labels(la, lb) for la in a.labels for lb in b.labels)
    return WeilAlgebra(
        a.dimension * db,
        a.unit * db + b.unit,
        entries,
        a.nilpotency + b.nilpotency - 1,
        name=f"{a.name}(x){b.name}",
        labels=labels,
    )


def _join_labels(left: str, right: str) -> str:
    if left == "1":
        return right
    if right == "1":
        return left
    return f"{left}{right}"


# Basis positions in the second tangent algebra dual (x) dual.
T2_UNIT, T2_E2, T2_E1, T2_E12 = 0, 1, 2, 3


@lru_cache(maxsize=None)
def second_tangent_algebra() -> WeilAlgebra:
    """span(1, e2, e1, e1e2) with e1^2 = e2^2 = 0."""
    base = tensor_algebra(dual_numbers(), dual_numbers())
    return WeilAlgebra(
        base.dimension, base.unit, base.constants, base.nilpotency,
        name="T2", labels=("1", "e2", "e1", "e1e2"),
    )


@lru_cache(maxsize=None)
def jacobian_algebra(m: int) -> WeilAlgebra:
    """R[e_1..e_m]/(e_i e_j): one pass gives all first partials in m directions."""
    entries = [(0, 0, 0, Fraction(1))]
    for k in range(1, m + 1):
        entries.append((0, k, k, Fraction(1)))
        entries.append((k, 0, k, Fraction(1)))
    labels = ("1",) + tuple(f"e{k}" for k in range(1, m + 1))
    return WeilAlgebra(m + 1, 0, tuple(entries), 2 if m else 1, name=f"J{m}", labels=labels)


@lru_cache(maxsize=None)
def truncated_polynomial_algebra(order: int) -> WeilAlgebra:
    """R[t]/(t^(order+1)); lifts give Taylor coefficients up to the given order."""
    entries = tuple(
        (i, j, i + j, Fraction(1))
        for i in range(order + 1)
        for j in range(order + 1)
        if i + j <= order
    )
    labels = ("1",) + tuple(f"t^{i}" for i in range(1, order + 1))
    return WeilAlgebra(order + 1, 0, entries, order + 1, name=f"P{order}", labels=labels)
