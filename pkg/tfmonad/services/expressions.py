"""
Expression Service
Closed-form expression trees, their parser, and chart maps. Every tree evaluates
over any commutative scalar type: rationals, floats, Weil elements, or other
expressions (which is how maps are composed).
"""
import math
import re
from abc import ABC, abstractmethod
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, FrozenSet, List, Mapping, Optional, Sequence, Tuple, Union

from tfmonad.errors import BackendError, DomainViolationError, ParseError, ShapeMismatchError
from tfmonad.services.weil import PRIMITIVES, WeilElement, int_power, lift_primitive, scalar_primitive

Bound = Union[Fraction, float]

RATIONAL = "rational"
FLOAT = "float"
SYMBOLIC = "symbolic"
BACKENDS = (RATIONAL, FLOAT, SYMBOLIC)

_PREC_SUM, _PREC_PRODUCT, _PREC_UNARY, _PREC_POWER, _PREC_ATOM = 1, 2, 3, 4, 5


def as_expr(value) -> "Expr":
    if isinstance(value, Expr):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not expressions")
    if isinstance(value, (int, Fraction)):
        return Const(Fraction(value))
    if isinstance(value, float):
        return Const(value)
    raise TypeError(f"cannot use {type(value).__name__} as an expression")


def scalar_part(value):
    """Real part of a scalar or Weil element."""
    if isinstance(value, WeilElement):
        return value.scalar
    return value


class Expr:
    """Base class of expression nodes. Arithmetic operators build new nodes."""

    def evaluate(self, env: Mapping[str, object], backend: str = FLOAT):
        raise NotImplementedError

    def variables(self) -> FrozenSet[str]:
        raise NotImplementedError

    def is_rational(self) -> bool:
        """True when no transcendental primitive or float constant occurs."""
        raise NotImplementedError

    def _text(self) -> Tuple[str, int]:
        raise NotImplementedError

    def __str__(self) -> str:
        return self._text()[0]

    def __add__(self, other):
        return BinOp("+", self, as_expr(other))

    def __radd__(self, other):
        return BinOp("+", as_expr(other), self)

    def __sub__(self, other):
        return BinOp("-", self, as_expr(other))

    def __rsub__(self, other):
        return BinOp("-", as_expr(other), self)

    def __mul__(self, other):
        return BinOp("*", self, as_expr(other))

    def __rmul__(self, other):
        return BinOp("*", as_expr(other), self)

    def __truediv__(self, other):
        return BinOp("/", self, as_expr(other))

    def __rtruediv__(self, other):
        return BinOp("/", as_expr(other), self)

    def __neg__(self):
        return Neg(self)

    def __pow__(self, exponent: int):
        return Pow(self, exponent)


@dataclass(frozen=True, eq=True)
class Var(Expr):
    name: str

    def evaluate(self, env, backend=FLOAT):
        return env[self.name]

    def variables(self):
        return frozenset((self.name,))

    def is_rational(self):
        return True

    def _text(self):
        return self.name, _PREC_ATOM


@dataclass(frozen=True, eq=True)
class Const(Expr):
    value: Bound

    def evaluate(self, env, backend=FLOAT):
        if backend == SYMBOLIC:
            return self
        if backend == RATIONAL:
            if isinstance(self.value, float):
                raise BackendError(f"constant {self} needs the float backend")
            return self.value
        return float(self.value)

    def variables(self):
        return frozenset()

    def is_rational(self):
        return not isinstance(self.value, float)

    def _text(self):
        v = self.value
        if isinstance(v, float):
            return ("pi" if v == math.pi else repr(v)), _PREC_ATOM
        if v.denominator == 1 and v >= 0:
            return str(v.numerator), _PREC_ATOM
        return f"({v})", _PREC_ATOM


@dataclass(frozen=True, eq=True)
class BinOp(Expr):
    op: str
    left: Expr
    right: Expr

    def evaluate(self, env, backend=FLOAT):
        a = self.left.evaluate(env, backend)
        b = self.right.evaluate(env, backend)
        try:
            if self.op == "+":
                return a + b
            if self.op == "-":
                return a - b
            if self.op == "*":
                return a * b
            return a / b
        except ZeroDivisionError as exc:
            raise DomainViolationError(f"division by zero in {self}") from exc

    def variables(self):
        return self.left.variables() | self.right.variables()

    def is_rational(self):
        return self.left.is_rational() and self.right.is_rational()

    def _text(self):
        prec = _PREC_SUM if self.op in "+-" else _PREC_PRODUCT
        left, lp = self.left._text()
        right, rp = self.right._text()
        if lp < prec:
            left = f"({left})"
        if rp < prec or (rp == prec and self.op in "-/"):
            right = f"({right})"
        return f"{left} {self.op} {right}", prec


@dataclass(frozen=True, eq=True)
class Neg(Expr):
    operand: Expr

    def evaluate(self, env, backend=FLOAT):
        return -self.operand.evaluate(env, backend)

    def variables(self):
        return self.operand.variables()

    def is_rational(self):
        return self.operand.is_rational()

    def _text(self):
        inner, p = self.operand._text()
        if p < _PREC_UNARY:
            inner = f"({inner})"
        return f"-{inner}", _PREC_UNARY


@dataclass(frozen=True, eq=True)
class Pow(Expr):
    base: Expr
    exponent: int

    def evaluate(self, env, backend=FLOAT):
        value = self.base.evaluate(env, backend)
        if backend == SYMBOLIC:
            return Pow(as_expr(value), self.exponent)
        try:
            return int_power(value, self.exponent)
        except ZeroDivisionError as exc:
            raise DomainViolationError(f"zero raised to a negative power in {self}") from exc

    def variables(self):
        return self.base.variables()

    def is_rational(self):
        return self.base.is_rational()

    def _text(self):
        base, p = self.base._text()
        if p <= _PREC_POWER:
            base = f"({base})"
        return f"{base}^{self.exponent}", _PREC_POWER


@dataclass(frozen=True, eq=True)
class Call(Expr):
    func: str
    args: Tuple[Expr, ...]

    def evaluate(self, env, backend=FLOAT):
        values = [a.evaluate(env, backend) for a in self.args]
        return apply_primitive(self.func, values, backend)

    def variables(self):
        out: FrozenSet[str] = frozenset()
        for a in self.args:
            out |= a.variables()
        return out

    def is_rational(self):
        return False

    def _text(self):
        return f"{self.func}({', '.join(str(a) for a in self.args)})", _PREC_ATOM


def apply_primitive(name: str, args: Sequence, backend: str):
    if backend == SYMBOLIC:
        return Call(name, tuple(as_expr(a) for a in args))
    if backend == RATIONAL:
        raise BackendError(f"'{name}' is transcendental; use the float backend")
    if any(isinstance(a, WeilElement) for a in args):
        return lift_primitive(name, args)
    return scalar_primitive(name, args)


# Parser

_NUMBER = r"(?P<number>\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
_OP = r"(?P<op>[-+*/^(),])"
_TOKEN = re.compile(rf"\s*(?:{_NUMBER}|(?P<name>[a-z][a-z0-9_]*)|{_OP})")
# polynomial generators are written X1, dX1, dTX1
_MIXED_TOKEN = re.compile(rf"\s*(?:{_NUMBER}|(?P<name>[A-Za-z][A-Za-z0-9_]*)|{_OP})")
_ARITY = {"sin": 1, "cos": 1, "exp": 1, "log": 1, "sqrt": 1, "atan2": 2}


@dataclass
class _Token:
    kind: str
    text: str
    pos: int


class ExpressionParser:
    """
    Recursive-descent parser for the expression grammar.

    expr  := term (('+' | '-') term)*
    term  := unary (('*' | '/') unary)*
    unary := '-' unary | power
    power := atom ('^' '-'? integer)?
    atom  := number | name | func '(' expr (',' expr)* ')' | '(' expr ')'

    Names are [a-z][a-z0-9_]*; mixed_case admits generators such as dX1.
    """

    def __init__(self, text: str, variables: Optional[Sequence[str]] = None, mixed_case: bool = False):
        self.text = text
        self.variables = None if variables is None else set(variables)
        self.pattern = _MIXED_TOKEN if mixed_case else _TOKEN
        self.tokens = self._tokenize(text)
        self.index = 0

    def _tokenize(self, text: str) -> List[_Token]:
        tokens = []
        pos = 0
        while pos < len(text):
            if text[pos].isspace():
                pos += 1
                continue
            match = self.pattern.match(text, pos)
            if not match or match.end() == pos:
                raise ParseError(f"unexpected character {text[pos]!r}", text, pos)
            kind = match.lastgroup
            start = match.start(kind)
            tokens.append(_Token(kind, match.group(kind), start))
            pos = match.end()
        tokens.append(_Token("end", "", len(text)))
        return tokens

    def _peek(self) -> _Token:
        return self.tokens[self.index]

    def _next(self) -> _Token:
        token = self.tokens[self.index]
        self.index += 1
        return token

    def _expect(self, text: str) -> _Token:
        token = self._next()
        if token.text != text:
            found = token.text or "end of input"
            raise ParseError(f"expected '{text}' but found '{found}'", self.text, token.pos)
        return token

    def parse(self) -> Expr:
        if self._peek().kind == "end":
            raise ParseError("empty expression", self.text, 0)
        expr = self._expr()
        token = self._peek()
        if token.kind != "end":
            raise ParseError(f"unexpected token '{token.text}'", self.text, token.pos)
        return expr

    def _expr(self) -> Expr:
        node = self._term()
        while self._peek().text in ("+", "-"):
            op = self._next().text
            node = BinOp(op, node, self._term())
        return node

    def _term(self) -> Expr:
        node = self._unary()
        while self._peek().text in ("*", "/"):
            op = self._next().text
            node = BinOp(op, node, self._unary())
        return node

    def _unary(self) -> Expr:
        if self._peek().text == "-":
            self._next()
            return Neg(self._unary())
        return self._power()

    def _power(self) -> Expr:
        base = self._atom()
        if self._peek().text != "^":
            return base
        self._next()
        sign = 1
        if self._peek().text == "-":
            self._next()
            sign = -1
        token = self._next()
        if token.kind != "number" or not token.text.isdigit():
            raise ParseError("exponent must be an integer literal", self.text, token.pos)
        return Pow(base, sign * int(token.text))

    def _atom(self) -> Expr:
        token = self._next()
        if token.kind == "number":
            return Const(Fraction(token.text))
        if token.text == "(":
            node = self._expr()
            self._expect(")")
            return node
        if token.kind == "name":
            if token.text in PRIMITIVES:
                return self._call(token)
            if self._peek().text == "(":
                raise ParseError(f"unknown function '{token.text}'", self.text, token.pos)
            if token.text == "pi":
                return Const(math.pi)
            if self.variables is not None and token.text not in self.variables:
                raise ParseError(f"undeclared variable '{token.text}'", self.text, token.pos)
            return Var(token.text)
        found = token.text or "end of input"
        raise ParseError(f"unexpected '{found}'", self.text, token.pos)

    def _call(self, token: _Token) -> Expr:
        self._expect("(")
        args = [self._expr()]
        while self._peek().text == ",":
            self._next()
            args.append(self._expr())
        self._expect(")")
        if len(args) != _ARITY[token.text]:
            raise ParseError(
                f"'{token.text}' takes {_ARITY[token.text]} argument(s), got {len(args)}", self.text, token.pos
            )
        return Call(token.text, tuple(args))


def parse_expression(text: str, variables: Optional[Sequence[str]] = None) -> Expr:
    return ExpressionParser(text, variables).parse()


def parse_constant(value: Union[str, int, Fraction, float]) -> Bound:
    """Read a bound such as "-1", "3/2" or "2*pi"; exact whenever possible."""
    if isinstance(value, (int, Fraction)) and not isinstance(value, bool):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(str(value))
    expr = parse_expression(str(value), variables=())
    return expr.evaluate({}, RATIONAL if expr.is_rational() else FLOAT)


# Chart maps


def check_box(point: Sequence, lower: Sequence[Bound], upper: Sequence[Bound]) -> None:
    for i, (x, lo, hi) in enumerate(zip(point, lower, upper)):
        if isinstance(x, Expr):
            continue
        s = scalar_part(x)
        if not lo <= s <= hi:
            raise DomainViolationError(f"coordinate {i} = {float(s):.6g} outside [{float(lo):.6g}, {float(hi):.6g}]")


class SmoothMap(ABC):
    """A map between chart boxes that can be evaluated on generic scalars."""

    @property
    @abstractmethod
    def n_in(self) -> int:
        ...

    @property
    @abstractmethod
    def n_out(self) -> int:
        ...

    @abstractmethod
    def box(self) -> Tuple[Tuple[Bound, ...], Tuple[Bound, ...]]:
        ...

    @abstractmethod
    def rational(self) -> bool:
        """True when exact rational evaluation is possible."""

    @abstractmethod
    def evaluate(self, point: Sequence, backend: Optional[str] = None) -> tuple:
        ...

    def __call__(self, *point):
        return self.evaluate(point)


def infer_backend(point: Sequence, exact_possible: bool) -> str:
    def is_float(x):
        if isinstance(x, WeilElement):
            return any(isinstance(c, float) for c in x.coeffs)
        return isinstance(x, float)

    if any(isinstance(x, Expr) for x in point):
        return SYMBOLIC
    if not exact_possible or any(is_float(x) for x in point):
        return FLOAT
    return RATIONAL


@dataclass(frozen=True)
class ChartMap(SmoothMap):
    """
    k closed-form outputs in m named inputs over a rectangular domain box.

    Optional constraints are expressions that must stay strictly positive,
    e.g. "1/2 - (x1*v2 - x2*v1)".
    """

    inputs: Tuple[str, ...]
    outputs: Tuple[Expr, ...]
    lower: Tuple[Bound, ...]
    upper: Tuple[Bound, ...]
    constraints: Tuple[Expr, ...] = ()
    name: str = ""

    def __post_init__(self):
        for field_name in ("inputs", "outputs", "lower", "upper", "constraints"):
            object.__setattr__(self, field_name, tuple(getattr(self, field_name)))
        if len(set(self.inputs)) != len(self.inputs):
            raise ShapeMismatchError(f"{self.name}: duplicate input names")
        if not (len(self.lower) == len(self.upper) == len(self.inputs)):
            raise ShapeMismatchError(f"{self.name}: domain box does not match {len(self.inputs)} inputs")
        if any(not lo < hi for lo, hi in zip(self.lower, self.upper)):
            raise ShapeMismatchError(f"{self.name}: domain box has empty interior")
        declared = set(self.inputs)
        for expr in self.outputs + self.constraints:
            unknown = expr.variables() - declared
            if unknown:
                raise ShapeMismatchError(f"{self.name}: undeclared variables {sorted(unknown)} in {expr}")

    @classmethod
    def from_strings(
        cls,
        inputs: Sequence[str],
        exprs: Sequence[str],
        lower: Sequence,
        upper: Sequence,
        constraints: Sequence[str] = (),
        name: str = "",
    ) -> "ChartMap":
        outputs = tuple(parse_expression(e, inputs) for e in exprs)
        cons = tuple(parse_expression(c, inputs) for c in constraints)
        return cls(
            tuple(inputs), outputs,
            tuple(parse_constant(v) for v in lower),
            tuple(parse_constant(v) for v in upper),
            cons, name,
        )

    @property
    def n_in(self) -> int:
        return len(self.inputs)

    @property
    def n_out(self) -> int:
        return len(self.outputs)

    def box(self):
        return self.lower, self.upper

    def rational(self) -> bool:
        return (
            all(e.is_rational() for e in self.outputs + self.constraints)
            and not any(isinstance(b, float) for b in self.lower + self.upper)
        )

    def evaluate(self, point: Sequence, backend: Optional[str] = None) -> tuple:
        if len(point) != self.n_in:
            raise ShapeMismatchError(f"{self.name}: expected {self.n_in} inputs, got {len(point)}")
        backend = backend or infer_backend(point, self.rational())
        if backend != SYMBOLIC:
            check_box(point, self.lower, self.upper)
        env = dict(zip(self.inputs, point))
        for cons in self.constraints:
            value = cons.evaluate(env, backend)
            if backend != SYMBOLIC and not scalar_part(value) > 0:
                raise DomainViolationError(f"{self.name}: constraint {cons} > 0 violated")
        return tuple(e.evaluate(env, backend) for e in self.outputs)

    def substitute(self, mapping: Dict[str, Expr], inputs: Sequence[str],
                   lower: Sequence[Bound], upper: Sequence[Bound], name: str = "") -> "ChartMap":
        """Replace inputs by expressions in new inputs."""
        env = {v: mapping.get(v, Var(v)) for v in self.inputs}
        outputs = tuple(as_expr(e.evaluate(env, SYMBOLIC)) for e in self.outputs)
        cons = tuple(as_expr(c.evaluate(env, SYMBOLIC)) for c in self.constraints)
        return ChartMap(tuple(inputs), outputs, tuple(lower), tuple(upper), cons, name or self.name)

    def compose(self, inner: "ChartMap") -> "ChartMap":
        """self after inner, on inner's box. self's box is not carried over."""
        if inner.n_out != self.n_in:
            raise ShapeMismatchError(f"cannot compose {self.n_in}-input map after {inner.n_out}-output map")
        mapping = dict(zip(self.inputs, inner.outputs))
        composed = self.substitute(mapping, inner.inputs, inner.lower, inner.upper, f"{self.name}o{inner.name}")
        return ChartMap(
            composed.inputs, composed.outputs, composed.lower, composed.upper,
            inner.constraints + composed.constraints, composed.name,
        )

    def output_strings(self) -> List[str]:
        return [str(e) for e in self.outputs]
