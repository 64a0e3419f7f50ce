"""
Matrix Service
Exact rational matrices plus the float linear algebra (SVD rank, ranges,
pseudoinverses) shared by the numeric verifiers.
"""
from dataclasses import dataclass
from fractions import Fraction
from numbers import Integral
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from tfmonad.errors import FloatRejectedError, ShapeMismatchError

Rational = Union[int, Fraction, str]


def to_rational(value: Rational) -> Fraction:
    """Coerce an int, Fraction or "p/q" string to Fraction; floats are refused."""
    if isinstance(value, bool):
        raise FloatRejectedError(f"boolean {value!r} is not a rational entry")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, Integral):
        return Fraction(int(value))
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except ValueError as exc:
            raise FloatRejectedError(f"cannot read {value!r} as a rational") from exc
    raise FloatRejectedError(f"{type(value).__name__} entry {value!r} rejected; use int, Fraction or 'p/q'")


def format_rational(value: Fraction) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


@dataclass(frozen=True)
class MatrixQ:
    """Exact rational matrix; every entry is a Fraction."""

    rows: Tuple[Tuple[Fraction, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(to_rational(x) for x in row) for row in self.rows)
        if rows and any(len(row) != len(rows[0]) for row in rows):
            raise ShapeMismatchError("matrix rows have different lengths")
        object.__setattr__(self, "rows", rows)

    # Constructors

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[Rational]]) -> "MatrixQ":
        return cls(tuple(tuple(row) for row in rows))

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence[Rational]]) -> "MatrixQ":
        if not columns:
            return cls(())
        return cls(tuple(zip(*columns)))

    @classmethod
    def zeros(cls, nrows: int, ncols: Optional[int] = None) -> "MatrixQ":
        ncols = nrows if ncols is None else ncols
        return cls(tuple((Fraction(0),) * ncols for _ in range(nrows)))

    @classmethod
    def identity(cls, n: int) -> "MatrixQ":
        return cls.scalar(n, 1)

    @classmethod
    def scalar(cls, n: int, value: Rational) -> "MatrixQ":
        s = to_rational(value)
        return cls(tuple(tuple(s if i == j else Fraction(0) for j in range(n)) for i in range(n)))

    # Shape

    @property
    def nrows(self) -> int:
        return len(self.rows)

    @property
    def ncols(self) -> int:
        return len(self.rows[0]) if self.rows else 0

    @property
    def shape(self) -> Tuple[int, int]:
        return self.nrows, self.ncols

    def is_square(self) -> bool:
        return self.nrows == self.ncols

    def column(self, j: int) -> Tuple[Fraction, ...]:
        return tuple(row[j] for row in self.rows)

    def columns(self) -> List[Tuple[Fraction, ...]]:
        return [self.column(j) for j in range(self.ncols)]

    # Arithmetic

    def _check_same_shape(self, other: "MatrixQ") -> None:
        if self.shape != other.shape:
            raise ShapeMismatchError(f"shapes {self.shape} and {other.shape} differ")

    def __add__(self, other: "MatrixQ") -> "MatrixQ":
        self._check_same_shape(other)
        return MatrixQ(tuple(tuple(a + b for a, b in zip(r, s)) for r, s in zip(self.rows, other.rows)))

    def __sub__(self, other: "MatrixQ") -> "MatrixQ":
        self._check_same_shape(other)
        return MatrixQ(tuple(tuple(a - b for a, b in zip(r, s)) for r, s in zip(self.rows, other.rows)))

    def __neg__(self) -> "MatrixQ":
        return MatrixQ(tuple(tuple(-a for a in r) for r in self.rows))

    def __mul__(self, other: Union["MatrixQ", Rational]) -> "MatrixQ":
        if isinstance(other, MatrixQ):
            return self @ other
        s = to_rational(other)
        return MatrixQ(tuple(tuple(a * s for a in r) for r in self.rows))

    def __rmul__(self, other: Rational) -> "MatrixQ":
        return self * other

    def __matmul__(self, other: "MatrixQ") -> "MatrixQ":
        if self.ncols != other.nrows:
            raise ShapeMismatchError(f"cannot multiply {self.shape} by {other.shape}")
        cols = other.columns()
        return MatrixQ(tuple(
            tuple(sum((a * b for a, b in zip(row, col)), Fraction(0)) for col in cols)
            for row in self.rows
        ))

    def apply(self, vector: Sequence[Rational]) -> Tuple[Fraction, ...]:
        """Matrix-vector product."""
        if len(vector) != self.ncols:
            raise ShapeMismatchError(f"vector of length {len(vector)} for {self.shape} matrix")
        vec = [to_rational(x) for x in vector]
        return tuple(sum((a * b for a, b in zip(row, vec)), Fraction(0)) for row in self.rows)

    def transpose(self) -> "MatrixQ":
        return MatrixQ.from_columns(self.rows)

    def is_zero(self) -> bool:
        return all(a == 0 for row in self.rows for a in row)

    def max_abs(self) -> Fraction:
        return max((abs(a) for row in self.rows for a in row), default=Fraction(0))

    # Elimination

    def rref(self) -> Tuple["MatrixQ", List[int]]:
        """Reduced row echelon form and pivot columns."""
        m = [list(row) for row in self.rows]
        pivots: List[int] = []
        r = 0
        for c in range(self.ncols):
            pivot = next((i for i in range(r, self.nrows) if m[i][c] != 0), None)
            if pivot is None:
                continue
            m[r], m[pivot] = m[pivot], m[r]
            lead = m[r][c]
            m[r] = [x / lead for x in m[r]]
            for i in range(self.nrows):
                if i != r and m[i][c] != 0:
                    factor = m[i][c]
                    m[i] = [a - factor * b for a, b in zip(m[i], m[r])]
            pivots.append(c)
            r += 1
            if r == self.nrows:
                break
        return MatrixQ(tuple(tuple(row) for row in m)), pivots

    def rank(self) -> int:
        return len(self.rref()[1])

    def row_basis(self) -> List[Tuple[Fraction, ...]]:
        reduced, pivots = self.rref()
        return [reduced.rows[i] for i in range(len(pivots))]

    def nullspace(self) -> List[Tuple[Fraction, ...]]:
        """Basis of the kernel, one vector per free column."""
        reduced, pivots = self.rref()
        free = [c for c in range(self.ncols) if c not in pivots]
        basis = []
        for f in free:
            vec = [Fraction(0)] * self.ncols
            vec[f] = Fraction(1)
            for i, p in enumerate(pivots):
                vec[p] = -reduced.rows[i][f]
            basis.append(tuple(vec))
        return basis

    def column_space(self) -> List[Tuple[Fraction, ...]]:
        """Pivot columns of the original matrix."""
        _, pivots = self.rref()
        return [self.column(p) for p in pivots]

    def solve(self, rhs: Sequence[Rational]) -> Tuple[Fraction, ...]:
        """Unique solution of a square nonsingular system."""
        if not self.is_square() or len(rhs) != self.nrows:
            raise ShapeMismatchError("solve needs a square system")
        augmented = MatrixQ(tuple(row + (to_rational(b),) for row, b in zip(self.rows, rhs)))
        reduced, pivots = augmented.rref()
        if pivots != list(range(self.ncols)):
            raise ShapeMismatchError("matrix is singular")
        return tuple(row[-1] for row in reduced.rows)

    def inverse(self) -> "MatrixQ":
        n = self.nrows
        columns = [self.solve([1 if i == j else 0 for i in range(n)]) for j in range(n)]
        return MatrixQ.from_columns(columns)

    # Conversion

    def to_numpy(self) -> np.ndarray:
        return np.array([[float(a) for a in row] for row in self.rows], dtype=float).reshape(self.nrows, self.ncols)

    def to_strings(self) -> List[List[str]]:
        return [[format_rational(a) for a in row] for row in self.rows]

    def __str__(self) -> str:
        return "[" + ", ".join("[" + ", ".join(r) + "]" for r in self.to_strings()) + "]"


def rational_vector(values: Sequence[Rational]) -> Tuple[Fraction, ...]:
    return tuple(to_rational(v) for v in values)


# Float linear algebra


def singular_values(matrix: np.ndarray) -> np.ndarray:
    if matrix.size == 0:
        return np.zeros(0)
    return np.linalg.svd(matrix, compute_uv=False)


def numerical_rank(matrix: np.ndarray, rel_threshold: float) -> int:
    """Count singular values above rel_threshold times the largest one."""
    sv = singular_values(np.atleast_2d(matrix))
    if sv.size == 0 or sv[0] == 0.0:
        return 0
    return int(np.sum(sv > rel_threshold * sv[0]))


def range_basis(matrix: np.ndarray, rel_threshold: float) -> np.ndarray:
    """Orthonormal basis (as columns) of the numerical column space."""
    matrix = np.atleast_2d(matrix)
    u, sv, _ = np.linalg.svd(matrix)
    if sv.size == 0 or sv[0] == 0.0:
        return np.zeros((matrix.shape[0], 0))
    r = int(np.sum(sv > rel_threshold * sv[0]))
    return u[:, :r]


def orthogonal_complement(basis: np.ndarray, dim: int) -> np.ndarray:
    """Orthonormal columns spanning the complement of the column span of basis."""
    if basis.size == 0:
        return np.eye(dim)
    u, _, _ = np.linalg.svd(basis)
    return u[:, basis.shape[1]:]


def pseudo_inverse(matrix: np.ndarray, rel_threshold: float) -> np.ndarray:
    """Moore-Penrose inverse with singular values below the relative threshold dropped."""
    u, sv, vt = np.linalg.svd(matrix, full_matrices=False)
    if sv.size == 0 or sv[0] == 0.0:
        return np.zeros(matrix.T.shape)
    keep = sv > rel_threshold * sv[0]
    inv = np.zeros_like(sv)
    inv[keep] = 1.0 / sv[keep]
    return (vt.T * inv) @ u.T


def distance_to_span(vectors: np.ndarray, basis: np.ndarray) -> float:
    """Largest distance of the columns of vectors to the span of orthonormal basis columns."""
    if vectors.size == 0:
        return 0.0
    if basis.size == 0:
        residual = vectors
    else:
        residual = vectors - basis @ (basis.T @ vectors)
    return float(np.max(np.linalg.norm(residual, axis=0)))
