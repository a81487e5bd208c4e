"""Exact rational arithmetic and small dense linear algebra.

Scalars are :class:`fractions.Fraction` (always reduced, positive
denominator).  Matrices are :class:`RatMatrix`, an immutable row-major
container.  Nothing in this module ever touches floating point.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import comb, gcd
from typing import Iterable, Optional, Sequence

Rational = Fraction


def as_rational(value) -> Fraction:
    """Coerce ints, Fractions and "a/b" strings to a Fraction.

    Floats are refused: they would silently smuggle rounding into exact code.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot convert {type(value).__name__} to an exact rational")


def format_rational(q) -> str:
    q = as_rational(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def parse_rational(text: str) -> Fraction:
    if not isinstance(text, (str, int)) or isinstance(text, bool):
        raise ValueError(f"expected a rational string, got {text!r}")
    try:
        return as_rational(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"malformed rational {text!r}") from exc


class RatMatrix:
    """Immutable dense matrix of Fractions.

    Equality and hashing are exact and entrywise.  Column vectors are just
    ``n x 1`` matrices; use :meth:`column` / :meth:`flat` to go back and forth.
    """

    __slots__ = ("rows", "cols", "entries", "_hash")

    def __init__(self, rows: int, cols: int, entries: Iterable):
        data = tuple(as_rational(v) for v in entries)
        if len(data) != rows * cols:
            raise ValueError(f"expected {rows * cols} entries, got {len(data)}")
        self.rows = rows
        self.cols = cols
        self.entries = data
        self._hash = None

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence]) -> "RatMatrix":
        rows = [list(r) for r in rows]
        if not rows:
            return cls(0, 0, ())
        width = len(rows[0])
        if any(len(r) != width for r in rows):
            raise ValueError("ragged rows")
        return cls(len(rows), width, (v for r in rows for v in r))

    @classmethod
    def column(cls, values: Sequence) -> "RatMatrix":
        return cls(len(values), 1, values)

    @classmethod
    def identity(cls, n: int) -> "RatMatrix":
        return cls(n, n, (1 if i == j else 0 for i in range(n) for j in range(n)))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "RatMatrix":
        return cls(rows, cols, (0,) * (rows * cols))

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence]) -> "RatMatrix":
        columns = [list(c) for c in columns]
        if not columns:
            raise ValueError("need at least one column")
        return cls.from_rows(list(zip(*columns)))

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def __getitem__(self, idx):
        i, j = idx
        return self.entries[i * self.cols + j]

    def row(self, i: int) -> tuple:
        return self.entries[i * self.cols:(i + 1) * self.cols]

    def to_rows(self) -> list[list[Fraction]]:
        return [list(self.row(i)) for i in range(self.rows)]

    def flat(self) -> tuple:
        return self.entries

    @property
    def T(self) -> "RatMatrix":
        return RatMatrix(self.cols, self.rows,
                         (self[i, j] for j in range(self.cols) for i in range(self.rows)))

    def __matmul__(self, other: "RatMatrix") -> "RatMatrix":
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        out = []
        ocols = [other.entries[j::other.cols] for j in range(other.cols)]
        for i in range(self.rows):
            r = self.row(i)
            out.extend(sum((a * b for a, b in zip(r, c)), Fraction(0)) for c in ocols)
        return RatMatrix(self.rows, other.cols, out)

    def __add__(self, other: "RatMatrix") -> "RatMatrix":
        self._same_shape(other)
        return RatMatrix(self.rows, self.cols, (a + b for a, b in zip(self.entries, other.entries)))

    def __sub__(self, other: "RatMatrix") -> "RatMatrix":
        self._same_shape(other)
        return RatMatrix(self.rows, self.cols, (a - b for a, b in zip(self.entries, other.entries)))

    def __neg__(self) -> "RatMatrix":
        return RatMatrix(self.rows, self.cols, (-a for a in self.entries))

    def scale(self, factor) -> "RatMatrix":
        f = as_rational(factor)
        return RatMatrix(self.rows, self.cols, (f * a for a in self.entries))

    def __rmul__(self, factor) -> "RatMatrix":
        return self.scale(factor)

    def trace(self) -> Fraction:
        if self.rows != self.cols:
            raise ValueError("trace of a non-square matrix")
        return sum((self[i, i] for i in range(self.rows)), Fraction(0))

    def pairing(self, other: "RatMatrix") -> Fraction:
        """Hilbert-Schmidt pairing ``Tr[self^T other]``."""
        self._same_shape(other)
        return sum((a * b for a, b in zip(self.entries, other.entries)), Fraction(0))

    def _same_shape(self, other):
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {other.shape}")

    def __eq__(self, other):
        if not isinstance(other, RatMatrix):
            return NotImplemented
        return self.shape == other.shape and self.entries == other.entries

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.rows, self.cols, self.entries))
        return self._hash

    def __repr__(self):
        body = "; ".join(" ".join(format_rational(v) for v in self.row(i)) for i in range(self.rows))
        return f"RatMatrix[{body}]"

    def to_json(self) -> list[list[str]]:
        return [[format_rational(v) for v in self.row(i)] for i in range(self.rows)]

    @classmethod
    def from_json(cls, rows) -> "RatMatrix":
        if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
            raise ValueError("a matrix must be an array of row arrays")
        return cls.from_rows([[parse_rational(v) for v in r] for r in rows])


def binomial(n: int, k: int) -> int:
    if n < 0 or k < 0:
        raise ValueError("binomial needs n >= 0 and k >= 0")
    return comb(n, k)


@lru_cache(maxsize=None)
def stirling2(m: int, k: int) -> int:
    """Partitions of an ``m``-set into ``k`` non-empty blocks.

    Built row by row from ``S(m, k) = k S(m-1, k) + S(m-1, k-1)``.
    """
    if m < 0 or k < 0:
        raise ValueError("stirling2 needs m >= 0 and k >= 0")
    if k > m:
        return 0
    row = [1] + [0] * k  # S(0, .)
    for i in range(1, m + 1):
        new = [0] * (k + 1)
        for j in range(1, min(i, k) + 1):
            new[j] = j * row[j] + row[j - 1]
        row = new
    return row[k]


def _rows_of(M) -> list[list[Fraction]]:
    if isinstance(M, RatMatrix):
        return M.to_rows()
    return [[as_rational(v) for v in r] for r in M]


def _integer_rows(rows: list[list[Fraction]]) -> list[list[int]]:
    out = []
    for r in rows:
        den = 1
        for v in r:
            den = den * v.denominator // gcd(den, v.denominator)
        out.append([int(v * den) for v in r])
    return out


def rank(M) -> int:
    """Exact rank by fraction-free elimination (rows kept primitive)."""
    a = _integer_rows(_rows_of(M))
    if not a:
        return 0
    nrows, ncols = len(a), len(a[0])
    r = 0
    for c in range(ncols):
        pivot = next((i for i in range(r, nrows) if a[i][c] != 0), None)
        if pivot is None:
            continue
        a[r], a[pivot] = a[pivot], a[r]
        p = a[r][c]
        row_r = a[r]
        for i in range(r + 1, nrows):
            f = a[i][c]
            if f == 0:
                continue
            new = [p * x - f * y for x, y in zip(a[i], row_r)]
            g = 0
            for v in new:
                g = gcd(g, v)
            a[i] = [v // g for v in new] if g > 1 else new
        r += 1
        if r == nrows:
            break
    return r


def solve_unique(A, b: Sequence) -> Optional[list[Fraction]]:
    """Solve ``A x = b`` exactly.

    Returns ``None`` when the columns of ``A`` are dependent or the system
    is inconsistent; otherwise the (necessarily unique) solution.
    """
    rows = _rows_of(A)
    b = [as_rational(v) for v in b]
    if len(rows) != len(b):
        raise ValueError("right-hand side length does not match row count")
    if not rows:
        return None
    ncols = len(rows[0])
    aug = [r[:] + [bi] for r, bi in zip(rows, b)]
    pivots = []
    r = 0
    for c in range(ncols):
        pivot = next((i for i in range(r, len(aug)) if aug[i][c] != 0), None)
        if pivot is None:
            return None
        aug[r], aug[pivot] = aug[pivot], aug[r]
        inv = 1 / aug[r][c]
        aug[r] = [v * inv for v in aug[r]]
        for i in range(len(aug)):
            if i != r and aug[i][c] != 0:
                f = aug[i][c]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[r])]
        pivots.append(c)
        r += 1
    if any(aug[i][ncols] != 0 for i in range(r, len(aug))):
        return None
    return [aug[i][ncols] for i in range(ncols)]


def nullspace(M) -> list[list[Fraction]]:
    """Exact basis of the right null space, one vector per free column."""
    rows = _rows_of(M)
    if not rows:
        return []
    ncols = len(rows[0])
    a = [r[:] for r in rows]
    pivcols = []
    r = 0
    for c in range(ncols):
        pivot = next((i for i in range(r, len(a)) if a[i][c] != 0), None)
        if pivot is None:
            continue
        a[r], a[pivot] = a[pivot], a[r]
        inv = 1 / a[r][c]
        a[r] = [v * inv for v in a[r]]
        for i in range(len(a)):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivcols.append(c)
        r += 1
    free = [c for c in range(ncols) if c not in pivcols]
    basis = []
    for fcol in free:
        v = [Fraction(0)] * ncols
        v[fcol] = Fraction(1)
        for i, pc in enumerate(pivcols):
            v[pc] = -a[i][fcol]
        basis.append(v)
    return basis


def primitive(vec: Sequence) -> tuple[int, ...]:
    """Scale a rational vector to the unique primitive integer vector on its ray."""
    vec = [as_rational(v) for v in vec]
    den = 1
    for v in vec:
        den = den * v.denominator // gcd(den, v.denominator)
    ints = [int(v * den) for v in vec]
    g = 0
    for v in ints:
        g = gcd(g, v)
    if g == 0:
        return tuple(ints)
    return tuple(v // g for v in ints)
