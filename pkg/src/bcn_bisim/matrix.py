"""Exact matrix calculus for logical, Boolean and rational matrices.

Public indices are 1-based, matching delta notation: ``LogicalMatrix(4, [2, 3])``
is delta_4[2 3].  Internally everything is 0-based numpy.
"""
from __future__ import annotations

import math
import re
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

# float32 accumulates exact integer counts only up to 2**24
_EXACT_F32 = 1 << 24


class DimensionError(ValueError):
    pass


def _readonly(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


class LogicalMatrix:
    """Matrix whose every column is a canonical unit vector.

    Only the row index of the single 1 in each column is stored.
    """

    __slots__ = ("rows", "_idx")

    def __init__(self, rows: int, delta: Sequence[int]):
        rows = int(rows)
        if rows < 1:
            raise ValueError(f"rows must be positive, got {rows}")
        idx = np.array(delta, dtype=np.int64).reshape(-1) - 1
        if idx.size and (idx.min() < 0 or idx.max() >= rows):
            raise ValueError(f"delta indices must lie in [1, {rows}]")
        self.rows = rows
        self._idx = _readonly(idx)

    @classmethod
    def from_index(cls, rows: int, index) -> "LogicalMatrix":
        """Build from 0-based row indices (no copy if already int64)."""
        obj = cls.__new__(cls)
        obj.rows = int(rows)
        idx = np.asarray(index, dtype=np.int64).reshape(-1)
        if idx.size and (idx.min() < 0 or idx.max() >= obj.rows):
            raise ValueError(f"row indices must lie in [0, {obj.rows})")
        if idx.flags.writeable:
            idx = idx.copy()
        obj._idx = _readonly(idx)
        return obj

    @classmethod
    def identity(cls, n: int) -> "LogicalMatrix":
        return cls.from_index(n, np.arange(n))

    @classmethod
    def from_dense(cls, a) -> "LogicalMatrix":
        a = np.asarray(a)
        if a.ndim == 1:
            a = a.reshape(-1, 1)
        if not np.isin(a, (0, 1)).all() or not (a.sum(axis=0) == 1).all():
            raise ValueError("not a logical matrix: need exactly one 1 per column")
        return cls.from_index(a.shape[0], a.argmax(axis=0))

    @property
    def cols(self) -> int:
        return int(self._idx.size)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    @property
    def index(self) -> np.ndarray:
        """0-based row index of the 1 in each column (read-only)."""
        return self._idx

    @property
    def delta(self) -> list[int]:
        return (self._idx + 1).tolist()

    def column(self, j: int) -> int:
        """1-based row of the 1 in 1-based column ``j``."""
        return int(self._idx[j - 1]) + 1

    def columns(self, start: int, stop: int) -> "LogicalMatrix":
        """Columns ``start..stop`` inclusive, 1-based."""
        return LogicalMatrix.from_index(self.rows, self._idx[start - 1:stop])

    def to_dense(self, dtype=np.int64) -> np.ndarray:
        out = np.zeros(self.shape, dtype=dtype)
        out[self._idx, np.arange(self.cols)] = 1
        return out

    def to_boolean(self) -> "BooleanMatrix":
        return BooleanMatrix(self.to_dense(bool))

    def transpose(self) -> "BooleanMatrix":
        return BooleanMatrix(self.to_dense(bool).T)

    @property
    def T(self) -> "BooleanMatrix":
        return self.transpose()

    def __matmul__(self, other):
        return stp(self, other)

    def __eq__(self, other):
        if isinstance(other, LogicalMatrix):
            return self.rows == other.rows and np.array_equal(self._idx, other._idx)
        if isinstance(other, BooleanMatrix):
            return self.to_boolean() == other
        return NotImplemented

    def __hash__(self):
        return hash((self.rows, self._idx.tobytes()))

    def __repr__(self):
        return self.to_text()

    # serialization -----------------------------------------------------

    def to_text(self) -> str:
        return f"delta({self.rows})[{' '.join(map(str, self.delta))}]"

    @classmethod
    def from_text(cls, text: str) -> "LogicalMatrix":
        m = re.fullmatch(r"\s*delta\((\d+)\)\[([\d\s,]*)\]\s*", text)
        if not m:
            raise ValueError(f"cannot parse logical matrix text: {text!r}")
        return cls(int(m.group(1)), [int(t) for t in re.split(r"[\s,]+", m.group(2).strip()) if t])

    def to_json(self) -> dict:
        return {"rows": self.rows, "cols": self.cols, "delta": self.delta}

    @classmethod
    def from_json(cls, obj: dict) -> "LogicalMatrix":
        mat = cls(obj["rows"], obj["delta"])
        if "cols" in obj and obj["cols"] != mat.cols:
            raise ValueError("cols does not match length of delta")
        return mat


class BooleanMatrix:
    """Dense 0/1 matrix backed by a read-only numpy bool array."""

    __slots__ = ("_data",)

    def __init__(self, data):
        a = np.array(data, dtype=bool)
        if a.ndim == 1:
            a = a.reshape(-1, 1)
        if a.ndim != 2:
            raise ValueError("BooleanMatrix needs 2-D data")
        self._data = _readonly(a)

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "BooleanMatrix":
        return cls(np.zeros((rows, cols), dtype=bool))

    @classmethod
    def ones(cls, rows: int, cols: int) -> "BooleanMatrix":
        return cls(np.ones((rows, cols), dtype=bool))

    @classmethod
    def identity(cls, n: int) -> "BooleanMatrix":
        return cls(np.eye(n, dtype=bool))

    @classmethod
    def from_column_sets(cls, rows: int, columns: Iterable[Iterable[int]]) -> "BooleanMatrix":
        cols = [list(c) for c in columns]
        out = np.zeros((rows, len(cols)), dtype=bool)
        for j, members in enumerate(cols):
            for i in members:
                if not 1 <= i <= rows:
                    raise ValueError(f"row {i} out of range [1, {rows}]")
                out[i - 1, j] = True
        return cls(out)

    @property
    def data(self) -> np.ndarray:
        return self._data

    @property
    def shape(self) -> tuple[int, int]:
        return self._data.shape

    @property
    def rows(self) -> int:
        return self._data.shape[0]

    @property
    def cols(self) -> int:
        return self._data.shape[1]

    def column_set(self, j: int) -> tuple[int, ...]:
        return tuple((np.flatnonzero(self._data[:, j - 1]) + 1).tolist())

    def column_sets(self) -> list[tuple[int, ...]]:
        return [self.column_set(j) for j in range(1, self.cols + 1)]

    def is_logical(self) -> bool:
        return bool((self._data.sum(axis=0) == 1).all())

    def to_logical(self) -> LogicalMatrix:
        if not self.is_logical():
            raise ValueError("matrix has a column without exactly one 1")
        return LogicalMatrix.from_index(self.rows, self._data.argmax(axis=0))

    @property
    def T(self) -> "BooleanMatrix":
        return BooleanMatrix(self._data.T)

    def __and__(self, other):
        return bool_and(self, other)

    def __or__(self, other):
        _same_shape(self, other)
        return BooleanMatrix(self._data | _as_bool(other))

    def __le__(self, other):
        return leq(self, other)

    def __ge__(self, other):
        return leq(other, self)

    def __matmul__(self, other):
        return bool_product(self, other)

    def __eq__(self, other):
        if isinstance(other, LogicalMatrix):
            other = other.to_boolean()
        if isinstance(other, BooleanMatrix):
            return self.shape == other.shape and np.array_equal(self._data, other._data)
        return NotImplemented

    def __hash__(self):
        return hash((self.shape, np.packbits(self._data).tobytes()))

    def __repr__(self):
        return self.to_delta_text()

    # serialization -----------------------------------------------------

    def to_delta_text(self) -> str:
        """Column-set notation, e.g. ``delta(8)[1+2 1 0 ...]`` (0 = empty column)."""
        cols = ["+".join(map(str, s)) if s else "0" for s in self.column_sets()]
        return f"delta({self.rows})[{' '.join(cols)}]"

    @classmethod
    def from_delta_text(cls, text: str) -> "BooleanMatrix":
        m = re.fullmatch(r"\s*delta\((\d+)\)\[(.*)\]\s*", text, flags=re.S)
        if not m:
            raise ValueError(f"cannot parse Boolean matrix text: {text!r}")
        rows = int(m.group(1))
        cols = []
        for tok in re.split(r"[\s,]+", m.group(2).strip()):
            if not tok:
                continue
            cols.append([] if tok == "0" else [int(t) for t in tok.split("+")])
        return cls.from_column_sets(rows, cols)

    def to_bitstrings(self) -> list[str]:
        return ["".join("1" if v else "0" for v in row) for row in self._data]

    @classmethod
    def from_bitstrings(cls, rows: Sequence[str]) -> "BooleanMatrix":
        if not rows:
            raise ValueError("need at least one row")
        width = len(rows[0])
        if any(len(r) != width or set(r) - {"0", "1"} for r in rows):
            raise ValueError("rows must be equal-length strings of 0/1")
        return cls(np.array([[c == "1" for c in r] for r in rows], dtype=bool))

    def to_json(self) -> dict:
        return {"rows": self.rows, "cols": self.cols, "bits": self.to_bitstrings()}

    @classmethod
    def from_json(cls, obj: dict) -> "BooleanMatrix":
        mat = cls.from_bitstrings(obj["bits"])
        if mat.shape != (obj["rows"], obj["cols"]):
            raise ValueError("declared shape does not match bits")
        return mat


class RationalMatrix:
    """Exact rational matrix: integer numerators over one shared denominator."""

    __slots__ = ("num", "den")

    def __init__(self, numerators, denominator: int = 1):
        num = np.array(numerators, dtype=object)
        if num.ndim == 1:
            num = num.reshape(-1, 1)
        den = int(denominator)
        if den == 0:
            raise ZeroDivisionError("denominator must be nonzero")
        if den < 0:
            num, den = -num, -den
        g = den
        for v in num.flat:
            g = math.gcd(g, int(v))
            if g == 1:
                break
        self.num = _readonly(num // g if g > 1 else num)
        self.den = den // g

    @classmethod
    def from_fractions(cls, rows) -> "RationalMatrix":
        a = np.array(rows, dtype=object)
        if a.ndim == 1:
            a = a.reshape(-1, 1)
        fr = [[Fraction(v) for v in row] for row in a]
        den = math.lcm(*(f.denominator for row in fr for f in row)) if a.size else 1
        return cls([[f.numerator * (den // f.denominator) for f in row] for row in fr], den)

    @property
    def shape(self) -> tuple[int, int]:
        return self.num.shape

    def to_fractions(self) -> np.ndarray:
        out = np.empty(self.shape, dtype=object)
        for ij, v in np.ndenumerate(self.num):
            out[ij] = Fraction(int(v), self.den)
        return out

    def __getitem__(self, key) -> "RationalMatrix":
        return RationalMatrix(self.num[key], self.den)

    def __add__(self, other: "RationalMatrix") -> "RationalMatrix":
        _same_shape(self, other)
        den = math.lcm(self.den, other.den)
        return RationalMatrix(self.num * (den // self.den) + other.num * (den // other.den), den)

    def scale(self, c) -> "RationalMatrix":
        c = Fraction(c)
        return RationalMatrix(self.num * c.numerator, self.den * c.denominator)

    def left_multiply(self, a) -> "RationalMatrix":
        """Exact ``a @ self`` for an integer or Boolean matrix ``a``."""
        a = _dense_int(a)
        if a.shape[1] != self.shape[0]:
            raise DimensionError(f"cannot multiply {a.shape} by {self.shape}")
        return RationalMatrix(a.astype(object) @ self.num, self.den)

    def __eq__(self, other):
        if not isinstance(other, RationalMatrix):
            return NotImplemented
        return self.shape == other.shape and self.den == other.den and np.array_equal(self.num, other.num)

    def __hash__(self):
        return hash((self.shape, self.den, tuple(self.num.flat)))

    def __repr__(self):
        return f"RationalMatrix({self.to_fractions().tolist()!r})"


# --------------------------------------------------------------------------
# helpers


def _same_shape(a, b):
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch: {a.shape} vs {b.shape}")


def _as_bool(a) -> np.ndarray:
    if isinstance(a, BooleanMatrix):
        return a.data
    if isinstance(a, LogicalMatrix):
        return a.to_dense(bool)
    arr = np.asarray(a)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    return arr.astype(bool)


def _dense_int(a) -> np.ndarray:
    if isinstance(a, LogicalMatrix):
        return a.to_dense()
    if isinstance(a, BooleanMatrix):
        return a.data.astype(np.int64)
    arr = np.asarray(a)
    return arr.reshape(-1, 1) if arr.ndim == 1 else arr


def _dense(a) -> np.ndarray:
    if isinstance(a, (LogicalMatrix, BooleanMatrix)):
        return _dense_int(a)
    if isinstance(a, RationalMatrix):
        return a.to_fractions()
    arr = np.asarray(a)
    return arr.reshape(-1, 1) if arr.ndim == 1 else arr


def delta(n: int, i: int) -> LogicalMatrix:
    """The unit column vector delta_n^i."""
    return LogicalMatrix(n, [i])


def ones(n: int) -> np.ndarray:
    return np.ones((n, 1), dtype=np.int64)


# --------------------------------------------------------------------------
# products


def stp(a, b):
    """Semi-tensor product ``(A (x) I_{s/n}) (B (x) I_{s/p})`` with s = lcm(n, p).

    Two logical operands give a LogicalMatrix; anything else is evaluated
    densely and returned as a numpy array (object dtype is kept, so Fraction
    entries stay exact).
    """
    if isinstance(a, LogicalMatrix) and isinstance(b, LogicalMatrix):
        n, p = a.cols, b.rows
        s = math.lcm(n, p)
        ra, rb = s // n, s // p
        # column l*rb + t of B(x)I selects row b[l]*rb + t, i.e. column y of A(x)I
        y = (b.index[:, None] * rb + np.arange(rb)[None, :]).reshape(-1)
        rows_out = a.index[y // ra] * ra + y % ra
        return LogicalMatrix.from_index(a.rows * ra, rows_out)
    A, B = _dense(a), _dense(b)
    n, p = A.shape[1], B.shape[0]
    s = math.lcm(n, p)
    left = A if s == n else np.kron(A, np.identity(s // n, dtype=np.int64))
    right = B if s == p else np.kron(B, np.identity(s // p, dtype=np.int64))
    return left @ right


def kron(a, b):
    """Kronecker product; logical operands stay logical."""
    if isinstance(a, LogicalMatrix) and isinstance(b, LogicalMatrix):
        idx = a.index[:, None] * b.rows + b.index[None, :]
        return LogicalMatrix.from_index(a.rows * b.rows, idx.reshape(-1))
    return np.kron(_dense(a), _dense(b))


def khatri_rao(a: LogicalMatrix, b: LogicalMatrix) -> LogicalMatrix:
    """Column-wise Kronecker product of two logical matrices."""
    if a.cols != b.cols:
        raise DimensionError(f"column counts differ: {a.cols} vs {b.cols}")
    return LogicalMatrix.from_index(a.rows * b.rows, a.index * b.rows + b.index)


def swap_matrix(m: int, n: int) -> LogicalMatrix:
    """W_[m,n], the permutation with W (x (x) y) = y (x) x for x in Delta_m, y in Delta_n."""
    j, t = np.divmod(np.arange(m * n), n)
    return LogicalMatrix.from_index(m * n, t * m + j)


def power_reducing(k: int) -> LogicalMatrix:
    """Phi_k with w (x) w = Phi_k w for every w in Delta_k."""
    i = np.arange(k)
    return LogicalMatrix.from_index(k * k, i * k + i)


def bool_product(a, b) -> BooleanMatrix:
    """Boolean matrix product: entry (i, j) is OR_k a(i, k) AND b(k, j)."""
    if isinstance(b, LogicalMatrix):
        A = _as_bool(a)
        if A.shape[1] != b.rows:
            raise DimensionError(f"cannot multiply {A.shape} by {b.shape}")
        return BooleanMatrix(A[:, b.index])
    A, B = _as_bool(a), _as_bool(b)
    if A.shape[1] != B.shape[0]:
        raise DimensionError(f"cannot multiply {A.shape} by {B.shape}")
    out = np.zeros((A.shape[0], B.shape[1]), dtype=bool)
    # chunk the inner dimension so float32 counts stay exact
    for lo in range(0, A.shape[1], _EXACT_F32):
        hi = lo + _EXACT_F32
        out |= (A[:, lo:hi].astype(np.float32) @ B[lo:hi].astype(np.float32)) > 0.5
    return BooleanMatrix(out)


def bool_power(a, k: int) -> BooleanMatrix:
    """``a`` Boolean-multiplied by itself k times (k = 0 gives the identity)."""
    A = BooleanMatrix(_as_bool(a))
    if A.rows != A.cols:
        raise DimensionError("bool_power needs a square matrix")
    result = BooleanMatrix.identity(A.rows)
    while k:
        if k & 1:
            result = bool_product(result, A)
        A = bool_product(A, A)
        k >>= 1
    return result


def sgn(a) -> BooleanMatrix:
    return BooleanMatrix((_dense(a) != 0).astype(bool))


def bool_and(a, b) -> BooleanMatrix:
    A, B = _as_bool(a), _as_bool(b)
    if A.shape != B.shape:
        raise DimensionError(f"shape mismatch: {A.shape} vs {B.shape}")
    return BooleanMatrix(A & B)


def leq(a, b) -> bool:
    """Entrywise ``a <= b``."""
    A, B = _dense(a), _dense(b)
    if A.shape != B.shape:
        raise DimensionError(f"shape mismatch: {A.shape} vs {B.shape}")
    return bool((A <= B).all())
