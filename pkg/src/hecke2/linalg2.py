"""Dense linear algebra over GF(2).

Rows are stored as Python integers (bit ``j`` of a row is the entry in
column ``j``), so a row operation is one big-integer XOR.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

__all__ = ["BitMatrix", "Echelon", "SpanBasis", "echelonize", "solve", "kernel_basis", "rank"]


def _low(v: int) -> int:
    return (v & -v).bit_length() - 1


def vec_from_bits(bits: Iterable[int]) -> int:
    v = 0
    for j, b in enumerate(bits):
        if b & 1:
            v |= 1 << j
    return v


def vec_to_bits(v: int, n: int) -> list[int]:
    return [(v >> j) & 1 for j in range(n)]


class BitMatrix:
    """A ``rows x cols`` matrix over GF(2) with integer-packed rows."""

    __slots__ = ("nrows", "ncols", "_rows", "_frozen")

    def __init__(self, nrows: int, ncols: int, rows: Sequence[int] | None = None):
        if nrows < 0 or ncols < 0:
            raise ValueError("dimensions must be nonnegative")
        self.nrows = nrows
        self.ncols = ncols
        if rows is None:
            self._rows = [0] * nrows
        else:
            if len(rows) != nrows:
                raise ValueError(f"expected {nrows} rows, got {len(rows)}")
            mask = (1 << ncols) - 1
            if any(r < 0 or r & ~mask for r in rows):
                raise ValueError("row has entries outside the column range")
            self._rows = list(rows)
        self._frozen = False

    @classmethod
    def from_lists(cls, data: Sequence[Sequence[int]]) -> BitMatrix:
        nrows = len(data)
        ncols = len(data[0]) if nrows else 0
        return cls(nrows, ncols, [vec_from_bits(r) for r in data])

    @classmethod
    def from_numpy(cls, arr: np.ndarray) -> BitMatrix:
        arr = np.asarray(arr, dtype=np.uint8) & 1
        nrows, ncols = arr.shape
        rows = [int.from_bytes(np.packbits(r, bitorder="little").tobytes(), "little") for r in arr]
        return cls(nrows, ncols, rows)

    @classmethod
    def identity(cls, n: int) -> BitMatrix:
        return cls(n, n, [1 << i for i in range(n)])

    @classmethod
    def from_columns(cls, nrows: int, columns: Sequence[int]) -> BitMatrix:
        """Build from integer-packed columns (bit ``i`` of column ``j`` is entry ``(i, j)``)."""
        rows = [0] * nrows
        for j, c in enumerate(columns):
            while c:
                low = c & -c
                i = low.bit_length() - 1
                if i >= nrows:
                    raise ValueError("column has entries outside the row range")
                rows[i] |= 1 << j
                c ^= low
        return cls(nrows, len(columns), rows)

    def freeze(self) -> BitMatrix:
        self._frozen = True
        return self

    @property
    def rows(self) -> tuple[int, ...]:
        return tuple(self._rows)

    def copy(self) -> BitMatrix:
        return BitMatrix(self.nrows, self.ncols, self._rows)

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        self._check(i, j)
        return (self._rows[i] >> j) & 1

    def __setitem__(self, ij: tuple[int, int], value: int) -> None:
        if self._frozen:
            raise TypeError("matrix is frozen")
        i, j = ij
        self._check(i, j)
        if value & 1:
            self._rows[i] |= 1 << j
        else:
            self._rows[i] &= ~(1 << j)

    def _check(self, i: int, j: int) -> None:
        if not (0 <= i < self.nrows and 0 <= j < self.ncols):
            raise IndexError(f"({i}, {j}) outside {self.nrows}x{self.ncols}")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BitMatrix):
            return NotImplemented
        return (self.nrows, self.ncols, self._rows) == (other.nrows, other.ncols, other._rows)

    def __repr__(self) -> str:
        return f"BitMatrix({self.nrows}x{self.ncols})"

    def to_numpy(self) -> np.ndarray:
        out = np.zeros((self.nrows, self.ncols), dtype=np.uint8)
        for i, r in enumerate(self._rows):
            out[i] = vec_to_bits(r, self.ncols)
        return out

    def column(self, j: int) -> int:
        return sum(((r >> j) & 1) << i for i, r in enumerate(self._rows))

    def columns(self) -> list[int]:
        return self.transpose()._rows

    def transpose(self) -> BitMatrix:
        cols = [0] * self.ncols
        for i, r in enumerate(self._rows):
            while r:
                low = r & -r
                cols[low.bit_length() - 1] |= 1 << i
                r ^= low
        return BitMatrix(self.ncols, self.nrows, cols)

    def apply(self, x: int) -> int:
        """``M x`` for a column vector packed into an integer of ``ncols`` bits."""
        out = 0
        for i, r in enumerate(self._rows):
            if (r & x).bit_count() & 1:
                out |= 1 << i
        return out

    def __matmul__(self, other: BitMatrix) -> BitMatrix:
        if self.ncols != other.nrows:
            raise ValueError("dimension mismatch")
        out = []
        orows = other._rows
        for r in self._rows:
            acc = 0
            while r:
                low = r & -r
                acc ^= orows[low.bit_length() - 1]
                r ^= low
            out.append(acc)
        return BitMatrix(self.nrows, other.ncols, out)

    def __add__(self, other: BitMatrix) -> BitMatrix:
        if (self.nrows, self.ncols) != (other.nrows, other.ncols):
            raise ValueError("dimension mismatch")
        return BitMatrix(self.nrows, self.ncols, [a ^ b for a, b in zip(self._rows, other._rows)])

    def is_zero(self) -> bool:
        return not any(self._rows)

    def flatten(self) -> int:
        """All entries packed row-major into one integer."""
        out = 0
        for i, r in enumerate(self._rows):
            out |= r << (i * self.ncols)
        return out


@dataclass(frozen=True)
class Echelon:
    """Reduced row-echelon form.

    ``transform[i]`` is the set (bitmask over original row indices) of input
    rows whose sum is ``reduced.rows[i]``.
    """

    reduced: BitMatrix
    pivots: tuple[int, ...]
    transform: tuple[int, ...]

    @property
    def rank(self) -> int:
        return len(self.pivots)


def echelonize(m: BitMatrix) -> Echelon:
    """RREF with pivots taken at the lowest column, ties to the lowest row."""
    rows = list(m.rows)
    trans = [1 << i for i in range(m.nrows)]
    pivots: list[int] = []
    top = 0
    while top < len(rows):
        best_col, best_row = None, None
        for i in range(top, len(rows)):
            r = rows[i]
            if r:
                c = _low(r)
                if best_col is None or c < best_col:
                    best_col, best_row = c, i
        if best_col is None:
            break
        rows[top], rows[best_row] = rows[best_row], rows[top]
        trans[top], trans[best_row] = trans[best_row], trans[top]
        bit = 1 << best_col
        prow, ptrans = rows[top], trans[top]
        for i in range(len(rows)):
            if i != top and rows[i] & bit:
                rows[i] ^= prow
                trans[i] ^= ptrans
        pivots.append(best_col)
        top += 1
    return Echelon(BitMatrix(m.nrows, m.ncols, rows).freeze(), tuple(pivots), tuple(trans))


def rank(m: BitMatrix) -> int:
    return echelonize(m).rank


def solve(m: BitMatrix, rhs: int) -> int | None:
    """Some ``x`` with ``m x = rhs`` (free variables zero), or ``None``."""
    if rhs >> m.nrows:
        raise ValueError("right-hand side longer than the row count")
    aug = BitMatrix(m.nrows, m.ncols + 1, [r | (((rhs >> i) & 1) << m.ncols) for i, r in enumerate(m.rows)])
    ech = echelonize(aug)
    x = 0
    for row, piv in zip(ech.reduced.rows, ech.pivots):
        if piv == m.ncols:
            return None
        if (row >> m.ncols) & 1:
            x |= 1 << piv
    return x


def kernel_basis(m: BitMatrix) -> list[int]:
    """Basis of ``{x : m x = 0}``, one vector per free column, in column order."""
    ech = echelonize(m)
    pivset = set(ech.pivots)
    basis = []
    for j in range(m.ncols):
        if j in pivset:
            continue
        v = 1 << j
        for row, piv in zip(ech.reduced.rows, ech.pivots):
            if (row >> j) & 1:
                v |= 1 << piv
        basis.append(v)
    return basis


@dataclass
class SpanBasis:
    """Incrementally built echelon basis of a subspace of GF(2)^n.

    Each stored row has a distinct lowest set bit (its pivot) and remembers
    which inserted vectors it is the sum of, so membership tests also return
    coordinates with respect to the inserted generators.
    """

    rows: dict[int, int] = field(default_factory=dict)
    combos: dict[int, int] = field(default_factory=dict)
    count: int = 0

    def reduce(self, v: int) -> tuple[int, int]:
        """Return ``(residual, combo)`` with ``v = residual + sum(generators in combo)``.

        The residual is zero iff ``v`` lies in the span; otherwise its lowest
        bit is not a pivot.
        """
        combo = 0
        rows, combos = self.rows, self.combos
        while v:
            p = _low(v)
            r = rows.get(p)
            if r is None:
                break
            v ^= r
            combo ^= combos[p]
        return v, combo

    def add(self, v: int) -> bool:
        """Insert ``v`` if it is independent of the current span.

        Accepted vectors are numbered consecutively from 0; combos refer to
        those numbers.  Returns False (and numbers nothing) for dependent ``v``.
        """
        res, combo = self.reduce(v)
        if not res:
            return False
        p = _low(res)
        self.rows[p] = res
        self.combos[p] = combo ^ (1 << self.count)
        self.count += 1
        return True

    def normal_form(self, v: int) -> int:
        """Canonical representative of ``v`` modulo the span (a linear map)."""
        for p in sorted(self.rows):
            if (v >> p) & 1:
                v ^= self.rows[p]
        return v

    @property
    def dim(self) -> int:
        return len(self.rows)

    def contains(self, v: int) -> bool:
        return not self.reduce(v)[0]

    def basis(self) -> list[int]:
        return [self.rows[p] for p in sorted(self.rows)]
