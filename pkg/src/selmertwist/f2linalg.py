"""Dense linear algebra over F_2 with rows packed into Python ints.

Bit ``j`` of a packed row is column ``j``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence


@dataclass(frozen=True)
class F2Vector:
    bits: int
    length: int

    @classmethod
    def from_list(cls, entries: Iterable[int]) -> "F2Vector":
        entries = list(entries)
        bits = 0
        for j, e in enumerate(entries):
            if e & 1:
                bits |= 1 << j
        return cls(bits, len(entries))

    def __getitem__(self, j: int) -> int:
        if not 0 <= j < self.length:
            raise IndexError(j)
        return (self.bits >> j) & 1

    def __len__(self) -> int:
        return self.length

    def __iter__(self):
        return (self[j] for j in range(self.length))

    def __add__(self, other: "F2Vector") -> "F2Vector":
        if self.length != other.length:
            raise ValueError("length mismatch")
        return F2Vector(self.bits ^ other.bits, self.length)

    def to_list(self) -> list[int]:
        return list(self)

    def split(self, k: int) -> tuple["F2Vector", "F2Vector"]:
        """Top ``k`` entries and the rest."""
        lo = self.bits & ((1 << k) - 1)
        return F2Vector(lo, k), F2Vector(self.bits >> k, self.length - k)

    def is_zero(self) -> bool:
        return self.bits == 0


class F2Matrix:
    __slots__ = ("rows", "nrows", "ncols")

    def __init__(self, rows: Sequence[int], ncols: int):
        mask = (1 << ncols) - 1
        if any(r & ~mask for r in rows):
            raise ValueError("row has bits beyond ncols")
        self.rows = tuple(rows)
        self.nrows = len(self.rows)
        self.ncols = ncols

    @classmethod
    def from_lists(cls, entries: Sequence[Sequence[int]], ncols: int | None = None) -> "F2Matrix":
        if ncols is None:
            ncols = len(entries[0]) if entries else 0
        rows = []
        for row in entries:
            if len(row) != ncols:
                raise ValueError("ragged matrix")
            rows.append(F2Vector.from_list(row).bits)
        return cls(rows, ncols)

    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> "F2Matrix":
        return cls([0] * nrows, ncols)

    @classmethod
    def identity(cls, n: int) -> "F2Matrix":
        return cls([1 << i for i in range(n)], n)

    @classmethod
    def diag(cls, entries: Sequence[int]) -> "F2Matrix":
        return cls([(e & 1) << i for i, e in enumerate(entries)], len(entries))

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        return (self.rows[i] >> j) & 1

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, F2Matrix)
            and self.ncols == other.ncols
            and self.rows == other.rows
        )

    def __hash__(self) -> int:
        return hash((self.rows, self.ncols))

    def __repr__(self) -> str:
        return f"F2Matrix({self.to_lists()})"

    @property
    def shape(self) -> tuple[int, int]:
        return self.nrows, self.ncols

    def to_lists(self) -> list[list[int]]:
        return [[(r >> j) & 1 for j in range(self.ncols)] for r in self.rows]

    def __add__(self, other: "F2Matrix") -> "F2Matrix":
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        return F2Matrix([a ^ b for a, b in zip(self.rows, other.rows)], self.ncols)

    def transpose(self) -> "F2Matrix":
        cols = [0] * self.ncols
        for i, r in enumerate(self.rows):
            j = 0
            while r:
                if r & 1:
                    cols[j] |= 1 << i
                r >>= 1
                j += 1
        return F2Matrix(cols, self.nrows)

    T = property(transpose)

    def apply(self, v: F2Vector) -> F2Vector:
        if v.length != self.ncols:
            raise ValueError("dimension mismatch")
        out = 0
        for i, r in enumerate(self.rows):
            if (r & v.bits).bit_count() & 1:
                out |= 1 << i
        return F2Vector(out, self.nrows)

    def __matmul__(self, other):
        if isinstance(other, F2Vector):
            return self.apply(other)
        if self.ncols != other.nrows:
            raise ValueError("dimension mismatch")
        rows = []
        for r in self.rows:
            acc = 0
            j = 0
            while r:
                if r & 1:
                    acc ^= other.rows[j]
                r >>= 1
                j += 1
            rows.append(acc)
        return F2Matrix(rows, other.ncols)

    def hstack(self, other: "F2Matrix") -> "F2Matrix":
        if self.nrows != other.nrows:
            raise ValueError("row count mismatch")
        return F2Matrix(
            [a | (b << self.ncols) for a, b in zip(self.rows, other.rows)],
            self.ncols + other.ncols,
        )

    def vstack(self, other: "F2Matrix") -> "F2Matrix":
        if self.ncols != other.ncols:
            raise ValueError("column count mismatch")
        return F2Matrix(self.rows + other.rows, self.ncols)

    def rank(self) -> int:
        return rank(self)

    def kernel(self) -> list[F2Vector]:
        return kernel_basis(self)


def _rref(rows: list[int], ncols: int) -> tuple[list[int], list[int]]:
    """Reduced row echelon form; pivots chosen at the lowest column index."""
    work = list(rows)
    pivots: list[int] = []
    r = 0
    for col in range(ncols):
        bit = 1 << col
        piv = next((i for i in range(r, len(work)) if work[i] & bit), None)
        if piv is None:
            continue
        work[r], work[piv] = work[piv], work[r]
        for i in range(len(work)):
            if i != r and work[i] & bit:
                work[i] ^= work[r]
        pivots.append(col)
        r += 1
        if r == len(work):
            break
    return work[:r], pivots


def rank(m: F2Matrix) -> int:
    return len(_rref(list(m.rows), m.ncols)[1])


def kernel_basis(m: F2Matrix) -> list[F2Vector]:
    """Basis of {v : Mv = 0}, one vector per free column in increasing order."""
    red, pivots = _rref(list(m.rows), m.ncols)
    pivot_set = set(pivots)
    basis = []
    for free in range(m.ncols):
        if free in pivot_set:
            continue
        v = 1 << free
        for row, pc in zip(red, pivots):
            if (row >> free) & 1:
                v |= 1 << pc
        basis.append(F2Vector(v, m.ncols))
    return basis


def concat_blocks(blocks: Sequence[Sequence[F2Matrix]]) -> F2Matrix:
    """Assemble a 2x2 (or any rectangular) grid of conformable blocks."""
    out = None
    for row in blocks:
        strip = row[0]
        for b in row[1:]:
            strip = strip.hstack(b)
        out = strip if out is None else out.vstack(strip)
    if out is None:
        raise ValueError("no blocks")
    return out


def span(vectors: Sequence[F2Vector], length: int) -> set[int]:
    """All packed elements of the span of ``vectors``."""
    elems = {0}
    for v in vectors:
        elems |= {e ^ v.bits for e in elems}
    return elems


def echelon_basis(vectors: Iterable[int]) -> list[int]:
    """Independent subset spanning the same space (packed ints)."""
    basis: list[int] = []
    reduced: list[int] = []
    for v in vectors:
        w = v
        for b in reduced:
            w = min(w, w ^ b)
        if w:
            basis.append(v)
            reduced.append(w)
            reduced.sort(reverse=True)
    return basis


def in_span(v: int, basis: Sequence[int]) -> bool:
    reduced: list[int] = []
    for b in basis:
        w = b
        for r in reduced:
            w = min(w, w ^ r)
        if w:
            reduced.append(w)
            reduced.sort(reverse=True)
    for r in reduced:
        v = min(v, v ^ r)
    return v == 0
