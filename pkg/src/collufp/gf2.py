"""Bit-packed linear algebra over GF(2) and exact rank counting.

Words are stored little-endian in ``uint64`` limbs: bit ``i`` lives in limb
``i // 64`` at position ``i % 64``.  Every object here is immutable after
construction.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Iterator, Sequence

import numba
import numpy as np

LIMB = 64


def n_limbs(length: int) -> int:
    return (length + LIMB - 1) // LIMB


def pack_bits(bits: np.ndarray) -> np.ndarray:
    """Pack a trailing axis of 0/1 values into uint64 limbs.

    Works on a 1-D word or a 2-D stack of words (one per row).
    """
    bits = np.asarray(bits, dtype=np.uint8)
    length = bits.shape[-1]
    width = n_limbs(length) * LIMB
    if width != length:
        pad = [(0, 0)] * (bits.ndim - 1) + [(0, width - length)]
        bits = np.pad(bits, pad)
    packed = np.packbits(bits, axis=-1, bitorder="little")
    return np.ascontiguousarray(packed).view("<u8").astype(np.uint64, copy=False)


def unpack_bits(limbs: np.ndarray, length: int) -> np.ndarray:
    limbs = np.ascontiguousarray(limbs, dtype="<u8")
    bits = np.unpackbits(limbs.view(np.uint8), axis=-1, bitorder="little")
    return bits[..., :length]


def _tail_mask(length: int) -> np.uint64:
    rem = length % LIMB
    return np.uint64((1 << rem) - 1) if rem else np.uint64(0xFFFFFFFFFFFFFFFF)


class BitWord:
    """A fixed-length binary word.  ``+`` and ``^`` are both modulo-2 addition."""

    __slots__ = ("length", "limbs")

    def __init__(self, length: int, limbs: np.ndarray):
        limbs = np.array(limbs, dtype=np.uint64).reshape(-1)
        if limbs.shape[0] != n_limbs(length):
            raise ValueError(f"{limbs.shape[0]} limbs cannot hold {length} bits")
        if length and limbs.shape[0]:
            limbs[-1] &= _tail_mask(length)
        limbs.setflags(write=False)
        self.length = length
        self.limbs = limbs

    @classmethod
    def zeros(cls, length: int) -> "BitWord":
        return cls(length, np.zeros(n_limbs(length), dtype=np.uint64))

    @classmethod
    def from_bits(cls, bits: Iterable[int]) -> "BitWord":
        arr = np.fromiter((int(b) & 1 for b in bits), dtype=np.uint8) if not isinstance(
            bits, np.ndarray) else (np.asarray(bits) & 1).astype(np.uint8)
        return cls(arr.shape[0], pack_bits(arr))

    @classmethod
    def from_str(cls, text: str) -> "BitWord":
        return cls.from_bits(int(ch) for ch in text if ch in "01")

    @classmethod
    def from_int(cls, value: int, length: int) -> "BitWord":
        """Bit ``i`` of the word is bit ``i`` of ``value``."""
        if value < 0 or value >> length:
            raise ValueError("value does not fit in the requested length")
        limbs = [(value >> (LIMB * j)) & 0xFFFFFFFFFFFFFFFF for j in range(n_limbs(length))]
        return cls(length, np.array(limbs, dtype=np.uint64))

    def to_int(self) -> int:
        out = 0
        for j, limb in enumerate(self.limbs.tolist()):
            out |= int(limb) << (LIMB * j)
        return out

    def bits(self) -> np.ndarray:
        return unpack_bits(self.limbs, self.length)

    def weight(self) -> int:
        return int(np.bitwise_count(self.limbs).sum())

    def distance(self, other: "BitWord") -> int:
        return (self + other).weight()

    def take(self, index: Sequence[int]) -> "BitWord":
        return BitWord.from_bits(self.bits()[np.asarray(index, dtype=np.intp)])

    def __len__(self) -> int:
        return self.length

    def __getitem__(self, i: int) -> int:
        if not 0 <= i < self.length:
            raise IndexError(i)
        return int((int(self.limbs[i // LIMB]) >> (i % LIMB)) & 1)

    def __add__(self, other: "BitWord") -> "BitWord":
        if not isinstance(other, BitWord):
            return NotImplemented
        if other.length != self.length:
            raise ValueError("length mismatch")
        return BitWord(self.length, self.limbs ^ other.limbs)

    __xor__ = __add__
    __sub__ = __add__

    def __eq__(self, other: object) -> bool:
        return (isinstance(other, BitWord) and other.length == self.length
                and bool(np.array_equal(self.limbs, other.limbs)))

    def __hash__(self) -> int:
        return hash((self.length, self.limbs.tobytes()))

    def __repr__(self) -> str:
        body = "".join(map(str, self.bits().tolist()))
        if len(body) > 48:
            body = body[:45] + "..."
        return f"BitWord({self.length}, '{body}')"


class BitMatrix:
    """Dense GF(2) matrix with row-major packed rows."""

    __slots__ = ("rows", "cols", "limbs")

    def __init__(self, rows: int, cols: int, limbs: np.ndarray):
        limbs = np.array(limbs, dtype=np.uint64).reshape(rows, n_limbs(cols))
        if rows and limbs.shape[1]:
            limbs[:, -1] &= _tail_mask(cols)
        limbs.setflags(write=False)
        self.rows = rows
        self.cols = cols
        self.limbs = limbs

    @classmethod
    def from_array(cls, dense) -> "BitMatrix":
        dense = np.asarray(dense, dtype=np.uint8) & 1
        if dense.ndim != 2:
            raise ValueError("expected a 2-D array")
        r, c = dense.shape
        return cls(r, c, pack_bits(dense) if r else np.zeros((0, n_limbs(c)), np.uint64))

    @classmethod
    def from_rows(cls, words: Sequence[BitWord], cols: int | None = None) -> "BitMatrix":
        if cols is None:
            cols = words[0].length if words else 0
        if any(w.length != cols for w in words):
            raise ValueError("row length mismatch")
        limbs = (np.stack([w.limbs for w in words]) if words
                 else np.zeros((0, n_limbs(cols)), np.uint64))
        return cls(len(words), cols, limbs)

    @classmethod
    def identity(cls, size: int) -> "BitMatrix":
        return cls.from_array(np.eye(size, dtype=np.uint8))

    @classmethod
    def random(cls, rows: int, cols: int, rng: np.random.Generator) -> "BitMatrix":
        return cls.from_array(rng.integers(0, 2, size=(rows, cols), dtype=np.uint8))

    def to_array(self) -> np.ndarray:
        return unpack_bits(self.limbs, self.cols)

    def row(self, i: int) -> BitWord:
        return BitWord(self.cols, self.limbs[i])

    def columns(self, index: Sequence[int]) -> "BitMatrix":
        """Submatrix made of the given columns; ``index`` must be a set of distinct columns."""
        idx = np.asarray(index, dtype=np.intp).reshape(-1)
        if np.unique(idx).shape[0] != idx.shape[0]:
            raise ValueError("duplicate column indices")
        if idx.size and (idx.min() < 0 or idx.max() >= self.cols):
            raise IndexError("column index out of range")
        idx = np.sort(idx)
        return BitMatrix.from_array(self.to_array()[:, idx]) if self.rows else BitMatrix(
            0, idx.size, np.zeros((0, n_limbs(idx.size)), np.uint64))

    def transpose(self) -> "BitMatrix":
        return BitMatrix.from_array(self.to_array().T)

    def matvec(self, v: BitWord) -> BitWord:
        if v.length != self.cols:
            raise ValueError("dimension mismatch")
        par = np.bitwise_count(self.limbs & v.limbs).sum(axis=1) & 1
        return BitWord.from_bits(par.astype(np.uint8))

    def __eq__(self, other: object) -> bool:
        return (isinstance(other, BitMatrix) and (self.rows, self.cols) == (other.rows, other.cols)
                and bool(np.array_equal(self.limbs, other.limbs)))

    def __repr__(self) -> str:
        return f"BitMatrix({self.rows}x{self.cols})"


@numba.njit(cache=True)
def _rref_kernel(work, cols, order):
    rows = work.shape[0]
    pivots = np.empty(min(rows, cols), dtype=np.int64)
    r = 0
    for k in range(order.shape[0]):
        if r == rows:
            break
        c = order[k]
        limb = c // 64
        bit = np.uint64(1) << np.uint64(c % 64)
        p = -1
        for i in range(r, rows):
            if work[i, limb] & bit:
                p = i
                break
        if p < 0:
            continue
        if p != r:
            for j in range(work.shape[1]):
                tmp = work[r, j]
                work[r, j] = work[p, j]
                work[p, j] = tmp
        for i in range(rows):
            if i != r and work[i, limb] & bit:
                for j in range(work.shape[1]):
                    work[i, j] ^= work[r, j]
        pivots[r] = c
        r += 1
    return pivots[:r]


def row_reduce(limbs: np.ndarray, cols: int, col_order: Sequence[int] | None = None):
    """Reduced row echelon form of packed rows.

    Returns ``(reduced, pivots)`` where ``pivots[i]`` is the pivot column of
    row ``i``.  Pivot rows are chosen as the lowest-index candidate.  Columns
    are visited in ``col_order`` (default ascending).
    """
    work = np.array(limbs, dtype=np.uint64, copy=True).reshape(-1, n_limbs(cols))
    order = np.arange(cols, dtype=np.int64) if col_order is None else np.asarray(
        col_order, dtype=np.int64)
    if work.shape[0] == 0 or order.size == 0:
        return work, []
    pivots = _rref_kernel(work, cols, order)
    return work, pivots.tolist()


def rank(m: BitMatrix) -> int:
    if m.rows == 0 or m.cols == 0:
        return 0
    return len(row_reduce(m.limbs, m.cols)[1])


@dataclass(frozen=True)
class SolutionSet:
    """Solutions of ``A x = s``: ``particular + span(nullspace_basis)``.

    ``particular`` is ``None`` when the system is inconsistent.
    """

    cols: int
    particular: BitWord | None
    nullspace_basis: tuple[BitWord, ...] = field(default_factory=tuple)

    @property
    def consistent(self) -> bool:
        return self.particular is not None

    @property
    def solution_count(self) -> int:
        return 1 << len(self.nullspace_basis) if self.consistent else 0


def solve_affine(a: BitMatrix, s: BitWord) -> SolutionSet:
    if s.length != a.rows:
        raise ValueError(f"right-hand side has {s.length} bits, matrix has {a.rows} rows")
    n = a.cols
    if a.rows == 0:
        particular = BitWord.zeros(n)
        basis = tuple(BitWord.from_int(1 << j, n) for j in range(n))
        return SolutionSet(n, particular, basis)
    aug = np.concatenate([a.to_array(), s.bits()[:, None]], axis=1)
    reduced, pivots = row_reduce(pack_bits(aug), n + 1)
    if pivots and pivots[-1] == n:
        return SolutionSet(n, None, ())
    dense = unpack_bits(reduced[: len(pivots)], n + 1)
    x = np.zeros(n, dtype=np.uint8)
    x[pivots] = dense[:, n]
    pivot_set = set(pivots)
    basis = []
    for f in range(n):
        if f in pivot_set:
            continue
        v = np.zeros(n, dtype=np.uint8)
        v[f] = 1
        v[pivots] = dense[:, f]
        basis.append(BitWord.from_bits(v))
    return SolutionSet(n, BitWord.from_bits(x), tuple(basis))


def nullspace(m: BitMatrix) -> list[BitWord]:
    return list(solve_affine(m, BitWord.zeros(m.rows)).nullspace_basis)


def iter_solutions(ss: SolutionSet) -> Iterator[BitWord]:
    """Gray-code walk over all solutions, starting at the particular solution."""
    if not ss.consistent:
        return
    cur = ss.particular
    yield cur
    for i in range(1, ss.solution_count):
        cur = cur + ss.nullspace_basis[(i & -i).bit_length() - 1]
        yield cur


def enumerate_solutions(ss: SolutionSet, limit: int) -> list[BitWord]:
    return list(itertools.islice(iter_solutions(ss), limit))


@lru_cache(maxsize=None)
def full_rank_count(rows: int, cols: int) -> int:
    """Number of ``rows x cols`` binary matrices of rank ``rows``."""
    out = 1
    for p in range(rows):
        out *= (1 << cols) - (1 << p)
    return out


@lru_cache(maxsize=None)
def count_rank_matrices(l1: int, m1: int, k1: int) -> int:
    """Exact number of ``l1 x m1`` binary matrices of rank ``k1``.

    Rows are added one at a time: a new row either falls in the current
    row space (``2**k`` ways) or raises the rank by one (``2**m1 - 2**(k-1)``
    ways), with the full-rank product closing the recursion.
    """
    if k1 < 0 or k1 > min(l1, m1):
        return 0
    if k1 == 0:
        return 1
    if k1 == l1:
        return full_rank_count(l1, m1)
    return (count_rank_matrices(l1 - 1, m1, k1) * (1 << k1)
            + count_rank_matrices(l1 - 1, m1, k1 - 1) * ((1 << m1) - (1 << (k1 - 1))))


def _int_rank(rows: Sequence[int]) -> int:
    by_lead: dict[int, int] = {}
    for r in rows:
        while r:
            lead = r.bit_length() - 1
            if lead not in by_lead:
                by_lead[lead] = r
                break
            r ^= by_lead[lead]
    return len(by_lead)


def brute_force_rank_count(l1: int, m1: int, k1: int) -> int:
    """Count ``l1 x m1`` matrices of rank ``k1`` by visiting every matrix."""
    if l1 * m1 > 25:
        raise ValueError("brute force limited to l1*m1 <= 25")
    return sum(1 for rows in itertools.product(range(1 << m1), repeat=l1)
               if _int_rank(rows) == k1)
