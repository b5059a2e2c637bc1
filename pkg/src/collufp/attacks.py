"""Coalition strategies and the marking-assumption check.

Binary fingerprints map to antipodal symbols as ``b -> 2b - 1`` (bit 1 is
``+1``), so an averaged copy is stored as the per-position count of ones.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .gf2 import BitWord


class Mode(str, enum.Enum):
    AVERAGED = "averaged"
    BINARY = "binary"


@dataclass(frozen=True)
class Coalition:
    users: tuple[int, ...]
    words: tuple[BitWord, ...]

    def __post_init__(self):
        if len(self.users) < 2:
            raise ValueError("a coalition has at least two members")
        if len(set(self.users)) != len(self.users):
            raise ValueError("coalition members must be distinct")
        if len(self.words) != len(self.users):
            raise ValueError("one fingerprint per member")
        if len({w.length for w in self.words}) != 1:
            raise ValueError("fingerprints differ in length")

    @property
    def t(self) -> int:
        return len(self.users)

    @property
    def n(self) -> int:
        return self.words[0].length

    def bit_matrix(self) -> np.ndarray:
        return np.stack([w.bits() for w in self.words])


@dataclass(frozen=True)
class ForgedCopy:
    mode: Mode
    t: int
    counts: np.ndarray | None = None
    word: BitWord | None = None

    @property
    def n(self) -> int:
        return self.counts.shape[0] if self.mode is Mode.AVERAGED else self.word.length

    def values(self) -> np.ndarray:
        """Real-valued forged symbols ``(2c - t) / t``."""
        if self.mode is not Mode.AVERAGED:
            raise ValueError("only averaged copies have real symbols")
        return (2.0 * self.counts - self.t) / self.t


@dataclass(frozen=True)
class ErasurePattern:
    n: int
    erased: np.ndarray

    @property
    def kept(self) -> np.ndarray:
        mask = np.ones(self.n, dtype=bool)
        mask[self.erased] = False
        return np.flatnonzero(mask)

    def mask(self) -> np.ndarray:
        m = np.zeros(self.n, dtype=bool)
        m[self.erased] = True
        return m


def averaging_attack(coalition: Coalition) -> ForgedCopy:
    counts = coalition.bit_matrix().sum(axis=0).astype(np.int64)
    counts.setflags(write=False)
    return ForgedCopy(Mode.AVERAGED, coalition.t, counts=counts)


def erasures_from_average(y: ForgedCopy) -> ErasurePattern:
    if y.mode is not Mode.AVERAGED:
        raise ValueError("erasures are defined for averaged copies only")
    erased = np.flatnonzero((y.counts > 0) & (y.counts < y.t))
    return ErasurePattern(y.n, erased)


def unerased_bits(y: ForgedCopy) -> np.ndarray:
    """Hard bits of an averaged copy (meaningful only outside the erasures)."""
    return (y.counts == y.t).astype(np.uint8)


def detectable_positions(coalition: Coalition) -> np.ndarray:
    bits = coalition.bit_matrix()
    return np.flatnonzero((bits != bits[0]).any(axis=0))


def memoryless_marking_attack(coalition: Coalition, rng: np.random.Generator) -> ForgedCopy:
    """Fair coin on every detectable position, common bit elsewhere."""
    if coalition.t != 2:
        raise ValueError("the memoryless attack is defined for two pirates")
    y = coalition.words[0].bits().copy()
    det = detectable_positions(coalition)
    y[det] = rng.integers(0, 2, det.size, dtype=np.uint8)
    return ForgedCopy(Mode.BINARY, 2, word=BitWord.from_bits(y))


def xor3_attack(x1: BitWord, x2: BitWord, x3: BitWord) -> ForgedCopy:
    if not x1.length == x2.length == x3.length:
        raise ValueError("length mismatch")
    return ForgedCopy(Mode.BINARY, 3, word=x1 + x2 + x3)


def validate_marking(y: ForgedCopy, coalition: Coalition) -> bool:
    if y.mode is not Mode.BINARY:
        raise ValueError("the marking assumption is checked on binary copies")
    bits = coalition.bit_matrix()
    undetectable = (bits == bits[0]).all(axis=0)
    return bool((y.word.bits()[undetectable] == bits[0][undetectable]).all())


def coalition_of(codebook, users: Sequence[int]) -> Coalition:
    users = tuple(int(u) for u in users)
    return Coalition(users, tuple(codebook.codeword(u) for u in users))
