"""Fingerprinting codebook ensembles.

All codebooks are lazy: ``codeword(u)`` is a pure function of the
construction parameters, the seed and the user index ``u`` (0-based).  The
whole table is only built by :meth:`Codebook.materialize`, and only when
``M`` is below a cap.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Sequence

import numpy as np

from .gf2 import (BitMatrix, BitWord, n_limbs, pack_bits, rank, row_reduce, solve_affine,
                  unpack_bits, _tail_mask)
from .seeding import MASK64, derive, splitmix64_array

DEFAULT_CAP = 1 << 20


class Kind(str, enum.Enum):
    IID = "iid"
    LINEAR = "linear"
    COSET = "coset"
    RA = "ra"
    PROTOGRAPH = "protograph"


class CodebookTooLarge(ValueError):
    pass


class TannerGraph:
    """Bipartite graph of variable and check nodes.

    ``transmitted`` lists the variable nodes carried by the codeword, in
    codeword order; the others are punctured.  ``chain`` is the ordered
    accumulator path (degree-2 variable nodes) when the code has one.
    """

    def __init__(self, n_var: int, checks: Sequence[Sequence[int]],
                 transmitted: Sequence[int] | None = None,
                 chain: Sequence[int] | None = None):
        self.n_var = n_var
        self.checks = tuple(np.asarray(c, dtype=np.intp) for c in checks)
        self.transmitted = (np.arange(n_var, dtype=np.intp) if transmitted is None
                            else np.asarray(transmitted, dtype=np.intp))
        self.chain = None if chain is None else np.asarray(chain, dtype=np.intp)

    @property
    def n_check(self) -> int:
        return len(self.checks)

    @cached_property
    def var_checks(self) -> tuple[np.ndarray, ...]:
        adj: list[list[int]] = [[] for _ in range(self.n_var)]
        for j, c in enumerate(self.checks):
            for v in c.tolist():
                adj[v].append(j)
        return tuple(np.asarray(a, dtype=np.intp) for a in adj)

    @cached_property
    def adjacency_lists(self) -> tuple[list[list[int]], list[list[int]]]:
        return [c.tolist() for c in self.checks], [c.tolist() for c in self.var_checks]

    @cached_property
    def edges(self) -> tuple[np.ndarray, np.ndarray]:
        """``(edge_check, edge_var)`` with edges grouped by check."""
        ec = np.concatenate([np.full(len(c), j, dtype=np.intp) for j, c in enumerate(self.checks)])
        ev = np.concatenate(self.checks) if self.checks else np.zeros(0, np.intp)
        return ec, ev

    @cached_property
    def chain_position(self) -> dict[int, int]:
        return {} if self.chain is None else {int(v): i for i, v in enumerate(self.chain)}

    def check_degrees(self) -> np.ndarray:
        return np.array([len(c) for c in self.checks], dtype=np.intp)

    def var_degrees(self) -> np.ndarray:
        return np.bincount(self.edges[1], minlength=self.n_var)

    def syndrome(self, values: np.ndarray) -> np.ndarray:
        ec, ev = self.edges
        return np.bincount(ec, weights=values[ev], minlength=self.n_check).astype(np.int64) & 1

    def parity_matrix(self) -> BitMatrix:
        dense = np.zeros((self.n_check, self.n_var), dtype=np.uint8)
        ec, ev = self.edges
        np.add.at(dense, (ec, ev), 1)
        return BitMatrix.from_array(dense & 1)


def _span_limbs(basis: np.ndarray, users: np.ndarray) -> np.ndarray:
    """XOR of ``basis[j]`` over the set bits ``j`` of each user index."""
    users = np.asarray(users, dtype=np.uint64)
    out = np.zeros((users.shape[0], basis.shape[1]), dtype=np.uint64)
    for j in range(basis.shape[0]):
        sel = ((users >> np.uint64(j)) & np.uint64(1)).astype(bool)
        out[sel] ^= basis[j]
    return out


class Codebook:
    """Maps user indices ``0..M-1`` to length-``n`` binary fingerprints."""

    kind: Kind

    def __init__(self, n: int, M: int, seed: int):
        if M < 2:
            raise ValueError("a codebook needs at least two users")
        self.n = n
        self.M = M
        self.seed = seed
        self._table: np.ndarray | None = None

    @property
    def rate(self) -> float:
        return math.log2(self.M) / self.n

    def codeword(self, u: int) -> BitWord:
        raise NotImplementedError

    def words(self, users: Sequence[int]) -> np.ndarray:
        """Packed codewords (one row per user)."""
        if not len(users):
            return np.zeros((0, n_limbs(self.n)), np.uint64)
        return np.stack([self.codeword(int(u)).limbs for u in users])

    def _all_words(self) -> np.ndarray:
        return self.words(np.arange(self.M, dtype=np.uint64))

    def materialize(self, cap: int = DEFAULT_CAP) -> np.ndarray:
        if self.M > cap:
            raise CodebookTooLarge(f"M={self.M} exceeds the codebook cap {cap}")
        if self._table is None:
            table = self._all_words()
            table.setflags(write=False)
            self._table = table
        return self._table

    def index_of(self, word: BitWord) -> int | None:
        """Lowest user index whose codeword equals ``word``."""
        table = self.materialize()
        hit = np.flatnonzero((table == word.limbs).all(axis=1))
        return int(hit[0]) if hit.size else None

    def __repr__(self) -> str:
        return f"{type(self).__name__}(n={self.n}, M={self.M}, seed={self.seed})"


class IIDCodebook(Codebook):
    kind = Kind.IID

    def __init__(self, n: int, M: int, seed: int):
        super().__init__(n, M, seed)
        self._base = np.uint64(derive(seed, 0x11D))

    def words(self, users) -> np.ndarray:
        if not isinstance(users, np.ndarray):
            users = [int(u) for u in users]
            if any(u > MASK64 for u in users):
                return np.concatenate([self._wide_word(u) if u > MASK64 else self.words([u])
                                       for u in users])
        users = np.asarray(users, dtype=np.uint64).reshape(-1)
        width = n_limbs(self.n)
        ctr = users[:, None] * np.uint64(width) + np.arange(width, dtype=np.uint64)[None, :]
        out = splitmix64_array(ctr ^ self._base)
        out[:, -1] &= _tail_mask(self.n)
        return out

    def _wide_word(self, u: int) -> np.ndarray:
        # indices past 64 bits are folded into one 64-bit key first
        chunks = []
        while u:
            chunks.append(u & MASK64)
            u >>= 64
        key = np.uint64(derive(int(self._base), 0x3DE, *chunks))
        out = splitmix64_array(np.arange(n_limbs(self.n), dtype=np.uint64) ^ key)
        out[-1] &= _tail_mask(self.n)
        return out[None, :]

    def codeword(self, u: int) -> BitWord:
        if not 0 <= u < self.M:
            raise IndexError(u)
        return BitWord(self.n, self.words([u])[0])


def gen_iid_codebook(n: int, M: int, seed: int) -> IIDCodebook:
    return IIDCodebook(n, M, seed)


class LinearCodebook(Codebook):
    """Null space of a random ``l x n`` parity-check matrix.

    User ``u`` is the codeword whose bits on the free columns of the reduced
    ``H`` spell ``u`` (bit ``j`` of ``u`` on the ``j``-th free column).
    """

    kind = Kind.LINEAR

    def __init__(self, n: int, l: int, seed: int, H: BitMatrix | None = None):
        if not 0 < l < n:
            raise ValueError("need 0 < l < n")
        if H is None:
            H = BitMatrix.random(l, n, np.random.default_rng(derive(seed, 0x11E)))
        self.H = H
        self.l = l
        reduced, pivots = row_reduce(H.limbs, n)
        dense = unpack_bits(reduced[: len(pivots)], n)
        pivot_set = set(pivots)
        self.free_cols = np.array([c for c in range(n) if c not in pivot_set], dtype=np.intp)
        basis = np.zeros((self.free_cols.size, n), dtype=np.uint8)
        for j, f in enumerate(self.free_cols):
            basis[j, f] = 1
            basis[j, pivots] = dense[:, f]
        self.basis = pack_bits(basis) if basis.size else np.zeros((0, n_limbs(n)), np.uint64)
        super().__init__(n, 1 << self.free_cols.size, seed)

    @property
    def dimension(self) -> int:
        return int(self.free_cols.size)

    def words(self, users) -> np.ndarray:
        return _span_limbs(self.basis, np.asarray(users, dtype=np.uint64).reshape(-1))

    def codeword(self, u: int) -> BitWord:
        if not 0 <= u < self.M:
            raise IndexError(u)
        return BitWord(self.n, _span_limbs(self.basis, np.array([u], np.uint64))[0])

    def is_codeword(self, word: BitWord) -> bool:
        return self.H.matvec(word).weight() == 0

    def index_of(self, word: BitWord) -> int | None:
        if not self.is_codeword(word):
            return None
        bits = word.bits()[self.free_cols]
        return int(sum(int(b) << j for j, b in enumerate(bits.tolist())))


def gen_linear_code(n: int, l: int, seed: int) -> LinearCodebook:
    return LinearCodebook(n, l, seed)


class CosetCodebook(Codebook):
    """``u G + k`` with a random ``(n-l) x n`` generator and a secret key word."""

    kind = Kind.COSET

    def __init__(self, n: int, l: int, seed: int, key_seed: int):
        if not 0 < l < n:
            raise ValueError("need 0 < l < n")
        self.l = l
        self.key_seed = key_seed
        self.G = BitMatrix.random(n - l, n, np.random.default_rng(derive(seed, 0xC05)))
        self.key = BitWord.from_bits(
            np.random.default_rng(derive(key_seed, 0x4E7)).integers(0, 2, n, dtype=np.uint8))
        super().__init__(n, 1 << (n - l), seed)
        self._linear_table: np.ndarray | None = None

    @cached_property
    def H(self) -> BitMatrix:
        """Parity checks of the underlying linear code (null space of ``G``)."""
        basis = solve_affine(self.G, BitWord.zeros(self.G.rows)).nullspace_basis
        return BitMatrix.from_rows(list(basis), self.n)

    def linear_words(self, users) -> np.ndarray:
        return _span_limbs(self.G.limbs, np.asarray(users, dtype=np.uint64).reshape(-1))

    def words(self, users) -> np.ndarray:
        return self.linear_words(users) ^ self.key.limbs

    def codeword(self, u: int) -> BitWord:
        if not 0 <= u < self.M:
            raise IndexError(u)
        return BitWord(self.n, self.words([u])[0])

    def materialize_linear(self, cap: int = DEFAULT_CAP) -> np.ndarray:
        """Codebook with the key removed."""
        if self.M > cap:
            raise CodebookTooLarge(f"M={self.M} exceeds the codebook cap {cap}")
        if self._linear_table is None:
            self._linear_table = self.linear_words(np.arange(self.M, dtype=np.uint64))
        return self._linear_table

    def index_of(self, word: BitWord) -> int | None:
        sol = solve_affine(self.G.transpose(), word + self.key)
        return sol.particular.to_int() if sol.consistent else None


def gen_coset_code(n: int, l: int, seed: int, key_seed: int) -> CosetCodebook:
    return CosetCodebook(n, l, seed, key_seed)


def ra_graph(k: int, q: int, interleaver: np.ndarray) -> TannerGraph:
    """Tanner graph of the non-systematic regular RA code.

    Variables ``0..n-1`` are the accumulator outputs (the codeword), variables
    ``n..n+k-1`` are the punctured information bits.  Check ``j`` ties
    ``p_j``, ``p_{j-1}`` and the information bit feeding position ``j``.
    """
    n = q * k
    info = n + np.asarray(interleaver, dtype=np.intp) // q
    checks = [[0, int(info[0])]]
    checks += [[j, j - 1, int(info[j])] for j in range(1, n)]
    return TannerGraph(n + k, checks, transmitted=np.arange(n), chain=np.arange(n))


def encode_ra(info: BitWord, q: int, interleaver: Sequence[int]) -> tuple[BitWord, TannerGraph]:
    """Repeat each bit ``q`` times, interleave, then accumulate."""
    perm = np.asarray(interleaver, dtype=np.intp)
    k = info.length
    if perm.shape != (q * k,) or not np.array_equal(np.sort(perm), np.arange(q * k)):
        raise ValueError(f"interleaver must be a permutation of length {q * k}")
    repeated = np.repeat(info.bits(), q)
    acc = np.bitwise_xor.accumulate(repeated[perm])
    return BitWord.from_bits(acc), ra_graph(k, q, perm)


class RACodebook(Codebook):
    kind = Kind.RA

    def __init__(self, k: int, q: int, seed: int, interleaver: Sequence[int] | None = None):
        if k < 1 or q < 1:
            raise ValueError("need k >= 1 and q >= 1")
        self.k = k
        self.q = q
        if interleaver is None:
            interleaver = np.random.default_rng(derive(seed, 0x4A)).permutation(q * k)
        self.interleaver = np.asarray(interleaver, dtype=np.intp)
        super().__init__(q * k, 1 << k, seed)

    @cached_property
    def graph(self) -> TannerGraph:
        return ra_graph(self.k, self.q, self.interleaver)

    def info_bits(self, u: int) -> np.ndarray:
        return BitWord.from_int(u, self.k).bits()

    def variable_values(self, u: int) -> np.ndarray:
        """All Tanner-graph variable values (accumulator outputs then info bits)."""
        info = self.info_bits(u)
        acc = np.bitwise_xor.accumulate(np.repeat(info, self.q)[self.interleaver])
        return np.concatenate([acc, info]).astype(np.uint8)

    def codeword(self, u: int) -> BitWord:
        if not 0 <= u < self.M:
            raise IndexError(u)
        return BitWord.from_bits(self.variable_values(u)[: self.n])

    def index_from_variables(self, values: np.ndarray) -> int:
        return BitWord.from_bits(values[self.n:]).to_int()

    def index_of(self, word: BitWord) -> int | None:
        p = word.bits().astype(np.uint8)
        diff = p ^ np.concatenate([[0], p[:-1]]).astype(np.uint8)
        repeated = np.empty_like(diff)
        repeated[self.interleaver] = diff
        per_user = repeated.reshape(self.k, self.q)
        if not (per_user == per_user[:, :1]).all():
            return None
        return BitWord.from_bits(per_user[:, 0]).to_int()


@dataclass(frozen=True)
class ProtographSpec:
    """Base matrix of edge multiplicities (check rows x variable columns)."""

    base: tuple[tuple[int, ...], ...]
    punctured: tuple[int, ...] = ()
    lift_default: int = 1
    name: str = ""

    def __post_init__(self):
        arr = self.matrix
        if arr.ndim != 2 or arr.size == 0 or (arr < 0).any():
            raise ValueError("base matrix must be a non-empty array of nonnegative integers")
        if any(not 0 <= p < arr.shape[1] for p in self.punctured):
            raise ValueError("punctured column out of range")

    @property
    def matrix(self) -> np.ndarray:
        return np.asarray(self.base, dtype=np.int64)

    @property
    def rows(self) -> int:
        return len(self.base)

    @property
    def cols(self) -> int:
        return len(self.base[0])

    @property
    def design_rate(self) -> float:
        return (self.cols - self.rows) / (self.cols - len(self.punctured))

    @classmethod
    def parse(cls, text: str, name: str = "") -> "ProtographSpec":
        lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
        lines = [ln for ln in lines if ln]
        rows, cols, lift = (int(v) for v in lines[0].split())
        body, punctured = lines[1:], ()
        if body and body[-1].startswith("puncture:"):
            punctured = tuple(int(v) for v in body[-1].split(":", 1)[1].split())
            body = body[:-1]
        if len(body) != rows:
            raise ValueError(f"expected {rows} base-matrix rows, found {len(body)}")
        base = tuple(tuple(int(v) for v in ln.split()) for ln in body)
        if any(len(r) != cols for r in base):
            raise ValueError(f"every base-matrix row needs {cols} entries")
        return cls(base, punctured, lift, name)

    @classmethod
    def load(cls, path: str | Path) -> "ProtographSpec":
        path = Path(path)
        return cls.parse(path.read_text(), name=path.stem)

    def dumps(self) -> str:
        out = [f"{self.rows} {self.cols} {self.lift_default}"]
        out += [" ".join(map(str, r)) for r in self.base]
        if self.punctured:
            out.append("puncture: " + " ".join(map(str, self.punctured)))
        return "\n".join(out) + "\n"


def builtin_protograph(rate: str) -> ProtographSpec:
    """Shipped base matrices: ``'1/8'``, ``'1/9'`` or ``'1/10'``."""
    from importlib import resources

    name = "rate_" + rate.replace("/", "_") + ".txt"
    res = resources.files("collufp.data").joinpath(name)
    if not res.is_file():
        raise ValueError(f"no built-in protograph for rate {rate!r}")
    text = res.read_text()
    return ProtographSpec.parse(text, name=name[:-4])


def disjoint_permutations(m: int, lift: int, rng: np.random.Generator) -> list[np.ndarray]:
    """``m`` random permutations with ``p_a[x] != p_b[x]`` for every ``x`` and ``a != b``.

    Each new permutation is drawn uniformly, then clashing entries are
    swapped with random partners until no clash remains.
    """
    if m > lift:
        raise ValueError("an edge multiplicity exceeds the lifting factor")
    if m == lift:
        shift = rng.permutation(lift)
        return [shift[(np.arange(lift) + a) % lift] for a in range(m)]
    perms: list[np.ndarray] = []
    for _ in range(m):
        p = rng.permutation(lift)
        taken = np.stack(perms) if perms else np.empty((0, lift), dtype=p.dtype)
        while True:
            clash = np.flatnonzero((taken == p).any(axis=0))
            if clash.size == 0:
                break
            for x in clash.tolist():
                z = int(rng.integers(lift))
                p[x], p[z] = p[z], p[x]
        perms.append(p)
    return perms


def lift_graph(spec: ProtographSpec, lift: int, seed: int) -> TannerGraph:
    """Copy-and-permute lifting.

    An entry of multiplicity ``m`` becomes ``m`` pairwise disjoint random
    permutations, so the lifted graph has no parallel edges.
    """
    base = spec.matrix
    if lift < 1:
        raise ValueError("lift must be >= 1")
    if base.max() > lift:
        raise ValueError("an edge multiplicity exceeds the lifting factor")
    rng = np.random.default_rng(derive(seed, 0x9207))
    checks: list[list[int]] = [[] for _ in range(spec.rows * lift)]
    idx = np.arange(lift)
    for r in range(spec.rows):
        for c in range(spec.cols):
            m = int(base[r, c])
            if not m:
                continue
            for perm in disjoint_permutations(m, lift, rng):
                targets = c * lift + perm
                for i, v in zip(idx.tolist(), targets.tolist()):
                    checks[r * lift + i].append(v)
    punct = set(spec.punctured)
    transmitted = [c * lift + i for c in range(spec.cols) if c not in punct for i in range(lift)]
    return TannerGraph(spec.cols * lift, checks, transmitted=transmitted)


class ProtographCodebook(Codebook):
    """Lifted protograph code with a systematic encoder from the reduced ``H``.

    Punctured columns are eliminated first, so the information (free)
    positions fall on transmitted variables whenever possible.
    """

    kind = Kind.PROTOGRAPH

    def __init__(self, spec: ProtographSpec, lift: int, seed: int):
        self.spec = spec
        self.lift = lift
        self.graph = lift_graph(spec, lift, seed)
        g = self.graph
        H = g.parity_matrix()
        punct = set(spec.punctured)
        order = [c * lift + i for c in spec.punctured for i in range(lift)]
        order += [v for v in range(g.n_var) if v // lift not in punct]
        reduced, pivots = row_reduce(H.limbs, g.n_var, order)
        self.pivots = np.asarray(pivots, dtype=np.intp)
        pivot_set = set(pivots)
        self.free_cols = np.array([v for v in range(g.n_var) if v not in pivot_set], dtype=np.intp)
        dense = unpack_bits(reduced[: len(pivots)], g.n_var)
        self._pivot_map = np.ascontiguousarray(dense[:, self.free_cols]).astype(np.uint8)
        super().__init__(g.transmitted.size, 1 << self.free_cols.size, seed)

    @property
    def dimension(self) -> int:
        return int(self.free_cols.size)

    def variable_values_from_info(self, info: np.ndarray) -> np.ndarray:
        x = np.zeros(self.graph.n_var, dtype=np.uint8)
        x[self.free_cols] = info
        x[self.pivots] = (self._pivot_map.astype(np.int64) @ info.astype(np.int64)) & 1
        return x

    def variable_values(self, u: int) -> np.ndarray:
        return self.variable_values_from_info(BitWord.from_int(u, self.dimension).bits())

    def random_user(self, rng: np.random.Generator) -> int:
        return BitWord.from_bits(rng.integers(0, 2, self.dimension, dtype=np.uint8)).to_int()

    def codeword(self, u: int) -> BitWord:
        if not 0 <= u < self.M:
            raise IndexError(u)
        return BitWord.from_bits(self.variable_values(u)[self.graph.transmitted])

    def index_from_variables(self, values: np.ndarray) -> int:
        return BitWord.from_bits(values[self.free_cols]).to_int()

    def index_of(self, word: BitWord) -> int | None:
        tx = self.graph.transmitted
        pos = np.full(self.graph.n_var, -1, dtype=np.intp)
        pos[tx] = np.arange(tx.size)
        if (pos[self.free_cols] < 0).any():
            raise NotImplementedError("information bits on punctured columns")
        u = BitWord.from_bits(word.bits()[pos[self.free_cols]]).to_int()
        return u if self.codeword(u) == word else None


def build_protograph_code(spec: ProtographSpec, lift: int, seed: int) -> ProtographCodebook:
    return ProtographCodebook(spec, lift, seed)
