"""Message-passing decoders on Tanner graphs.

Node values in :class:`BpState` are ``0``/``1`` for known bits and ``-1``
for erased ones.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from ..attacks import ForgedCopy, Mode, erasures_from_average, unerased_bits
from ..ensembles import TannerGraph
from ..gf2 import BitWord
from .outcome import DecodeOutcome, Status, failed

ERASED = -1
LLR_CLAMP = 30.0


class Exhausted(Exception):
    """No variable node is left to guess."""


@dataclass(frozen=True)
class BpState:
    values: np.ndarray
    contradiction: bool = False
    guesses: tuple[int, ...] = field(default_factory=tuple)
    n_max: int = 0

    @property
    def erased(self) -> np.ndarray:
        return np.flatnonzero(self.values == ERASED)

    @property
    def solved(self) -> bool:
        return not self.contradiction and not (self.values == ERASED).any()


def _adjacency(graph: TannerGraph):
    return graph.adjacency_lists


def initial_state(graph: TannerGraph, y: ForgedCopy, n_max: int = 0) -> BpState:
    """Known transmitted bits from an averaged copy; erasures and punctured nodes unknown."""
    if y.mode is not Mode.AVERAGED:
        raise ValueError("peeling works on averaged copies")
    vals = np.full(graph.n_var, ERASED, dtype=np.int8)
    tx_vals = unerased_bits(y).astype(np.int8)
    tx_vals[erasures_from_average(y).erased] = ERASED
    vals[graph.transmitted] = tx_vals
    return BpState(vals, n_max=n_max)


def bp_peel(graph: TannerGraph, state: BpState) -> BpState:
    """Resolve checks with a single erased neighbour until none is left."""
    checks, var_checks = _adjacency(graph)
    vals = state.values.tolist()
    n_erased = [0] * len(checks)
    parity = [0] * len(checks)
    queue = []
    for j, nb in enumerate(checks):
        e = p = 0
        for v in nb:
            x = vals[v]
            if x < 0:
                e += 1
            else:
                p ^= x
        n_erased[j], parity[j] = e, p
        if e == 1:
            queue.append(j)
        elif e == 0 and p:
            return replace(state, contradiction=True)
    while queue:
        j = queue.pop()
        if n_erased[j] != 1:
            continue
        for v in checks[j]:
            if vals[v] < 0:
                break
        val = parity[j]
        vals[v] = val
        for c in var_checks[v]:
            n_erased[c] -= 1
            parity[c] ^= val
            if n_erased[c] == 1:
                queue.append(c)
            elif n_erased[c] == 0 and parity[c]:
                return replace(state, values=np.array(vals, dtype=np.int8), contradiction=True)
    return replace(state, values=np.array(vals, dtype=np.int8))


def peel_decode(graph: TannerGraph, y: ForgedCopy, codebook=None) -> DecodeOutcome:
    """Plain peeling, no guesses."""
    state = bp_peel(graph, initial_state(graph, y))
    if state.solved:
        return _success(graph, state, codebook, guesses=0)
    return failed(info={"residual": int(state.erased.size)})


def is_stopping_set(graph: TannerGraph, subset) -> bool:
    mask = np.zeros(graph.n_var, dtype=bool)
    mask[np.asarray(list(subset), dtype=np.intp)] = True
    if not mask.any():
        return True
    ec, ev = graph.edges
    inside = np.bincount(ec, weights=mask[ev], minlength=graph.n_check)
    return not (inside == 1).any()


def select_guess_node(graph: TannerGraph, erased, tried=(), rule: str = "chain") -> int:
    """Pick the variable node to fix next.

    ``rule="chain"`` prefers an erased accumulator node whose two chain
    neighbours are known, then an erased chain node on a check with exactly
    two erased neighbours.  ``rule="first"`` takes the first erased chain node.
    Chain nodes are scanned left to right; nodes in ``tried`` are skipped.
    """
    mask = np.zeros(graph.n_var, dtype=bool)
    mask[np.asarray(list(erased), dtype=np.intp)] = True
    chain = graph.chain if graph.chain is not None else graph.transmitted
    tried = set(int(v) for v in tried)
    er = mask[chain]
    if rule == "first":
        for v in chain[er].tolist():
            if v not in tried:
                return v
        raise Exhausted
    if rule != "chain":
        raise ValueError(f"unknown selection rule {rule!r}")
    if chain.size >= 3:
        isolated = np.flatnonzero(er[1:-1] & ~er[:-2] & ~er[2:]) + 1
        for i in isolated.tolist():
            v = int(chain[i])
            if v not in tried:
                return v
    ec, ev = graph.edges
    erased_per_check = np.bincount(ec, weights=mask[ev], minlength=graph.n_check)
    for v in chain[er].tolist():
        if v in tried:
            continue
        if (erased_per_check[graph.var_checks[v]] == 2).any():
            return v
    raise Exhausted


def modified_bp_decode(graph: TannerGraph, y: ForgedCopy, n_max: int, rule: str = "chain",
                       codebook=None) -> DecodeOutcome:
    """Peeling with single-node guesses that break the pirates' stopping set.

    Each guess sets one erased chain node to 1 and re-peels from the state
    left by the first peeling pass; up to ``n_max`` guesses are tried.
    """
    if y.t != 2:
        raise ValueError("guessing decoder handles two-pirate averaging")
    base = bp_peel(graph, initial_state(graph, y, n_max))
    if base.contradiction:
        return failed(info={"reason": "inconsistent input"})
    if base.solved:
        return _success(graph, base, codebook, guesses=0)
    tried: list[int] = []
    while len(tried) < n_max:
        try:
            node = select_guess_node(graph, base.erased, tried, rule)
        except Exhausted:
            break
        tried.append(node)
        vals = base.values.copy()
        vals[node] = 1
        attempt = bp_peel(graph, replace(base, values=vals, guesses=tuple(tried)))
        if attempt.solved:
            return _success(graph, attempt, codebook, guesses=len(tried))
    return failed(guesses=len(tried), info={"residual": int(base.erased.size)})


def _success(graph: TannerGraph, state: BpState, codebook, guesses: int) -> DecodeOutcome:
    vals = state.values.astype(np.uint8)
    word = BitWord.from_bits(vals[graph.transmitted])
    accused = codebook.index_from_variables(vals) if codebook is not None else None
    return DecodeOutcome(Status.IDENTIFIED, accused, 1, word=word, guesses=guesses)


def bp_bsc_decode(graph: TannerGraph, y: BitWord, crossover: float, max_iters: int,
                  codebook=None) -> DecodeOutcome:
    """Flooding sum-product decoding of ``y`` as a BSC output.

    Messages are log-likelihood ratios (positive favours 0) clamped to
    ``+-LLR_CLAMP``; punctured nodes start from a zero prior.
    """
    if not 0 < crossover < 0.5:
        raise ValueError("crossover must lie in (0, 1/2)")
    if y.length != graph.transmitted.size:
        raise ValueError("received word does not match the number of transmitted nodes")
    prior = min(np.log((1 - crossover) / crossover), LLR_CLAMP)
    ch = np.zeros(graph.n_var)
    ch[graph.transmitted] = np.where(y.bits() == 1, -prior, prior)
    ec, ev = graph.edges
    starts = np.flatnonzero(np.r_[True, ec[1:] != ec[:-1]])
    c2v = np.zeros(ec.size)
    total = ch.copy()
    hard = (total < 0).astype(np.uint8)
    it = 0
    while not _satisfied(graph, hard):
        if it == max_iters:
            return failed(iterations=it, word=BitWord.from_bits(hard[graph.transmitted]))
        it += 1
        v2c = total[ev] - c2v
        th = np.tanh(np.clip(v2c, -LLR_CLAMP, LLR_CLAMP) / 2)
        neg = th < 0
        logmag = np.log(np.maximum(np.abs(th), 1e-300))
        check_log = np.add.reduceat(logmag, starts)[ec]
        check_neg = np.add.reduceat(neg.astype(np.int64), starts)[ec]
        mag = np.exp(check_log - logmag)
        sign = np.where((check_neg - neg) & 1, -1.0, 1.0)
        c2v = np.clip(2 * np.arctanh(np.minimum(mag, 1 - 1e-16) * sign), -LLR_CLAMP, LLR_CLAMP)
        total = ch + np.bincount(ev, weights=c2v, minlength=graph.n_var)
        hard = (total < 0).astype(np.uint8)
    word = BitWord.from_bits(hard[graph.transmitted])
    accused = codebook.index_from_variables(hard) if codebook is not None else None
    return DecodeOutcome(Status.IDENTIFIED, accused, 1, word=word, iterations=it)


def _satisfied(graph: TannerGraph, hard: np.ndarray) -> bool:
    return not graph.syndrome(hard).any()
