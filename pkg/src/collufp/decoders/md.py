"""Exhaustive and algebraic minimum-distance style decoders."""

from __future__ import annotations

import math

import numpy as np

from ..analysis import TransitionMatrix
from ..attacks import ForgedCopy, Mode, erasures_from_average, unerased_bits
from ..ensembles import Codebook, CosetCodebook, Kind, LinearCodebook
from ..gf2 import BitWord, enumerate_solutions, pack_bits, solve_affine
from .outcome import DecodeOutcome, Status, failed

ENUMERATION_LIMIT = 1 << 12


def _require(y: ForgedCopy, mode: Mode) -> None:
    if y.mode is not mode:
        raise ValueError(f"decoder expects a {mode.value} forged copy, got {y.mode.value}")


def md_erasure_decode(codebook: Codebook, y: ForgedCopy) -> DecodeOutcome:
    """Accuse the lowest-index codeword that agrees with ``y`` off the erasures."""
    _require(y, Mode.AVERAGED)
    table = codebook.materialize()
    erased = erasures_from_average(y).mask()
    keep = pack_bits((~erased).astype(np.uint8))
    target = pack_bits(unerased_bits(y))
    match = (((table ^ target) & keep) == 0).all(axis=1)
    cands = np.flatnonzero(match)
    if cands.size == 0:
        return failed(info={"erasures": int(erased.sum())})
    status = Status.AMBIGUOUS if cands.size > y.t else Status.IDENTIFIED
    return DecodeOutcome(status, int(cands[0]), int(cands.size),
                         candidates=tuple(int(c) for c in cands),
                         info={"erasures": int(erased.sum())})


def syndrome_erasure_decode(codebook: LinearCodebook | CosetCodebook, y: ForgedCopy,
                            rng: np.random.Generator | None = None,
                            limit: int = ENUMERATION_LIMIT) -> DecodeOutcome:
    """Recover the erased pirate bits from the syndrome of the unerased ones.

    Exactly two solutions means both are the pirates and the lower user index
    is accused.  More than two is ambiguous and one enumerated solution is
    accused uniformly at random.
    """
    _require(y, Mode.AVERAGED)
    if y.t != 2:
        raise ValueError("syndrome decoding handles two-pirate averaging")
    if codebook.kind not in (Kind.LINEAR, Kind.COSET):
        raise ValueError("syndrome decoding needs a linear or coset codebook")
    pattern = erasures_from_average(y)
    bits = unerased_bits(y)
    if codebook.kind is Kind.COSET:
        bits = bits ^ codebook.key.bits()
    H = codebook.H
    kept, erased = pattern.kept, pattern.erased
    s = H.columns(kept).matvec(BitWord.from_bits(bits[kept]))
    H_e = H.columns(erased)
    sol = solve_affine(H_e, s)
    info = {"erasures": int(erased.size), "nullity": len(sol.nullspace_basis)}
    if not sol.consistent:
        return failed(info=info)

    def to_user(x_e: BitWord) -> int:
        full = bits.copy()
        full[erased] = x_e.bits()
        word = BitWord.from_bits(full)
        if codebook.kind is Kind.COSET:
            word = word + codebook.key
        return codebook.index_of(word)

    count = sol.solution_count
    users = sorted(to_user(x) for x in enumerate_solutions(sol, limit))
    if count <= 2:
        return DecodeOutcome(Status.IDENTIFIED, users[0], count, candidates=tuple(users), info=info)
    if rng is None:
        rng = np.random.default_rng(0)
    pick = users[int(rng.integers(len(users)))]
    return DecodeOutcome(Status.AMBIGUOUS, pick, count, candidates=tuple(users), info=info)


def md_hamming_decode(codebook: Codebook, y: ForgedCopy) -> DecodeOutcome:
    """Minimum Hamming distance; ties go to the lowest user index."""
    _require(y, Mode.BINARY)
    if isinstance(codebook, CosetCodebook):
        table = codebook.materialize_linear()
        target = (y.word + codebook.key).limbs
    else:
        table = codebook.materialize()
        target = y.word.limbs
    dist = np.bitwise_count(table ^ target).sum(axis=1)
    best = int(np.argmin(dist))
    ties = int((dist == dist[best]).sum())
    return DecodeOutcome(Status.IDENTIFIED, best, ties, info={"distance": int(dist[best])})


def likelihood_decode_avg(codebook: Codebook, y: ForgedCopy,
                          tm: TransitionMatrix) -> DecodeOutcome:
    """Maximum likelihood accusation under the per-position averaging channel.

    Zero-probability transitions disqualify a codeword outright.
    """
    _require(y, Mode.AVERAGED)
    if tm.t != y.t:
        raise ValueError(f"transition matrix is for t={tm.t}, copy has t={y.t}")
    probs = tm.as_array()
    with np.errstate(divide="ignore"):
        logp = np.log2(probs)
    a = logp[0][y.counts]  # codeword bit 0 (symbol -1)
    b = logp[1][y.counts]  # codeword bit 1 (symbol +1)
    must1 = np.isneginf(a)
    must0 = np.isneginf(b)
    if (must0 & must1).any():
        return failed()
    table = codebook.materialize()
    m1, m0 = pack_bits(must1.astype(np.uint8)), pack_bits(must0.astype(np.uint8))
    valid = (((table & m1) ^ m1) == 0).all(axis=1) & ((table & m0) == 0).all(axis=1)
    if not valid.any():
        return failed()
    free = ~(must0 | must1)
    base = float(a[free].sum()) + float(b[must1].sum()) + float(a[must0].sum())
    diff = np.where(free, b - a, 0.0)
    idx = np.flatnonzero(valid)
    scores = np.empty(idx.size)
    from ..gf2 import unpack_bits

    for lo in range(0, idx.size, 1 << 14):
        chunk = unpack_bits(table[idx[lo:lo + (1 << 14)]], codebook.n).astype(np.float64)
        scores[lo:lo + chunk.shape[0]] = chunk @ diff
    best = scores.max()
    winners = idx[scores == best]
    return DecodeOutcome(Status.IDENTIFIED, int(winners[0]), int(winners.size),
                         info={"log2_likelihood": base + float(best) if math.isfinite(best) else best})
