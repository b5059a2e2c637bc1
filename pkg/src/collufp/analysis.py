"""Closed-form quantities: entropies, rates, distance spectra, rank probabilities."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .ensembles import Codebook, Kind, LinearCodebook, DEFAULT_CAP, CodebookTooLarge
from .gf2 import count_rank_matrices


def entropy(pmf) -> float:
    """Shannon entropy in bits.  A scalar ``p`` means the pair ``(p, 1 - p)``."""
    p = np.atleast_1d(np.asarray(pmf, dtype=float))
    if p.size == 1:
        p = np.array([p[0], 1.0 - p[0]])
    if (p < 0).any() or abs(p.sum() - 1.0) > 1e-9:
        raise ValueError(f"not a probability vector: {pmf!r}")
    nz = p[p > 0]
    return float(-(nz * np.log2(nz)).sum())


def binary_entropy(p: float) -> float:
    return entropy(p)


def gv_distance(R: float, tol: float = 1e-10) -> float:
    """Root ``delta < 1/2`` of ``H(delta) = 1 - R``; zero for ``R >= 1``."""
    if R < 0:
        raise ValueError("rate must be nonnegative")
    if R >= 1:
        return 0.0
    if R == 0:
        return 0.5
    lo, hi, target = 0.0, 0.5, 1.0 - R
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if binary_entropy(mid) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class TransitionMatrix:
    """``P(Y | X)`` for a ``t``-pirate averaging attack.

    Row 0 is ``X = -1``, row 1 is ``X = +1``; column ``j`` is
    ``Y = (2j - t) / t``.  Entries are exact fractions.
    """

    t: int
    rows: tuple[tuple[Fraction, ...], tuple[Fraction, ...]]

    def as_array(self) -> np.ndarray:
        return np.array([[float(v) for v in r] for r in self.rows])

    def alphabet(self) -> list[Fraction]:
        return [Fraction(2 * j - self.t, self.t) for j in range(self.t + 1)]


def avg_transition_matrix(t: int) -> TransitionMatrix:
    if t < 2:
        raise ValueError("a coalition has at least two members")
    # the other t-1 pirates contribute Binomial(t-1, 1/2) ones
    others = [Fraction(math.comb(t - 1, i), 2 ** (t - 1)) for i in range(t)]
    minus = tuple(others + [Fraction(0)])
    plus = tuple([Fraction(0)] + others)
    return TransitionMatrix(t, (minus, plus))


def mutual_info_avg(t: int) -> float:
    """``I(X; Y)`` for uniform ``X`` through :func:`avg_transition_matrix`."""
    tm = avg_transition_matrix(t).as_array()
    joint = 0.5 * tm
    return entropy(joint.sum(axis=0)) - 0.5 * (entropy(tm[0]) + entropy(tm[1]))


def md_achievable_rate_avg(t: int) -> float:
    if t < 2:
        raise ValueError("a coalition has at least two members")
    return 1.0 / 2 ** (t - 1)


@dataclass(frozen=True)
class SpectrumEstimate:
    """Exact distance counts.

    ``pairs[d]`` is the number of unordered codeword pairs at distance ``d``;
    for linear codes ``per_word[d]`` is the number of codewords at distance
    ``d`` from any fixed codeword.
    """

    kind: Kind
    n: int
    M: int
    pairs: tuple[int, ...]
    per_word: tuple[int, ...] | None = None

    @property
    def rate(self) -> float:
        return math.log2(self.M) / self.n


def empirical_distance_spectrum(codebook: Codebook, cap: int = 1 << 14) -> SpectrumEstimate:
    n, M = codebook.n, codebook.M
    if isinstance(codebook, LinearCodebook):
        if M > DEFAULT_CAP:
            raise CodebookTooLarge(f"M={M} exceeds the codebook cap")
        weights = np.bitwise_count(codebook.materialize()).sum(axis=1)
        per = np.bincount(weights, minlength=n + 1)
        per[0] -= 1  # the zero word itself
        pairs = tuple(int(M) * int(c) // 2 for c in per)
        return SpectrumEstimate(codebook.kind, n, M, pairs, tuple(int(c) for c in per))
    if M > cap:
        raise CodebookTooLarge(f"all-pairs spectrum limited to M <= {cap}")
    table = codebook.materialize()
    counts = np.zeros(n + 1, dtype=np.int64)
    for i in range(1, M):
        d = np.bitwise_count(table[:i] ^ table[i]).sum(axis=1)
        counts += np.bincount(d, minlength=n + 1)
    return SpectrumEstimate(codebook.kind, n, M, tuple(int(c) for c in counts))


def spectrum_exponent(n: int, R: float, d: int) -> float:
    """Typical ``log2 S_c(d)`` for the i.i.d. ensemble: ``n(2R + H(d/n) - 1)``."""
    return n * (2 * R + binary_entropy(d / n) - 1)


def close_pair_prob_bound(n: int, R: float, eps: float) -> float:
    """Upper bound on the probability that two random users are not close."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    if not 0 < eps < 0.5:
        raise ValueError("eps must lie in (0, 1/2)")
    log2_bound = math.log2(n) + n * (2 * R - 1 + binary_entropy(0.5 + eps)) - 2 * n * R
    return 1.0 if log2_bound >= 0 else 2.0 ** log2_bound


def rank_deficiency_probability(l: int, e: int) -> float:
    """Probability that an ``l x e`` matrix of rank at most ``e - 1`` has rank below ``e - 1``."""
    if e < 1:
        raise ValueError("need at least one erased column")
    total = 1 << (l * e)
    denom = total - count_rank_matrices(l, e, e)
    if denom == 0:
        raise ValueError("every matrix is full rank")
    return float(1 - Fraction(count_rank_matrices(l, e, e - 1), denom))
