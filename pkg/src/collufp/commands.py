"""Operations shared by the command line and the HTTP service."""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import analysis, seeding
from .ensembles import Kind, gen_coset_code, gen_iid_codebook, gen_linear_code
from .gf2 import brute_force_rank_count, count_rank_matrices, full_rank_count
from .harness import ExperimentConfig, ResultTable, run_experiment

QUANTITIES = ("entropy", "gv", "rate", "mi", "rankprob")
BRUTE_LIMIT = 16  # l*m up to this is checked against exhaustive enumeration


def _need(name: str, value):
    if value is None:
        raise ValueError(f"missing parameter {name!r}")
    return value


def analyze(quantity: str, *, p: float | None = None, pmf=None, rate: float | None = None,
            t: int | None = None, l: int | None = None, e: int | None = None) -> float:
    if quantity == "entropy":
        if pmf is not None:
            return analysis.entropy(pmf)
        return analysis.binary_entropy(_need("p", p))
    if quantity == "gv":
        return analysis.gv_distance(_need("rate", rate))
    if quantity == "rate":
        return analysis.md_achievable_rate_avg(_need("t", t))
    if quantity == "mi":
        return analysis.mutual_info_avg(_need("t", t))
    if quantity == "rankprob":
        return analysis.rank_deficiency_probability(_need("l", l), _need("e", e))
    raise ValueError(f"unknown quantity {quantity!r}; choose from {', '.join(QUANTITIES)}")


def format_value(v: float, digits: int = 4) -> str:
    return f"{v:.{digits}g}"


@dataclass(frozen=True)
class RankRow:
    l: int
    m: int
    k: int
    count: int
    brute: int | None = None


def rank_table(lmax: int) -> tuple[list[RankRow], bool]:
    """All counts for ``1 <= m <= l <= lmax`` with an oracle verdict.

    Small shapes are compared with exhaustive enumeration; every shape must
    sum to ``2**(l*m)`` and agree with the full-rank product.
    """
    if lmax < 1:
        raise ValueError("lmax must be positive")
    rows, ok = [], True
    for l in range(1, lmax + 1):
        for m in range(1, l + 1):
            counts = [count_rank_matrices(l, m, k) for k in range(m + 1)]
            ok &= sum(counts) == 1 << (l * m)
            ok &= counts[m] == full_rank_count(m, l)
            for k, c in enumerate(counts):
                brute = brute_force_rank_count(l, m, k) if l * m <= BRUTE_LIMIT else None
                ok &= brute is None or brute == c
                rows.append(RankRow(l, m, k, c, brute))
    return rows, bool(ok)


@dataclass(frozen=True)
class SpectrumRow:
    d: int
    pairs: int
    exponent: float | None  # empirical log2 pairs / n
    predicted: float


def spectrum(ensemble: str, n: int, seed: int = 0, M: int | None = None,
             l: int | None = None) -> tuple[analysis.SpectrumEstimate, list[SpectrumRow]]:
    kind = Kind(ensemble)
    if kind is Kind.IID:
        cb = gen_iid_codebook(n, _need("M", M), seed)
    elif kind is Kind.LINEAR:
        cb = gen_linear_code(n, _need("l", l), seed)
    elif kind is Kind.COSET:
        cb = gen_coset_code(n, _need("l", l), seed, seeding.derive(seed, seeding.KEY))
    else:
        raise ValueError("spectrum supports iid, linear and coset ensembles")
    est = analysis.empirical_distance_spectrum(cb)
    R = est.rate
    rows = []
    for d, c in enumerate(est.pairs):
        emp = math.log2(c) / n if c else None
        rows.append(SpectrumRow(d, c, emp, analysis.spectrum_exponent(n, R, d) / n))
    return est, rows


def simulate(config: ExperimentConfig, jobs: int = 1) -> ResultTable:
    return run_experiment(config, jobs=jobs)
