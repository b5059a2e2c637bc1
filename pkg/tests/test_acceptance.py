"""End-to-end acceptance checks.

Each test records one ``PASS``/``FAIL`` line (printed in the terminal summary)
and then asserts the same condition.  Run just this module with
``pytest tests/test_acceptance.py -v``.
"""

import math
from dataclasses import replace

import numba
import numpy as np
import pytest

from collufp import seeding
from collufp.analysis import (binary_entropy, close_pair_prob_bound, empirical_distance_spectrum,
                              gv_distance, md_achievable_rate_avg, mutual_info_avg,
                              rank_deficiency_probability, spectrum_exponent)
from collufp.attacks import averaging_attack, coalition_of, xor3_attack
from collufp.decoders import (bp_peel, initial_state, is_stopping_set, md_erasure_decode,
                              peel_decode, syndrome_erasure_decode)
from collufp.ensembles import RACodebook, gen_iid_codebook, gen_linear_code
from collufp.gf2 import brute_force_rank_count, count_rank_matrices, full_rank_count
from collufp.harness import (ExperimentConfig, apply_attack, draw_coalition, make_codebook,
                             run_experiment)

LINES: list[str] = []

pytestmark = pytest.mark.acceptance


def verdict(label: str, ok: bool, detail: str) -> None:
    LINES.append(f"{'PASS' if ok else 'FAIL'}  {label}: {detail}")
    assert ok, detail


def cfg(text: str) -> ExperimentConfig:
    return ExperimentConfig.parse(text)


def nonincreasing(rows) -> tuple[bool, list[float]]:
    """Each step may rise by at most two standard errors of the difference."""
    slack = []
    for a, b in zip(rows, rows[1:]):
        se = math.hypot(a.stderr, b.stderr)
        slack.append(b.pm - a.pm - 2 * se)
    return all(s <= 1e-12 for s in slack), slack


def fmt_rows(rows) -> str:
    return ", ".join(f"n={r.n} p={r.pm:.3f}±{r.stderr:.3f}" for r in rows)


# 1 -------------------------------------------------------------------------

def test_rank_counts_exact():
    bad = []
    for l in range(1, 5):
        for e in range(1, l + 1):
            for k in range(e + 1):
                if count_rank_matrices(l, e, k) != brute_force_rank_count(l, e, k):
                    bad.append(("brute", l, e, k))
            # one rank short of full, via the (e-1) x l full-rank count
            lhs = count_rank_matrices(l, e, e - 1)
            if lhs != count_rank_matrices(e - 1, l, e - 1) * ((1 << e) - 1):
                bad.append(("minus1", l, e))
            for j in range(e):
                prod = math.prod((1 << l) - (1 << p) for p in range(e - j))
                if count_rank_matrices(e - j, l, e - j) != prod or full_rank_count(e - j, l) != prod:
                    bad.append(("full", l, e, j))
    verdict("1 rank counts", not bad, f"l<=4, mismatches={bad}")


# 2 -------------------------------------------------------------------------

@numba.njit(cache=True)
def _ranks_12(mats):
    out = np.empty(mats.shape[0], dtype=np.int8)
    rows = np.empty(mats.shape[1], dtype=np.uint16)
    for i in range(mats.shape[0]):
        rows[:] = mats[i]
        r = 0
        for bit in range(12):
            piv = -1
            for j in range(r, rows.size):
                if (rows[j] >> bit) & 1:
                    piv = j
                    break
            if piv < 0:
                continue
            rows[r], rows[piv] = rows[piv], rows[r]
            for j in range(rows.size):
                if j != r and (rows[j] >> bit) & 1:
                    rows[j] ^= rows[r]
            r += 1
        out[i] = r
    return out


def test_rank_deficiency_monte_carlo():
    l, e, want = 20, 12, 100_000
    p = rank_deficiency_probability(l, e)
    rng = np.random.default_rng(2)
    ranks = []
    got = 0
    # uniform over rank-deficient matrices, by rejection
    while got < want:
        mats = rng.integers(0, 1 << e, size=(2_000_000, l), dtype=np.uint16)
        r = _ranks_12(mats)
        r = r[r < e]
        ranks.append(r)
        got += r.size
    ranks = np.concatenate(ranks)[:want]
    p_hat = float(np.mean(ranks < e - 1))
    se = math.sqrt(p * (1 - p) / want)
    z = (p_hat - p) / se
    verdict("2 rank deficiency", abs(z) <= 3,
            f"empirical {p_hat:.6f} vs {p:.6f} (se {se:.6f}, z={z:+.2f}) over {want} matrices")


# 3 -------------------------------------------------------------------------

def test_iid_erasure_achievability_and_converse():
    base = "ensemble = iid\nattack = averaging\ndecoder = md_erasure\ntrials = 200\n"
    good = run_experiment(cfg(base + "n = 48\nM = 16384\nseed = 3\n")).rows[0]
    bad = run_experiment(cfg(base + "n = 30\nM = 262144\nseed = 3\n")).rows[0]
    ok = good.pm <= 0.05 and bad.pm >= 0.10
    verdict("3 iid md_erasure", ok,
            f"n=48 R={good.rate:.3f} p={good.pm:.3f} (<=0.05); "
            f"n=30 R={bad.rate:.3f} p={bad.pm:.3f} (>=0.10)")


# 4 -------------------------------------------------------------------------

def test_erasure_and_syndrome_agree():
    n, l, trials = 40, 24, 500
    same = 0
    for trial in range(trials):
        seed = seeding.trial_seed(4, trial)
        cb = gen_linear_code(n, l, seeding.derive(seed, seeding.CODEBOOK))
        users = draw_coalition(seeding.rng_for(seed, seeding.COALITION), cb.M, 2)
        y = averaging_attack(coalition_of(cb, users))
        a = md_erasure_decode(cb, y)
        b = syndrome_erasure_decode(cb, y, seeding.rng_for(seed, seeding.DECODER))
        if a.candidate_count == b.candidate_count and set(a.candidates) == set(b.candidates):
            same += 1
    verdict("4 md_erasure == syndrome", same == trials, f"{same}/{trials} identical candidate sets")


# 5 -------------------------------------------------------------------------

def test_marking_hamming():
    base = "attack = marking\ndecoder = md_hamming\nn = 96\ntrials = 200\nseed = 5\n"
    configs = {"iid": cfg(base + "ensemble = iid\nM = 16384\n"),
               "coset": cfg(base + "ensemble = coset\nl = 82\n")}
    pms, nearest, per_pirate = {}, [], []
    for name, c in configs.items():
        pms[name] = run_experiment(c).rows[0].pm
        point = c.points()[0]
        for trial in range(c.trials):
            seed = seeding.trial_seed(c.seed, trial)
            cb = make_codebook(point, seed)
            users = draw_coalition(seeding.rng_for(seed, seeding.COALITION), cb.M, 2)
            co = coalition_of(cb, users)
            y = apply_attack(point, co, seeding.rng_for(seed, seeding.ATTACK)).word
            d = [y.distance(w) / point.n[0] for w in co.words]
            nearest.append(min(d))
            per_pirate.extend(d)
    mean_near = float(np.mean(nearest))
    ok = max(pms.values()) <= 0.10 and abs(mean_near - 0.25) <= 0.02
    verdict("5 marking + md_hamming", ok,
            f"p iid={pms['iid']:.3f} coset={pms['coset']:.3f} (<=0.10); "
            f"nearest-pirate distance {mean_near:.4f} (0.25±0.02); "
            f"per-pirate distance {np.mean(per_pirate):.4f}")


# 6 -------------------------------------------------------------------------

def test_three_pirates_defeat_minimum_distance():
    n, trials = 1000, 200
    dist = np.zeros((trials, 3))
    for trial in range(trials):
        seed = seeding.trial_seed(6, trial)
        cb = gen_iid_codebook(n, 1 << 20, seed)
        users = draw_coalition(seeding.rng_for(seed, seeding.COALITION), cb.M, 3)
        words = coalition_of(cb, users).words
        y = xor3_attack(*words).word
        dist[trial] = [y.distance(w) / n for w in words]
    means = dist.mean(axis=0)
    row = run_experiment(cfg("ensemble = iid\nattack = xor3\ndecoder = md_hamming\nt = 3\n"
                             "n = 60\nM = 4096\ntrials = 200\nseed = 6\n")).rows[0]
    ok = bool(np.all((means >= 0.47) & (means <= 0.53))) and row.pm >= 0.5
    verdict("6 xor3", ok,
            f"mean distances {np.round(means, 4).tolist()} in [0.47, 0.53]; "
            f"md_hamming n=60 p={row.pm:.3f} (>=0.5)")


# 7 -------------------------------------------------------------------------

def test_pirate_difference_is_stopping_set():
    trials, stop_ok, peel_ok = 100, 0, 0
    for trial in range(trials):
        seed = seeding.trial_seed(7, trial)
        cb = RACodebook(256, 3, seeding.derive(seed, seeding.CODEBOOK))
        users = draw_coalition(seeding.rng_for(seed, seeding.COALITION), cb.M, 2)
        vals = [cb.variable_values(u) for u in users]
        vd = np.flatnonzero(vals[0] != vals[1])
        stop_ok += is_stopping_set(cb.graph, vd)
        y = averaging_attack(coalition_of(cb, users))
        peel_ok += peel_decode(cb.graph, y, cb).failed == (vd.size > 0)
    ok = stop_ok == trials and peel_ok == trials
    verdict("7 stopping set", ok,
            f"V_d stopping set {stop_ok}/{trials}; peeling fails iff V_d nonempty {peel_ok}/{trials}")


# 8 -------------------------------------------------------------------------

def test_modified_bp_trend():
    sweep = cfg("ensemble = ra\nq = 3\nattack = averaging\ndecoder = modified_bp\n"
                "n = 768, 1536, 3072\nn_max = 8\nrule = chain\ntrials = 100\nseed = 8\n")
    rows = run_experiment(sweep).rows
    plain = run_experiment(replace(sweep, n=(3072,), n_max=1, rule="first")).rows[0]
    mono, slack = nonincreasing(rows)
    results = [r for row in rows for r in row.results]
    successes = [r for r in results if r.accused is not None]
    pirate_out = all(r.pirate_word for r in successes)
    last = rows[-1]
    ok = last.pm <= 0.05 and plain.pm > last.pm and mono and pirate_out
    verdict("8 modified BP", ok,
            f"{fmt_rows(rows)}; N_max=1 first-node p={plain.pm:.3f} (> {last.pm:.3f}); "
            f"monotone slack {[round(s, 3) for s in slack]}; "
            f"pirate outputs {sum(bool(r.pirate_word) for r in successes)}/{len(successes)}")


# 9 -------------------------------------------------------------------------

def test_marking_bsc_bp_trend():
    sweep = cfg("ensemble = protograph\nprotograph = 1/9\nlift = 64, 128, 256\n"
                "attack = marking\ndecoder = bp_bsc\nmax_iters = 60\ncrossover = 0.25\n"
                "trials = 100\nseed = 9\n")
    rows = run_experiment(sweep).rows
    mono, slack = nonincreasing(rows)
    ok = [r.n for r in rows] == [1152, 2304, 4608] and mono and rows[-1].pm <= 0.10
    verdict("9 BSC BP", ok,
            f"rate {rows[0].rate:.4f}; {fmt_rows(rows)}; monotone slack "
            f"{[round(s, 3) for s in slack]}")


# 10 ------------------------------------------------------------------------

def test_closed_forms():
    cap = 1 - binary_entropy(0.25)
    mi3 = mutual_info_avg(3)
    rates = [md_achievable_rate_avg(t) for t in (2, 3, 4)]
    gv = gv_distance(1.2)
    ok = (abs(cap - 0.18872) <= 1e-4 and abs(mi3 - 0.3113) <= 1e-3
          and rates == [0.5, 0.25, 0.125] and gv == 0)
    verdict("10 closed forms", ok,
            f"1-H(1/4)={cap:.5f} I3={mi3:.4f} rates={rates} gv(1.2)={gv}")


# 11 ------------------------------------------------------------------------

def test_spectrum_concentration():
    n, M, seeds = 24, 64, 50
    R = math.log2(M) / n
    delta = gv_distance(2 * R)
    interior = [d for d in range(n + 1) if n * delta < d < n * (1 - delta)]
    hits = np.zeros((seeds, len(interior)), dtype=bool)
    for s in range(seeds):
        pairs = empirical_distance_spectrum(gen_iid_codebook(n, M, s)).pairs
        assert sum(pairs) == M * (M - 1) // 2
        for j, d in enumerate(interior):
            c = pairs[d]
            hits[s, j] = c > 0 and abs(math.log2(c) - spectrum_exponent(n, R, d)) <= 0.1 * n
    per_d = hits.mean(axis=0)
    concentrated = bool(np.all(per_d >= 0.9))

    big, eps, R2, pairs = 2048, 0.05, 0.25, 1000
    cb = gen_iid_codebook(big, 1 << int(R2 * big), 11)
    rng = seeding.rng_for(11, seeding.COALITION)
    far = 0
    for _ in range(pairs):
        a, b = (cb.codeword(u) for u in draw_coalition(rng, cb.M, 2))
        far += a.distance(b) > big * (0.5 + eps)
    bound = close_pair_prob_bound(big, R2, eps)
    ok = concentrated and far / pairs <= bound
    verdict("11 spectrum", ok,
            f"n=24 interior d={interior[0]}..{interior[-1]}: worst per-d in-tolerance "
            f"fraction {per_d.min():.2f}, all-d seeds {hits.all(axis=1).mean():.2f} (need 0.90); "
            f"n=2048 non-close frequency {far / pairs:.4f} <= bound {bound:.4g}")
