"""Monte Carlo runner for misidentification experiments.

A config file is flat ``key = value`` text.  ``#`` starts a comment and a
comma-separated value for ``n`` or ``lift`` declares a sweep, one result row
per entry.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from functools import lru_cache
from pathlib import Path

import numpy as np

from . import seeding
from .analysis import avg_transition_matrix
from .attacks import (Coalition, ForgedCopy, Mode, averaging_attack, coalition_of,
                      erasures_from_average, memoryless_marking_attack, xor3_attack)
from .decoders import (DecodeOutcome, Status, bp_bsc_decode, likelihood_decode_avg,
                       md_erasure_decode, md_hamming_decode, modified_bp_decode,
                       peel_decode, syndrome_erasure_decode)
from .ensembles import (DEFAULT_CAP, Kind, ProtographSpec, builtin_protograph,
                        build_protograph_code, gen_coset_code, gen_iid_codebook,
                        gen_linear_code, RACodebook)

ATTACK_MODE = {"averaging": Mode.AVERAGED, "marking": Mode.BINARY, "xor3": Mode.BINARY}
DECODER_MODE = {
    "md_erasure": Mode.AVERAGED,
    "syndrome": Mode.AVERAGED,
    "likelihood": Mode.AVERAGED,
    "bp_peel": Mode.AVERAGED,
    "modified_bp": Mode.AVERAGED,
    "md_hamming": Mode.BINARY,
    "bp_bsc": Mode.BINARY,
}
GRAPH_DECODERS = {"bp_peel", "modified_bp", "bp_bsc"}
TABLE_DECODERS = {"md_erasure", "likelihood", "md_hamming"}
CSV_COLUMNS = ["ensemble", "attack", "decoder", "n", "rate", "t", "trials", "misid", "pm",
               "stderr", "seed"]


class ConfigError(ValueError):
    """Invalid or inconsistent experiment configuration."""


@dataclass(frozen=True)
class ExperimentConfig:
    ensemble: Kind
    attack: str
    decoder: str
    n: tuple[int, ...] = ()
    t: int = 2
    M: int | None = None
    rate: float | None = None
    l: int | None = None
    q: int | None = None
    protograph: str | None = None
    lift: tuple[int, ...] = ()
    n_max: int = 8
    rule: str = "chain"
    max_iters: int = 60
    crossover: float = 0.25
    trials: int = 100
    seed: int = 0
    codebook_cap: int = DEFAULT_CAP
    fixed_codebook: bool = False

    def __post_init__(self):
        self.validate()

    @classmethod
    def parse(cls, text: str) -> "ExperimentConfig":
        raw: dict[str, str] = {}
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ConfigError(f"line {lineno}: expected 'key = value'")
            key = key.strip()
            if key in raw:
                raise ConfigError(f"line {lineno}: duplicate key {key!r}")
            raw[key] = value.strip().strip('"').strip("'")
        return cls.from_mapping(raw)

    @classmethod
    def load(cls, path: str | Path) -> "ExperimentConfig":
        return cls.parse(Path(path).read_text())

    @classmethod
    def from_mapping(cls, raw: dict) -> "ExperimentConfig":
        known = {f.name: f for f in fields(cls)}
        unknown = set(raw) - set(known)
        if unknown:
            raise ConfigError(f"unknown keys: {', '.join(sorted(unknown))}")
        for key in ("ensemble", "attack", "decoder"):
            if key not in raw:
                raise ConfigError(f"missing key {key!r}")
        kw = {}
        try:
            for key, value in raw.items():
                kw[key] = _coerce(key, value)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        return cls(**kw)

    def validate(self) -> None:
        if self.t < 2:
            raise ConfigError("t must be at least 2")
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if self.attack not in ATTACK_MODE:
            raise ConfigError(f"unknown attack {self.attack!r}")
        if self.decoder not in DECODER_MODE:
            raise ConfigError(f"unknown decoder {self.decoder!r}")
        if ATTACK_MODE[self.attack] is not DECODER_MODE[self.decoder]:
            raise ConfigError(f"decoder {self.decoder!r} cannot read {self.attack!r} output")
        if self.attack == "marking" and self.t != 2:
            raise ConfigError("the marking attack needs t = 2")
        if self.attack == "xor3" and self.t < 3:
            raise ConfigError("the xor3 attack needs t >= 3")
        if self.decoder in ("syndrome", "modified_bp") and self.t != 2:
            raise ConfigError(f"{self.decoder} handles t = 2 only")
        if self.decoder == "syndrome" and self.ensemble not in (Kind.LINEAR, Kind.COSET):
            raise ConfigError("syndrome decoding needs a linear or coset ensemble")
        graph = self.ensemble in (Kind.RA, Kind.PROTOGRAPH)
        if self.decoder in GRAPH_DECODERS and not graph:
            raise ConfigError(f"{self.decoder} needs an RA or protograph ensemble")
        if self.decoder == "bp_bsc" and not 0 < self.crossover < 0.5:
            raise ConfigError("crossover must lie in (0, 1/2)")
        if self.ensemble is Kind.PROTOGRAPH:
            if not self.lift:
                raise ConfigError("protograph ensembles need 'lift'")
            if self.protograph is None:
                raise ConfigError("protograph ensembles need 'protograph'")
        elif not self.n:
            raise ConfigError("missing key 'n'")
        if self.ensemble is Kind.IID and (self.M is None) == (self.rate is None):
            raise ConfigError("iid ensembles need exactly one of 'M' and 'rate'")
        if self.ensemble in (Kind.LINEAR, Kind.COSET) and self.l is None and self.rate is None:
            raise ConfigError("linear ensembles need 'l' or 'rate'")
        if self.ensemble is Kind.RA:
            if self.q is None:
                raise ConfigError("RA ensembles need 'q'")
            bad = [n for n in self.n if n % self.q]
            if bad:
                raise ConfigError(f"n={bad[0]} is not a multiple of q={self.q}")

    def points(self) -> list["ExperimentConfig"]:
        """One single-length config per sweep entry."""
        if self.ensemble is Kind.PROTOGRAPH:
            return [replace(self, lift=(lift,)) for lift in self.lift]
        return [replace(self, n=(n,)) for n in self.n]

    def dumps(self) -> str:
        out = []
        for f in fields(self):
            v = getattr(self, f.name)
            if v is None or v == () or v == f.default:
                if f.name not in ("ensemble", "attack", "decoder", "trials", "seed"):
                    continue
            if isinstance(v, tuple):
                v = ", ".join(map(str, v))
            elif isinstance(v, Kind):
                v = v.value
            elif isinstance(v, bool):
                v = str(v).lower()
            out.append(f"{f.name} = {v}")
        return "\n".join(out) + "\n"


def _coerce(key: str, value):
    if not isinstance(value, str):
        if key in ("n", "lift"):
            return tuple(int(v) for v in np.atleast_1d(value))
        if key == "ensemble":
            return Kind(value)
        return value
    if key == "ensemble":
        try:
            return Kind(value.lower())
        except ValueError:
            raise ValueError(f"unknown ensemble {value!r}") from None
    if key in ("n", "lift"):
        return tuple(int(v) for v in value.split(",") if v.strip())
    if key in ("t", "l", "q", "n_max", "max_iters", "trials", "codebook_cap"):
        return int(value)
    if key in ("M", "seed"):
        return int(value, 0)
    if key in ("rate", "crossover"):
        return float(value)
    if key == "fixed_codebook":
        if value.lower() not in ("true", "false", "1", "0", "yes", "no"):
            raise ValueError(f"fixed_codebook: not a boolean: {value!r}")
        return value.lower() in ("true", "1", "yes")
    return value


@lru_cache(maxsize=8)
def load_protograph(name: str) -> ProtographSpec:
    if Path(name).is_file():
        return ProtographSpec.load(name)
    return builtin_protograph(name)


def make_codebook(config: ExperimentConfig, seed: int):
    """Codebook for a single-point config, seeded from the CODEBOOK stream."""
    cseed = seeding.derive(seed, seeding.CODEBOOK)
    kind = config.ensemble
    if kind is Kind.PROTOGRAPH:
        return build_protograph_code(load_protograph(config.protograph), config.lift[0], cseed)
    n = config.n[0]
    if kind is Kind.IID:
        M = config.M if config.M is not None else round(2 ** (config.rate * n))
        return gen_iid_codebook(n, M, cseed)
    if kind in (Kind.LINEAR, Kind.COSET):
        l = config.l if config.l is not None else round(config.rate * n)
        if kind is Kind.LINEAR:
            return gen_linear_code(n, l, cseed)
        return gen_coset_code(n, l, cseed, seeding.derive(seed, seeding.KEY))
    return RACodebook(n // config.q, config.q, cseed)


@lru_cache(maxsize=4)
def _fixed_codebook(config: ExperimentConfig):
    return make_codebook(config, config.seed)


def draw_user(rng: np.random.Generator, M: int) -> int:
    if M <= 1 << 62:
        return int(rng.integers(M))
    bits = (M - 1).bit_length()
    while True:
        u = int.from_bytes(rng.bytes((bits + 7) // 8), "little") & ((1 << bits) - 1)
        if u < M:
            return u


def draw_coalition(rng: np.random.Generator, M: int, t: int) -> tuple[int, ...]:
    """``t`` distinct uniform users, in draw order."""
    if t > M:
        raise ConfigError(f"coalition of {t} from only {M} users")
    if M <= 1 << 62 and M <= 64 * t:
        return tuple(int(u) for u in rng.choice(M, size=t, replace=False))
    users: list[int] = []
    while len(users) < t:
        u = draw_user(rng, M)
        if u not in users:
            users.append(u)
    return tuple(users)


@dataclass(frozen=True)
class TrialResult:
    trial: int
    users: tuple[int, ...]
    accused: int | None
    misidentified: bool
    status: Status
    erasures: int = 0
    guesses: int = 0
    iterations: int = 0
    seed: int = 0
    pirate_word: bool | None = None  # decoded word equals a coalition fingerprint


def apply_attack(config: ExperimentConfig, coalition: Coalition,
                 rng: np.random.Generator) -> ForgedCopy:
    if config.attack == "averaging":
        return averaging_attack(coalition)
    if config.attack == "marking":
        return memoryless_marking_attack(coalition, rng)
    # larger coalitions ignore everyone past the third pirate
    return xor3_attack(*coalition.words[:3])


def decode(config: ExperimentConfig, codebook, y: ForgedCopy,
           rng: np.random.Generator) -> DecodeOutcome:
    d = config.decoder
    if d in TABLE_DECODERS and codebook.M > config.codebook_cap:
        raise ConfigError(f"{d} needs the whole codebook but M={codebook.M} "
                          f"exceeds codebook_cap={config.codebook_cap}")
    if d == "md_erasure":
        return md_erasure_decode(codebook, y)
    if d == "syndrome":
        return syndrome_erasure_decode(codebook, y, rng)
    if d == "likelihood":
        return likelihood_decode_avg(codebook, y, avg_transition_matrix(config.t))
    if d == "md_hamming":
        return md_hamming_decode(codebook, y)
    graph = codebook.graph
    if d == "bp_peel":
        return peel_decode(graph, y, codebook)
    if d == "modified_bp":
        return modified_bp_decode(graph, y, config.n_max, config.rule, codebook)
    return bp_bsc_decode(graph, y.word, config.crossover, config.max_iters, codebook)


def run_trial(config: ExperimentConfig, trial: int) -> TrialResult:
    """One draw of codebook, coalition, attack coins and decoder coins.

    A failed decode accuses nobody, and nobody is outside the coalition, so
    it counts as a misidentification.
    """
    if len(config.points()) != 1:
        raise ConfigError("run_trial needs a single-point config")
    seed = seeding.trial_seed(config.seed, trial)
    codebook = _fixed_codebook(config) if config.fixed_codebook else make_codebook(config, seed)
    users = draw_coalition(seeding.rng_for(seed, seeding.COALITION), codebook.M, config.t)
    coalition = coalition_of(codebook, users)
    y = apply_attack(config, coalition, seeding.rng_for(seed, seeding.ATTACK))
    out = decode(config, codebook, y, seeding.rng_for(seed, seeding.DECODER))
    accused = out.accused if out.status is not Status.FAILED else None
    pirate_word = None
    if out.word is not None:
        pirate_word = any(out.word == w for w in coalition.words)
    erasures = int(erasures_from_average(y).erased.size) if y.mode is Mode.AVERAGED else 0
    return TrialResult(
        trial=trial,
        users=users,
        accused=accused,
        misidentified=accused not in users,
        status=out.status,
        erasures=erasures,
        guesses=out.guesses,
        iterations=out.iterations,
        seed=seed,
        pirate_word=pirate_word,
    )


@dataclass(frozen=True)
class ResultRow:
    ensemble: str
    attack: str
    decoder: str
    n: int
    rate: float
    t: int
    trials: int
    misid: int
    seed: int
    results: tuple[TrialResult, ...] = field(default=(), repr=False, compare=False)

    @property
    def pm(self) -> float:
        return self.misid / self.trials

    @property
    def stderr(self) -> float:
        p = self.pm
        return math.sqrt(p * (1 - p) / self.trials)

    def as_dict(self) -> dict:
        d = {c: getattr(self, c) for c in CSV_COLUMNS}
        return d


@dataclass
class ResultTable:
    rows: list[ResultRow] = field(default_factory=list)

    def sort(self) -> None:
        self.rows.sort(key=lambda r: (r.n, r.rate))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.rows:
            d = r.as_dict()
            d["rate"] = f"{r.rate:.6f}"
            d["pm"] = f"{r.pm:.6f}"
            d["stderr"] = f"{r.stderr:.6f}"
            w.writerow([d[c] for c in CSV_COLUMNS])
        return buf.getvalue()


def _run_chunk(args) -> list[TrialResult]:
    config, trials = args
    return [run_trial(config, i) for i in trials]


def nominal_size(point: ExperimentConfig) -> tuple[int, float]:
    """Length and design rate of a single-point config, without building a code."""
    kind = point.ensemble
    if kind is Kind.PROTOGRAPH:
        spec = load_protograph(point.protograph)
        return (spec.cols - len(spec.punctured)) * point.lift[0], spec.design_rate
    n = point.n[0]
    if kind is Kind.IID:
        M = point.M if point.M is not None else round(2 ** (point.rate * n))
        return n, math.log2(M) / n
    if kind is Kind.RA:
        return n, 1 / point.q
    l = point.l if point.l is not None else round(point.rate * n)
    return n, l / n


def _row_for(point: ExperimentConfig, results: list[TrialResult]) -> ResultRow:
    n, rate = nominal_size(point)
    return ResultRow(
        ensemble=point.ensemble.value,
        attack=point.attack,
        decoder=point.decoder,
        n=n,
        rate=rate,
        t=point.t,
        trials=len(results),
        misid=sum(r.misidentified for r in results),
        seed=point.seed,
        results=tuple(results),
    )


def run_experiment(config: ExperimentConfig, jobs: int = 1) -> ResultTable:
    """Run every sweep point; ``jobs > 1`` spreads trials over processes.

    Trial seeds depend only on the master seed and the trial index, so the
    table is the same for any ``jobs``.
    """
    table = ResultTable()
    jobs = max(1, jobs)
    pool = ProcessPoolExecutor(jobs) if jobs > 1 else None
    try:
        for point in config.points():
            idx = list(range(point.trials))
            if pool is None:
                results = _run_chunk((point, idx))
            else:
                step = max(1, math.ceil(len(idx) / (4 * jobs)))
                chunks = [(point, idx[i:i + step]) for i in range(0, len(idx), step)]
                results = [r for part in pool.map(_run_chunk, chunks) for r in part]
            results.sort(key=lambda r: r.trial)
            table.rows.append(_row_for(point, results))
    finally:
        if pool is not None:
            pool.shutdown()
    table.sort()
    return table
