"""Collusion-resistant fingerprinting: codebook ensembles, coalition attacks and tracing decoders."""

from .gf2 import BitMatrix, BitWord, count_rank_matrices, rank, solve_affine
from .ensembles import Kind, build_protograph_code, gen_coset_code, gen_iid_codebook, gen_linear_code
from .attacks import averaging_attack, memoryless_marking_attack, xor3_attack
from .harness import ExperimentConfig, ResultTable, run_experiment, run_trial

__version__ = "0.1.0"

__all__ = [
    "BitMatrix", "BitWord", "count_rank_matrices", "rank", "solve_affine",
    "Kind", "build_protograph_code", "gen_coset_code", "gen_iid_codebook", "gen_linear_code",
    "averaging_attack", "memoryless_marking_attack", "xor3_attack",
    "ExperimentConfig", "ResultTable", "run_experiment", "run_trial",
]
