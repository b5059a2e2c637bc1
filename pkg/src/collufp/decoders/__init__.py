"""Identification rules for forged copies."""

from .outcome import DecodeOutcome, Status
from .md import (likelihood_decode_avg, md_erasure_decode, md_hamming_decode,
                 syndrome_erasure_decode)
from .bp import (BpState, Exhausted, bp_bsc_decode, bp_peel, initial_state, is_stopping_set,
                 modified_bp_decode, peel_decode, select_guess_node)

__all__ = [
    "DecodeOutcome", "Status", "BpState", "Exhausted",
    "md_erasure_decode", "syndrome_erasure_decode", "md_hamming_decode", "likelihood_decode_avg",
    "bp_peel", "initial_state", "is_stopping_set", "select_guess_node", "modified_bp_decode",
    "peel_decode",     "bp_bsc_decode",
]
