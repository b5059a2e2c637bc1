"""Counter-based seed derivation.

Every random object in a run (codebook, key, coalition, attack coins) is a
pure function of the master seed and a few small integer labels, so results
do not depend on worker count or execution order.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(x: int) -> int:
    """SplitMix64 finalizer; a bijection on 64-bit integers."""
    x = (x + _GOLDEN) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def splitmix64_array(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.uint64) + np.uint64(_GOLDEN)
    x = (x ^ (x >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    x = (x ^ (x >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return x ^ (x >> np.uint64(31))


def derive(seed: int, *labels: int) -> int:
    """Fold integer labels into a 64-bit seed.

    For fixed ``seed`` and leading labels, the map from the last label to the
    result is injective (each step is a bijection of an injective argument).
    """
    out = seed & MASK64
    for lab in labels:
        out = splitmix64((out * _GOLDEN + (lab & MASK64)) & MASK64)
    return out


def trial_seed(master_seed: int, trial: int) -> int:
    return derive(master_seed, trial)


# labels for the independent streams inside one trial
CODEBOOK, KEY, COALITION, ATTACK, DECODER = range(1, 6)


def rng_for(seed: int, stream: int) -> np.random.Generator:
    return np.random.default_rng(derive(seed, stream))
