"""Splittable deterministic seeding for trials, channel draws, and solvers.

Child seeds are derived with splitmix64, a well-mixed 64-bit integer hash
(Steele et al., the finalizer used by java.util.SplittableRandom).  Derivation
is pure integer arithmetic, so the same (master, keys...) pair produces the
same stream on every platform.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1

# Named sub-stream indices hung off a trial seed.  Keeping these fixed makes
# channel realizations identical across schemes that share a trial.
STREAM_USERS = 0
STREAM_SIM_UE = 1
STREAM_DIRECT = 2
STREAM_SOLVER = 3


def splitmix64(x: int) -> int:
    """One splitmix64 mixing step; maps any 64-bit int to a well-mixed one."""
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def child_seed(master: int, *keys: int) -> int:
    """Derive a 64-bit child seed from a master seed and integer key path.

    Each key is folded in with one splitmix64 round, so (master, 1, 2) and
    (master, 2, 1) land on unrelated streams.
    """
    s = splitmix64(master & MASK64)
    for k in keys:
        s = splitmix64((s ^ ((k + 1) & MASK64)) & MASK64)
    return s


def rng_from(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed & MASK64)
