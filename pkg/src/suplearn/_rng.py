"""Seeded random streams.

All randomness flows through PCG64 generators seeded from a
``SeedSequence(seed, spawn_key=keys)``.  Keys identify the task (fold,
candidate, tree, ...) so results never depend on execution order.
"""
import numpy as np

MAX_SEED = 2**63 - 1


def check_seed(seed) -> int:
    seed = int(seed)
    if not 0 <= seed <= MAX_SEED:
        raise ValueError(f"seed must be an integer in [0, 2**63 - 1], got {seed}")
    return seed


def make_rng(seed, *keys) -> np.random.Generator:
    ss = np.random.SeedSequence(check_seed(seed), spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.PCG64(ss))


def derive_seed(seed, *keys) -> int:
    """A 63-bit child seed for task ``keys`` under ``seed``."""
    ss = np.random.SeedSequence(check_seed(seed), spawn_key=tuple(int(k) for k in keys))
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))
