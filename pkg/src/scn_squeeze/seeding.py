"""Deterministic seed derivation.

All randomness in the package flows from explicit integer seeds.  Parallel or
repeated sub-tasks derive child seeds with ``split_seed`` so results are
independent of execution order.
"""

import numpy as np

__all__ = ["split_seed", "rng_from"]

_SEED_MOD = 2**63


def split_seed(parent: int, *indices: int) -> int:
    """Derive a child seed from a parent seed and one or more indices.

    The same (parent, indices) always yields the same child; distinct index
    tuples yield statistically independent children.
    """
    ss = np.random.SeedSequence([int(parent) % _SEED_MOD, *[int(i) % _SEED_MOD for i in indices]])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def rng_from(seed: int) -> np.random.Generator:
    """Generator seeded deterministically from an integer seed."""
    return np.random.default_rng(int(seed) % _SEED_MOD)
