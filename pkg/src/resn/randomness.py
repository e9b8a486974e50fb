"""Deterministic RNG derivation shared by samplers, mutation, and training.

Every stochastic component draws from a generator keyed by an integer seed
plus a branch path, so independent streams never collide and any single
draw can be re-materialized later (e.g. to recover the best weight sample).
"""

import numpy as np

_ENTROPY_MOD = 2**63


def rng_from(seed: int, *branch: int) -> np.random.Generator:
    """Generator for ``(seed, branch)``, stable across runs and platforms."""
    ss = np.random.SeedSequence(
        entropy=int(seed) % _ENTROPY_MOD,
        spawn_key=tuple(int(b) for b in branch),
    )
    return np.random.default_rng(ss)


def derive_seed(seed: int, *branch: int) -> int:
    """Integer sub-seed for ``(seed, branch)``; feeds nested ``rng_from`` calls."""
    ss = np.random.SeedSequence(
        entropy=int(seed) % _ENTROPY_MOD,
        spawn_key=tuple(int(b) for b in branch),
    )
    return int(ss.generate_state(1, dtype=np.uint64)[0])
