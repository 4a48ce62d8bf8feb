"""Seeding of the per-trial random number streams.

Every trial owns a Philox stream keyed by ``(master seed, trial index)`` so a
run gives the same numbers whatever the worker count or scheduling order.
"""

import os
from typing import Optional

import numpy as np

DEFAULT_SEED = int(os.getenv("MESO_DBM_SEED", "20240101"))


def resolve_seed(seed: Optional[int]) -> int:
    """Return ``seed`` or the MESO_DBM_SEED fallback."""
    if seed is None:
        return DEFAULT_SEED
    return int(seed)


def rng_for(seed: Optional[int], trial: int = 0) -> np.random.Generator:
    """Counter-based generator for one trial of a run."""
    ss = np.random.SeedSequence(resolve_seed(seed), spawn_key=(int(trial),))
    return np.random.Generator(np.random.Philox(ss))


def ensure_rng(rng=None, seed: Optional[int] = None, trial: int = 0) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return rng_for(seed, trial)


def derive_seed(seed: Optional[int], *keys: int) -> int:
    """Independent child seed for a sub-run (sweep cell, acceptance criterion)."""
    ss = np.random.SeedSequence(resolve_seed(seed), spawn_key=tuple(int(k) for k in keys))
    return int(ss.generate_state(1, dtype=np.uint32)[0])
