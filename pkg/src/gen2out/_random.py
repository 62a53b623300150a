"""Seed handling: every random stream is a child of one master SeedSequence."""

from __future__ import annotations

import os

import numpy as np

SEED_ENV = "GEN2OUT_SEED"
DEFAULT_SEED = 0


def default_seed() -> int:
    return int(os.environ.get(SEED_ENV, DEFAULT_SEED))


def as_seed_sequence(seed) -> np.random.SeedSequence:
    """Coerce ``None``, an int, or a SeedSequence into a SeedSequence.

    ``None`` falls back to the ``GEN2OUT_SEED`` environment variable (or 0) so
    that runs are reproducible unless asked otherwise.
    """
    if isinstance(seed, np.random.SeedSequence):
        return seed
    if seed is None:
        seed = default_seed()
    if isinstance(seed, (int, np.integer)):
        if seed < 0 or seed >= 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
        return np.random.SeedSequence(int(seed))
    raise TypeError(f"Cannot interpret {seed!r} as a seed")


def generator(seed) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(as_seed_sequence(seed)))


def spawn(seed, n: int) -> list[np.random.SeedSequence]:
    """``n`` independent child streams of ``seed``.

    Children depend only on the parent and their position, so work may be
    scheduled on any number of threads without changing results. Unlike
    ``SeedSequence.spawn`` this is stateless: repeated calls return the same
    children.
    """
    ss = as_seed_sequence(seed)
    return [
        np.random.SeedSequence(ss.entropy, spawn_key=ss.spawn_key + (i,), pool_size=ss.pool_size)
        for i in range(n)
    ]
