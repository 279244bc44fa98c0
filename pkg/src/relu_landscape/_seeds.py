"""Deterministic derivation of independent RNG streams from one master seed."""
from __future__ import annotations

import zlib

import numpy as np


def seed_sequence(master_seed: int, *path) -> np.random.SeedSequence:
    """Build a SeedSequence keyed by a master seed plus a label path.

    Path elements are non-negative integers or short strings (strings are
    hashed with crc32).  Two distinct paths give statistically independent
    streams, and the mapping is stable across runs, platforms, and any
    parallel execution order.
    """
    key = []
    for p in path:
        if isinstance(p, str):
            key.append(zlib.crc32(p.encode("utf-8")))
        else:
            q = int(p)
            if q < 0:
                raise ValueError(f"negative path element {p!r}")
            key.append(q)
    return np.random.SeedSequence(int(master_seed), spawn_key=tuple(key))


def stream(master_seed: int, *path) -> np.random.Generator:
    """Generator for the stream identified by ``path`` under ``master_seed``."""
    return np.random.default_rng(seed_sequence(master_seed, *path))
