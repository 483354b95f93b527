"""Reproducible block-parallel Monte-Carlo plumbing.

Samples are split into fixed-size blocks; block b draws from its own Philox
stream keyed by (seed, b), so the numbers a block sees never depend on how
many workers ran or in which order blocks finished.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .errors import ConfigError

BLOCK_SIZE = 20_000
THREADS_ENV = "MLBOUNDS_THREADS"


def default_workers() -> int:
    raw = os.environ.get(THREADS_ENV, "")
    try:
        return max(1, int(raw)) if raw else 1
    except ValueError:
        raise ConfigError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None


def block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(block)])))


def require_seed(seed) -> int:
    if seed is None:
        raise ConfigError("Monte-Carlo estimates need an explicit seed")
    return int(seed)


def run_blocks(fn, seed: int, samples: int, workers: int | None = None, block_size: int = BLOCK_SIZE):
    """Call fn(rng, count) for every block and return the results in block order."""
    seed = require_seed(seed)
    if samples < 1:
        raise ConfigError("samples must be positive")
    sizes = [block_size] * (samples // block_size)
    if samples % block_size:
        sizes.append(samples % block_size)
    jobs = list(enumerate(sizes))
    workers = default_workers() if workers is None else max(1, int(workers))

    def one(job):
        b, count = job
        return fn(block_rng(seed, b), count)

    if workers == 1 or len(jobs) == 1:
        return [one(j) for j in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, jobs))
