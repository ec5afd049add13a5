"""Deterministic substreams and order-preserving parallel maps."""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

ENV_THREADS = "RIESZ_FLOW_THREADS"


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get(ENV_THREADS, "1")))
    except ValueError:
        return 1


def stream_rng(seed: int, stream: int, index: int) -> np.random.Generator:
    """Generator fully determined by ``(seed, stream, index)``."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(stream, index))))


def batch_sizes(total: int, batch: int) -> list:
    full, rest = divmod(total, batch)
    return [batch] * full + ([rest] if rest else [])


def ordered_map(func, items, workers: int | None = None) -> list:
    """``[func(x) for x in items]``, optionally on a thread pool; order is preserved."""
    items = list(items)
    workers = default_workers() if workers is None else workers
    if workers <= 1 or len(items) <= 1:
        return [func(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))
