"""Seeded counter-based random streams.

A run of ``n`` samples is cut into fixed batches of ``BATCH`` samples; batch
``i`` draws from ``Philox`` keyed by the ``i``-th child of ``SeedSequence(seed)``.
Batch contents therefore depend only on (seed, n), never on how many workers
evaluate them, and reductions combine batch results in batch order.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np

BATCH = 65536
_threads = 1


def set_threads(n: int) -> None:
    global _threads
    if n < 1:
        raise ValueError("threads must be >= 1")
    _threads = int(n)


def get_threads() -> int:
    return _threads


def batch_sizes(n: int) -> list[int]:
    n = int(n)
    if n < 0:
        raise ValueError("sample count must be non-negative")
    full, rest = divmod(n, BATCH)
    return [BATCH] * full + ([rest] if rest else [])


def streams(seed: int, n: int) -> list[tuple[np.random.Generator, int]]:
    sizes = batch_sizes(n)
    children = np.random.SeedSequence(int(seed)).spawn(len(sizes))
    return [(np.random.Generator(np.random.Philox(c)), s) for c, s in zip(children, sizes)]


def map_batches(fn, seed: int, n: int) -> list:
    """``[fn(rng, size) for each batch]`` in batch order, run on up to
    ``get_threads()`` workers."""
    work = streams(seed, n)
    if _threads == 1 or len(work) < 2:
        return [fn(g, s) for g, s in work]
    with ThreadPoolExecutor(_threads) as ex:
        return list(ex.map(lambda gs: fn(*gs), work))
