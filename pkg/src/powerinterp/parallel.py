"""Deterministic chunked evaluation on a thread pool.

Work is split into fixed chunks that do not depend on the worker count, and
results are reassembled in chunk order, so outputs are bit-identical for any
number of workers.  numpy releases the GIL in the heavy kernels.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

WORKERS_ENV = "POWERINTERP_WORKERS"


def worker_count(default: int | None = None) -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return default or min(8, os.cpu_count() or 1)


def map_ordered(fn, items, workers: int | None = None):
    """list(map(fn, items)) evaluated concurrently."""
    items = list(items)
    workers = workers or worker_count()
    if workers == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def chunks(n: int, size: int):
    return [(a, min(a + size, n)) for a in range(0, n, size)]
