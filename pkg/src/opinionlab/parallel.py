"""Order-preserving parallel map over independent work units.

Work units carry their own derived RNG streams and share no mutable
state, and results are reduced in submission order, so outputs match
the single-thread run for any worker count.
"""

import os
from concurrent.futures import ThreadPoolExecutor

ENV_THREADS = "OPINIONLAB_THREADS"


def resolve_threads(threads=None):
    if threads is None:
        threads = os.environ.get(ENV_THREADS, "1")
    threads = int(threads)
    return max(threads, 1)


def parallel_map(fn, items, threads=1):
    items = list(items)
    threads = resolve_threads(threads)
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))
