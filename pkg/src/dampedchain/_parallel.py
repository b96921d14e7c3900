"""Thread-pool helper for embarrassingly parallel maps.

The DAMPED_CHAIN_THREADS environment variable caps the worker count; unset
means a small default. Results always come back in submission order, so
parallel and serial execution produce identical output.
"""

import os
from concurrent.futures import ThreadPoolExecutor

DEFAULT_WORKERS = 4


def worker_count() -> int:
    raw = os.environ.get("DAMPED_CHAIN_THREADS")
    if raw is None:
        return min(DEFAULT_WORKERS, os.cpu_count() or 1)
    try:
        n = int(raw)
    except ValueError:
        return min(DEFAULT_WORKERS, os.cpu_count() or 1)
    return max(1, n)


def map_ordered(fn, items):
    """Apply ``fn`` over ``items``, preserving order; threads when allowed."""
    items = list(items)
    workers = worker_count()
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(fn, items))
