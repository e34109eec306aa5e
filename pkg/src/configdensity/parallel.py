"""Thread-count policy (``CONFIGDENSITY_THREADS`` caps all parallel work)."""

import os
from concurrent.futures import ThreadPoolExecutor


def thread_cap():
    env = os.environ.get("CONFIGDENSITY_THREADS")
    n = os.cpu_count() or 1
    if env:
        try:
            n = min(n, max(1, int(env)))
        except ValueError:
            pass
    return n


def ordered_map(func, items, workers=None):
    """``[func(x) for x in items]`` evaluated on a thread pool; result order follows ``items``."""
    items = list(items)
    workers = min(workers or thread_cap(), len(items)) if items else 1
    if workers <= 1:
        return [func(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))
