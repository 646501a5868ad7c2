"""Order-preserving map over independent search starts, capped by SUMMING_LAB_THREADS."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor


def thread_count() -> int:
    raw = os.environ.get("SUMMING_LAB_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def parallel_map(fn, items):
    """``list(map(fn, items))``, run on a thread pool when more than one thread is allowed.

    Results come back in input order, and every item carries its own seed, so
    the output does not depend on the thread count.
    """
    items = list(items)
    n = thread_count()
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=min(n, len(items))) as pool:
        return list(pool.map(fn, items))
