"""Optional thread parallelism, capped by the MGALIGN_THREADS variable."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor


def max_workers(requested: int | None = None) -> int:
    """Worker cap: explicit request, else MGALIGN_THREADS, else 1."""
    if requested is not None:
        return max(1, int(requested))
    env = os.environ.get("MGALIGN_THREADS", "")
    try:
        return max(1, int(env)) if env else 1
    except ValueError:
        return 1


def parallel_map(fn, items, workers: int | None = None) -> list:
    """Map preserving input order; runs serially unless workers > 1."""
    items = list(items)
    n = max_workers(workers)
    if n <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=min(n, len(items))) as pool:
        return list(pool.map(fn, items))
