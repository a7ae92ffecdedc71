"""Order-preserving parallel map capped by ``GHLAB_THREADS``."""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor


def worker_count() -> int:
    raw = os.environ.get("GHLAB_THREADS", "").strip()
    if not raw:
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"GHLAB_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ValueError(f"GHLAB_THREADS must be a positive integer, got {raw!r}")
    return n


def pmap(func, items):
    """``list(map(func, items))``, possibly threaded; result order never depends on scheduling."""
    items = list(items)
    n = min(worker_count(), len(items))
    if n <= 1:
        return [func(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(func, items))
