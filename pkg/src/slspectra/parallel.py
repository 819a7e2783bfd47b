"""Thread fan-out for independent per-level work; the numba kernels release the GIL."""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

_threads = os.cpu_count() or 1


def set_threads(n: int | None) -> int:
    global _threads
    _threads = max(1, int(n)) if n else (os.cpu_count() or 1)
    return _threads


def get_threads() -> int:
    return _threads


def thread_map(fn, items) -> list:
    """Ordered map; results do not depend on the thread count."""
    items = list(items)
    if _threads <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=min(_threads, len(items))) as pool:
        return list(pool.map(fn, items))
