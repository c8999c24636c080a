"""Order-preserving map over independent work items."""

import os
from concurrent.futures import ThreadPoolExecutor

from .exceptions import ConfigError

ENV_THREADS = "MATDIST_THREADS"


def worker_count(threads=None):
    if threads is None:
        raw = os.environ.get(ENV_THREADS, "").strip()
        if not raw:
            return 1
        try:
            threads = int(raw)
        except ValueError:
            raise ConfigError(ENV_THREADS, f"expected a positive integer, got {raw!r}") from None
        if threads < 1:
            raise ConfigError(ENV_THREADS, f"expected a positive integer, got {raw!r}")
    if threads < 1:
        raise ValueError("thread count must be at least 1")
    return threads


def ordered_map(fn, items, threads=None):
    """``[fn(item) for item in items]``, optionally on a thread pool; output order
    always matches input order."""
    items = list(items)
    workers = min(worker_count(threads), max(len(items), 1))
    if workers == 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
