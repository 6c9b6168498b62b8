"""Bounded, order-preserving worker pool.

``ICDLAB_THREADS`` caps the number of workers (default: CPU count). Nested
calls run serially inside the calling worker so pools never stack.
"""
from __future__ import annotations

import os
import threading
from concurrent.futures import ThreadPoolExecutor

_local = threading.local()


def max_workers() -> int:
    env = os.environ.get("ICDLAB_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def _guarded(fn):
    def run(item):
        _local.inside = True
        try:
            return fn(item)
        finally:
            _local.inside = False
    return run


def map_ordered(fn, items):
    """``[fn(x) for x in items]``, possibly concurrent; result order always matches input order."""
    items = list(items)
    workers = min(max_workers(), len(items))
    if workers <= 1 or getattr(_local, "inside", False):
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_guarded(fn), items))
