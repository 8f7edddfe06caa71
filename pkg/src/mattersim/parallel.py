"""Thread-pool map with deterministic ordering.

Work items are evaluated in any order, but results come back in input order
and every reduction is a left-to-right sum, so outputs do not depend on the
number of threads.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Optional, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")

ENV_THREADS = "MATTERSIM_THREADS"


def resolve_workers(workers: Optional[int] = None) -> int:
    """Explicit count, else ``$MATTERSIM_THREADS``, else the number of cores."""
    if workers is None:
        env = os.environ.get(ENV_THREADS)
        workers = int(env) if env else (os.cpu_count() or 1)
    if workers < 1:
        raise ValueError(f"worker count must be at least 1, got {workers}")
    return workers


def pmap(func: Callable[[T], R], items: Sequence[T], workers: Optional[int] = None) -> list[R]:
    n = resolve_workers(workers)
    if n == 1 or len(items) <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=min(n, len(items))) as pool:
        return list(pool.map(func, items))


def ordered_sum(values: Iterable):
    total = None
    for value in values:
        total = value if total is None else total + value
    return total
