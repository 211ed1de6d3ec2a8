"""Per-frame worker pool.

Every stage in the pipeline is frame-parallel with no cross-frame state, so
results must not depend on scheduling.  ``frame_map`` enforces that shape:
the worker gets (frame_index, item) and the output list is ordered by index
regardless of completion order.

Thread count resolution order: explicit argument, STEREOFORGE_THREADS
environment variable, then os.cpu_count().
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

from .errors import InvalidConfig

THREADS_ENV = "STEREOFORGE_THREADS"

T = TypeVar("T")
R = TypeVar("R")


def resolve_threads(threads: int | None = None) -> int:
    """Pick the worker count from the argument, environment, or CPU count."""
    if threads is None:
        env = os.environ.get(THREADS_ENV, "").strip()
        if env:
            try:
                threads = int(env)
            except ValueError as exc:
                raise InvalidConfig(
                    f"{THREADS_ENV} must be an integer", value=env
                ) from exc
        else:
            threads = os.cpu_count() or 1
    if threads < 1:
        raise InvalidConfig("thread count must be >= 1", threads=threads)
    return threads


def frame_map(
    fn: Callable[[int, T], R],
    items: Sequence[T] | Iterable[T],
    threads: int | None = None,
) -> list[R]:
    """Apply ``fn(index, item)`` to every item, preserving input order."""
    items = list(items)
    n = resolve_threads(threads)
    if n == 1 or len(items) <= 1:
        return [fn(i, item) for i, item in enumerate(items)]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, range(len(items)), items))
