"""Deterministic thread-pool mapping for independent subtasks."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")


def thread_map(fn: Callable[[T], R], items: Sequence[T], n_jobs: int | None) -> list[R]:
    """Map ``fn`` over ``items``, optionally on ``n_jobs`` threads.

    Results come back in input order regardless of scheduling, so a run with
    ``n_jobs > 1`` is output-identical to a serial one as long as ``fn`` is
    deterministic and the tasks are independent.
    """
    if n_jobs is not None and n_jobs < 1:
        raise ValueError(f"n_jobs must be at least 1, got {n_jobs}")
    if n_jobs in (None, 1) or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=n_jobs) as executor:
        return list(executor.map(fn, items))
