"""
MDT Workbench - Ordered Parallel Map

Per-utterance work fans out over worker processes; results always come
back in job order so merges do not depend on scheduling.
"""

from collections.abc import Callable, Iterable
from concurrent.futures import ProcessPoolExecutor
from typing import Any, TypeVar

T = TypeVar("T")
R = TypeVar("R")


def ordered_map(
    fn: Callable[[T], R],
    jobs: Iterable[T],
    workers: int = 1,
    initializer: Callable[..., Any] | None = None,
    initargs: tuple[Any, ...] = (),
    chunksize: int = 8,
) -> list[R]:
    """``[fn(job) for job in jobs]``, optionally across ``workers`` processes.

    ``initializer(*initargs)`` runs once per worker (or once in-process when
    ``workers == 1``) to install shared read-only state.
    """
    jobs = list(jobs)
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers, initializer=initializer, initargs=initargs) as pool:
            return list(pool.map(fn, jobs, chunksize=chunksize))
    if initializer is not None:
        initializer(*initargs)
    return [fn(job) for job in jobs]
