"""Worker-count resolution and a partitioned thread pool."""

import logging
from concurrent.futures import ThreadPoolExecutor, as_completed
from typing import Callable, List, Optional, Sequence, TypeVar

import psutil

logger = logging.getLogger(__name__)

T = TypeVar("T")


def resolve_workers(requested: Optional[int] = None) -> int:
    """Number of worker threads to use.

    Args:
        requested: Explicit count from the config; None means all logical CPUs

    Returns:
        A positive worker count
    """
    if requested is not None and requested > 0:
        return requested
    count = psutil.cpu_count(logical=True)
    return count if count else 1


def run_partitioned(
    tasks: Sequence[Callable[[], T]],
    workers: int,
    on_done: Optional[Callable[[int, T], None]] = None,
) -> List[T]:
    """Run independent tasks and return their results in task order.

    Completion order depends on scheduling, but the returned list is always
    indexed like ``tasks`` so downstream merges are deterministic.

    Args:
        tasks: Zero-argument callables
        workers: Maximum number of threads
        on_done: Called on the calling thread as each task finishes
            with (task index, result)

    Returns:
        Results in the order of ``tasks``
    """
    results: List[Optional[T]] = [None] * len(tasks)
    if workers <= 1 or len(tasks) <= 1:
        for index, task in enumerate(tasks):
            results[index] = task()
            if on_done is not None:
                on_done(index, results[index])
        return results  # type: ignore[return-value]

    with ThreadPoolExecutor(max_workers=min(workers, len(tasks))) as executor:
        future_to_index = {executor.submit(task): i for i, task in enumerate(tasks)}
        for future in as_completed(future_to_index):
            index = future_to_index[future]
            results[index] = future.result()
            logger.debug("partition %d finished", index)
            if on_done is not None:
                on_done(index, results[index])
    return results  # type: ignore[return-value]
