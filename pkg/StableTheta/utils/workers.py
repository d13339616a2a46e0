"""
StableTheta Worker Pool
Runs independent tasks serially or on a process pool, keeping input order
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, List, TypeVar

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def parallel_map(func: Callable[[T], R], items: Iterable[T], workers: int = 1) -> List[R]:
    """
    Apply func to every item

    Args:
        func: Picklable top-level function
        items: Task arguments
        workers: Process count; 1 runs in the calling process

    Returns:
        Results in the order of items, regardless of completion order
    """
    tasks = list(items)
    if workers <= 1 or len(tasks) <= 1:
        return [func(task) for task in tasks]
    logger.debug("dispatching %d tasks to %d worker processes", len(tasks), workers)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, tasks))
