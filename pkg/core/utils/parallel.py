"""Order-preserving fan-out over a thread pool."""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Sequence, TypeVar

log = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def ordered_map(fn: Callable[[T], R], items: Sequence[T], threads: int = 1) -> List[R]:
    """Apply fn to every item; results come back in input order whatever the thread count."""
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    log.debug("fanning out %d tasks over %d threads", len(items), threads)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))
