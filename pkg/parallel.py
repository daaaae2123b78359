import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, Sequence, TypeVar

import numpy as np

from config import settings

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def map_batches(fn: Callable[[T], R], batches: Sequence[T], threads: Optional[int] = None) -> List[R]:
    """Apply fn to every batch, results in submission order."""
    workers = min(threads or settings.threads, len(batches))
    if workers <= 1:
        return [fn(batch) for batch in batches]
    logger.debug(f"Mapping {len(batches)} batches over {workers} threads")
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, batches))


def spawn_generators(seed: int, count: int) -> List[np.random.Generator]:
    """Independent generators derived from one seed."""
    return [np.random.default_rng(child) for child in np.random.SeedSequence(seed).spawn(count)]
