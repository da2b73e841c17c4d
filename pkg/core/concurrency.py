"""
Deterministic fan-out of independent numeric tasks
"""
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

import numpy as np

from .config import settings

T = TypeVar("T")
R = TypeVar("R")


def resolve_threads(requested: Optional[int] = None) -> int:
    """Worker count for a fan-out; 0 or None falls back to settings, then to the CPU count"""
    threads = settings.threads if requested is None else requested
    if threads <= 0:
        threads = os.cpu_count() or 1
    return threads


def parallel_map(fn: Callable[[T], R], items: Iterable[T], threads: Optional[int] = None) -> List[R]:
    """Apply fn to every item; results keep input order whatever the completion order"""
    items = list(items)
    workers = min(resolve_threads(threads), max(len(items), 1))
    if workers == 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def derive_seed(seed: int, *keys: int) -> int:
    """64-bit seed for the task keyed by (seed, *keys)"""
    sequence = np.random.SeedSequence([seed, *keys])
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def task_rng(seed: int, *keys: int) -> np.random.Generator:
    """Random stream owned by a single task"""
    return np.random.default_rng(np.random.SeedSequence([seed, *keys]))
