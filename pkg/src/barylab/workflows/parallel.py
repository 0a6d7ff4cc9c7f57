"""Ordered thread-pool map and per-trial random generators."""
from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

import numpy as np

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def _resolve_thread_count() -> int:
    configured = os.environ.get("BARYLAB_THREADS")
    if not configured:
        return 1
    try:
        count = int(configured)
    except ValueError:
        logger.warning("BARYLAB_THREADS=%r is not an integer; using 1 worker", configured)
        return 1
    if count < 1:
        logger.warning("BARYLAB_THREADS=%d is below 1; using 1 worker", count)
        return 1
    return count


def resolve_workers(requested: Optional[int] = None) -> int:
    """Worker count: the explicit request, else BARYLAB_THREADS, else 1."""
    return max(1, requested) if requested is not None else _resolve_thread_count()


def map_ordered(fn: Callable[[T], R], items: Iterable[T], workers: Optional[int] = None) -> List[R]:
    """fn over items with results in input order, whatever the worker count."""
    items = list(items)
    count = resolve_workers(workers)
    if count == 1 or len(items) < 2:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=count) as executor:
        return list(executor.map(fn, items))


def trial_generators(seed: int, count: int) -> List[np.random.Generator]:
    """Independent generators, one per trial, spawned from a single seed."""
    return [np.random.default_rng(child) for child in np.random.SeedSequence(seed).spawn(count)]
