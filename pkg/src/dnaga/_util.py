"""Small shared helpers: errors, seeded sub-streams, ordered thread maps."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

# dB <-> natural-log conversion scalar, 10 / ln 10
ZETA = 10.0 / np.log(10.0)

# stream tags for counter-based sub-seeding
STREAM_HOTSPOT = 1
STREAM_UE_PATH = 2
STREAM_SIM = 3
STREAM_MACRO = 4
STREAM_FIT = 5


class DnagaError(Exception):
    """Base class for library errors."""


class GenerationError(DnagaError):
    pass


class SamplingError(DnagaError):
    pass


class NumericalError(DnagaError):
    pass


def substream(seed, *key):
    """Independent generator for ``(seed, *key)``; same key, same stream."""
    return np.random.default_rng([int(seed), *(int(k) for k in key)])


def default_threads():
    return os.cpu_count() or 1


def ordered_map(fn, items, threads=None):
    """``list(map(fn, items))``, optionally on a thread pool. Output order is input order."""
    items = list(items)
    threads = default_threads() if threads is None else int(threads)
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))
