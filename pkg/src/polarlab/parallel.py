"""Deterministic chunked evaluation.

Work is split into fixed-size chunks whose boundaries do not depend on the
worker count, and per-chunk results are reduced in chunk order. A run with 8
workers is therefore bit-identical to a serial run.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence

CHUNK = 8192

_ENV_WORKERS = "POLARLAB_WORKERS"


def default_workers() -> int:
    try:
        value = int(os.environ.get(_ENV_WORKERS, "1"))
    except ValueError:
        return 1
    return max(1, value)


def chunk_ranges(total: int, chunk: int = CHUNK) -> list[tuple[int, int]]:
    return [(lo, min(lo + chunk, total)) for lo in range(0, total, chunk)]


def map_chunks(
    fn: Callable[[int, int], object],
    total: int,
    workers: int | None = None,
    chunk: int = CHUNK,
) -> list[object]:
    """Apply ``fn(lo, hi)`` to fixed chunks of ``range(total)``, in chunk order.

    ``fn`` must be a pure function of its range; with ``workers > 1`` the
    chunks run on a thread pool (numpy releases the GIL) but the returned
    list is always ordered by chunk index.
    """
    ranges = chunk_ranges(total, chunk)
    if not ranges:
        return []
    nworkers = default_workers() if workers is None else max(1, int(workers))
    if nworkers <= 1 or len(ranges) == 1:
        return [fn(lo, hi) for lo, hi in ranges]
    with ThreadPoolExecutor(max_workers=min(nworkers, len(ranges))) as pool:
        futures = [pool.submit(fn, lo, hi) for lo, hi in ranges]
        return [f.result() for f in futures]


def resolve_workers(workers: int | None) -> int:
    return default_workers() if workers is None else max(1, int(workers))


__all__: Sequence[str] = (
    "CHUNK",
    "chunk_ranges",
    "default_workers",
    "map_chunks",
    "resolve_workers",
)
