"""Deterministic work distribution.

Results are always merged in submission order, so the numeric output is
independent of the worker count; workers only matter for wall time.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor


def det_map(fn, items, workers: int = 0) -> list:
    """Map fn over items, preserving order; workers <= 1 runs serially."""
    if workers is None or workers <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def chunked(seq, size: int):
    """Yield contiguous chunks of a sequence."""
    for i in range(0, len(seq), size):
        yield seq[i:i + size]
