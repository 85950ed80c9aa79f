"""Keyed random streams.

Each replication (or seed, or innovation half-line) owns a Philox stream
whose key is derived from ``(master seed, stream label, index)`` through
``SeedSequence``.  Draws for replication ``i`` therefore never depend on
how replications are grouped into chunks or spread over threads, and a
stream read sequentially is prefix-stable: the first ``k`` draws are the
same whatever the total length requested.
"""

from __future__ import annotations

import zlib
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence

import numpy as np

MASK64 = (1 << 64) - 1


def _label_key(label: str | int) -> int:
    if isinstance(label, int):
        return label & 0xFFFFFFFF
    return zlib.crc32(label.encode())


def stream(seed: int, label: str | int, index: int = 0) -> np.random.Generator:
    """Generator for ``(seed, label, index)``; ``seed`` is any 64-bit integer."""
    if index < 0:
        raise ValueError("stream index must be nonnegative")
    ss = np.random.SeedSequence([int(seed) & MASK64, _label_key(label), int(index)])
    return np.random.Generator(np.random.Philox(ss))


def uniforms(seed: int, label: str | int, indices: Sequence[int], n: int) -> np.ndarray:
    """``len(indices) x n`` uniforms in ``(0, 1)``; row ``i`` is stream ``indices[i]``."""
    out = np.empty((len(indices), n))
    for row, idx in enumerate(indices):
        out[row] = stream(seed, label, idx).random(n)
    # keep quantile maps away from their infinite endpoints
    np.maximum(out, np.finfo(float).tiny, out=out)
    return out


DEFAULT_CHUNK = 16


def chunked(n_items: int, chunk: int = DEFAULT_CHUNK) -> list[range]:
    return [range(lo, min(lo + chunk, n_items)) for lo in range(0, n_items, chunk)]


def map_chunks(task: Callable[[range], np.ndarray], n_items: int, threads: int = 1,
               chunk: int = DEFAULT_CHUNK) -> np.ndarray:
    """Run ``task`` on fixed chunks of ``range(n_items)`` and concatenate in order.

    Chunk boundaries depend only on ``chunk``, so results are identical for
    any thread count.
    """
    parts = chunked(n_items, chunk)
    if threads <= 1 or len(parts) == 1:
        results = [task(p) for p in parts]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(task, parts))
    return np.concatenate(results) if results else np.empty(0)
