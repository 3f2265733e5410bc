"""Reproducible Monte Carlo plumbing.

All stochastic estimates draw from a counter-based generator (Philox)
keyed by ``(seed, chunk_index)`` over fixed-size chunks, so a result is a
pure function of the seed and is bit-identical no matter how many worker
threads process the chunks.  ``STARKIT_THREADS`` caps the thread pool.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

CHUNK = 4096


def thread_count() -> int:
    raw = os.environ.get("STARKIT_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def chunk_rng(seed: int, chunk_index: int) -> np.random.Generator:
    key = np.array([np.uint64(seed & 0xFFFFFFFFFFFFFFFF),
                    np.uint64(chunk_index)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def uniform_chunk(seed: int, chunk_index: int, size: int, dim: int = 2) -> np.ndarray:
    return chunk_rng(seed, chunk_index).random((size, dim))


def stratified_chunk(seed: int, chunk_index: int, start: int, size: int,
                     grid: int) -> np.ndarray:
    """Jittered-grid points for global sample indices [start, start+size)."""
    u = chunk_rng(seed, chunk_index).random((size, 2))
    idx = np.arange(start, start + size)
    cell = idx % (grid * grid)
    cx, cy = cell % grid, cell // grid
    return np.column_stack([(cx + u[:, 0]) / grid, (cy + u[:, 1]) / grid])


def map_chunks(worker, n_chunks: int):
    """Apply worker(chunk_index) for every chunk; results in index order.

    The reduction order is fixed by chunk index, so the output does not
    depend on the degree of parallelism.
    """
    threads = thread_count()
    if threads == 1 or n_chunks <= 1:
        return [worker(c) for c in range(n_chunks)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(worker, range(n_chunks)))


def indicator_estimate(hit_worker, samples: int, seed: int,
                       stratified: bool = False):
    """Mean/stderr of a {0,1} indicator over `samples` points in [0,1)^2.

    hit_worker(points) -> boolean array.  Returns (mean, stderr) with the
    binomial standard error (conservative for stratified draws).
    """
    if samples <= 0:
        raise ValueError("samples must be positive")
    n_chunks = math.ceil(samples / CHUNK)
    grid = max(1, int(math.isqrt(samples)))

    def work(c):
        size = min(CHUNK, samples - c * CHUNK)
        if stratified:
            pts = stratified_chunk(seed, c, c * CHUNK, size, grid)
        else:
            pts = uniform_chunk(seed, c, size)
        return int(np.count_nonzero(hit_worker(pts)))

    hits = sum(map_chunks(work, n_chunks))
    p = hits / samples
    stderr = math.sqrt(max(p * (1.0 - p), 0.0) / samples)
    return p, stderr
