#!/usr/bin/env python3
"""
Parallel replicate runner with reproducible random streams.

Replicates are grouped into fixed-size blocks. Block b draws from a Philox
stream keyed by (seed, b), so replicate i sees the same numbers whatever
the thread count or completion order.
"""

import logging
from concurrent.futures import ThreadPoolExecutor, as_completed
from typing import Callable, List, Optional, Tuple, TypeVar

import numpy as np
from tqdm import tqdm

from settings import REPLICATE_BLOCK_SIZE, get_thread_count

logger = logging.getLogger(__name__)

T = TypeVar("T")

MASK_64 = (1 << 64) - 1


def block_stream(seed: int, block: int) -> np.random.Generator:
    """Counter-based stream for one replicate block."""
    sequence = np.random.SeedSequence(int(seed) & MASK_64, spawn_key=(int(block),))
    return np.random.Generator(np.random.Philox(sequence))


def replicate_blocks(reps: int, block_size: int = REPLICATE_BLOCK_SIZE) -> List[Tuple[int, int, int]]:
    """(block, start, stop) triples covering replicates 0..reps-1."""
    return [(b, start, min(start + block_size, reps))
            for b, start in enumerate(range(0, reps, block_size))]


def run_blocks(task: Callable[[int, int, int, np.random.Generator], T],
               reps: int,
               seed: int,
               threads: Optional[int] = None,
               desc: str = "replicates",
               block_size: int = REPLICATE_BLOCK_SIZE) -> List[T]:
    """
    Run `task(block, start, stop, rng)` over every replicate block.

    Args:
        task: Callable returning the result for replicates start..stop-1
        reps: Total number of replicates
        seed: Master seed
        threads: Requested worker count (capped by PERMSPEC_THREADS)
        desc: Progress bar label
        block_size: Replicates per random stream

    Returns:
        Block results in block order
    """
    blocks = replicate_blocks(reps, block_size)
    workers = get_thread_count(threads)
    logger.info(f"Running {reps} {desc} in {len(blocks)} blocks on {workers} thread(s)")

    results = {}
    if workers == 1 or len(blocks) <= 1:
        for b, start, stop in tqdm(blocks, desc=desc, disable=None, leave=False):
            results[b] = task(b, start, stop, block_stream(seed, b))
    else:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            futures = {executor.submit(task, b, start, stop, block_stream(seed, b)): b
                       for b, start, stop in blocks}
            for future in tqdm(as_completed(futures), total=len(futures), desc=desc,
                               disable=None, leave=False):
                results[futures[future]] = future.result()

    return [results[b] for b, _, _ in blocks]


def run_replicates(task: Callable[[int, np.random.Generator], T],
                   reps: int,
                   seed: int,
                   threads: Optional[int] = None,
                   desc: str = "replicates") -> List[T]:
    """Run `task(replicate, rng)` once per replicate; results in replicate order."""

    def block_task(block, start, stop, rng):
        return [task(i, rng) for i in range(start, stop)]

    ordered = []
    for block_results in run_blocks(block_task, reps, seed, threads=threads, desc=desc):
        ordered.extend(block_results)
    return ordered
