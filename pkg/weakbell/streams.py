"""Per-cycle random streams and block-parallel ensemble execution.

Cycles are grouped into fixed blocks of BLOCK_SIZE. Block b owns a Philox
counter-based generator seeded by SeedSequence(master_seed, spawn_key=(b,)),
and cycle i takes row i mod BLOCK_SIZE of the draw matrices of block
i // BLOCK_SIZE. The randomness of a cycle is therefore a fixed function of
(master_seed, i), whatever the worker count or completion order.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, Tuple, TypeVar

import numpy as np

from .config import get_settings
from .errors import InvalidParameterError

logger = logging.getLogger(__name__)

BLOCK_SIZE = 4096

T = TypeVar("T")


def check_seed(master_seed: int) -> int:
    if isinstance(master_seed, bool) or not isinstance(master_seed, (int, np.integer)) or master_seed < 0:
        raise InvalidParameterError(
            f"master seed must be a non-negative integer, got {master_seed!r}",
            field_path=["seed"],
            expected="integer >= 0",
            actual=master_seed,
        )
    return int(master_seed)


def block_generator(master_seed: int, block: int) -> np.random.Generator:
    """Counter-based generator for one block of cycles"""
    sequence = np.random.SeedSequence(entropy=check_seed(master_seed), spawn_key=(block,))
    return np.random.Generator(np.random.Philox(sequence))


def block_ranges(n: int) -> List[Tuple[int, int, int]]:
    """(block, first cycle, end cycle) for n cycles"""
    return [(block, start, min(start + BLOCK_SIZE, n))
            for block, start in enumerate(range(0, n, BLOCK_SIZE))]


def draw_matrices(rng: np.random.Generator, size: int, n_uniform: int, n_normal: int,
                  rows: int = BLOCK_SIZE) -> Tuple[np.ndarray, np.ndarray]:
    """Uniform and normal draws for the first size cycles of a block, one row per cycle.

    The full rows x n matrices are always drawn, so the normals of a short
    block start at the same stream offset as those of a full one.
    """
    if size > rows:
        raise InvalidParameterError(f"block of {size} cycles exceeds {rows} rows", field_path=["size"],
                                    expected=f"<= {rows}", actual=size)
    uniforms = rng.random((rows, n_uniform))
    normals = rng.standard_normal((rows, n_normal))
    return uniforms[:size], normals[:size]


def run_blocks(n: int, master_seed: int,
               work: Callable[[np.random.Generator, int], T],
               workers: Optional[int] = None) -> List[T]:
    """Run work(generator, block_size) for every block; results in block order"""
    if n < 1:
        raise InvalidParameterError(f"ensemble size must be >= 1, got {n}", field_path=["N"], actual=n)
    check_seed(master_seed)
    ranges = block_ranges(n)
    workers = workers or get_settings().workers
    logger.debug("running %d cycles in %d blocks on %d workers", n, len(ranges), workers)

    def _run(block_range: Tuple[int, int, int]) -> T:
        block, start, stop = block_range
        return work(block_generator(master_seed, block), stop - start)

    if workers == 1 or len(ranges) == 1:
        return [_run(r) for r in ranges]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run, ranges))
