"""Level-indexed pairwise summation tree.

Level ``l`` holds ``2**l`` node weights indexed by the integer value of the
low ``l`` bits of a leaf index. Node ``j`` at level ``l`` has children ``j``
(bit 0) and ``j + 2**l`` (bit 1) at level ``l + 1``, so parents are formed by
adding the two halves of the child level elementwise.
"""

from __future__ import annotations

import os
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import BinaryIO

import numpy as np

from .model import BitPath, WeightTable

# Levels narrower than this are summed on the calling thread.
PARALLEL_MIN_SLOTS = 1 << 15

DUMP_MAGIC = b"PWTR"
DUMP_VERSION = 1


@dataclass
class PairwiseTree:
    levels: list[np.ndarray]
    build_mode: str = "sequential"
    chosen_bits: list[np.ndarray] | None = field(default=None, repr=False)

    @property
    def depth(self) -> int:
        return len(self.levels) - 1

    @property
    def total(self) -> float:
        return float(self.levels[0][0])

    @property
    def n_leaves(self) -> int:
        return self.levels[-1].size

    def node(self, level: int, j: int) -> float:
        return float(self.levels[level][j])

    def leaf_weights(self) -> np.ndarray:
        return self.levels[self.depth]


def _padded_leaves(table: WeightTable) -> np.ndarray:
    leaves = np.zeros(1 << table.depth, dtype=np.float64)
    leaves[: table.weights.size] = table.weights
    return leaves


def _sum_level_sequential(child: np.ndarray) -> np.ndarray:
    half = child.size // 2
    return child[:half] + child[half:]


def _sum_level_parallel(child: np.ndarray, pool: ThreadPoolExecutor, workers: int) -> np.ndarray:
    half = child.size // 2
    if half < PARALLEL_MIN_SLOTS:
        return _sum_level_sequential(child)
    out = np.empty(half, dtype=child.dtype)
    bounds = np.linspace(0, half, workers + 1).astype(int)

    def work(lo, hi):
        np.add(child[lo:hi], child[half + lo : half + hi], out=out[lo:hi])

    list(pool.map(work, bounds[:-1], bounds[1:]))
    return out


_POOL: ThreadPoolExecutor | None = None
_POOL_WORKERS = 0


def _shared_pool(workers: int) -> ThreadPoolExecutor:
    global _POOL, _POOL_WORKERS
    if _POOL is None or _POOL_WORKERS != workers:
        if _POOL is not None:
            _POOL.shutdown(wait=False)
        _POOL = ThreadPoolExecutor(max_workers=workers, thread_name_prefix="pairwise")
        _POOL_WORKERS = workers
    return _POOL


def build(table: WeightTable, mode: str = "sequential", workers: int | None = None) -> PairwiseTree:
    """Pairwise-sum ``table`` into a tree.

    ``mode="parallel"`` splits the parent slots of each wide level across a
    thread pool. Every parent is still ``child0 + child1`` in the same order,
    so both modes return bit-identical levels.
    """
    if mode not in ("sequential", "parallel"):
        raise ValueError(f"unknown build mode {mode!r}")
    leaves = _padded_leaves(table)
    d = table.depth
    levels: list[np.ndarray] = [None] * (d + 1)  # type: ignore[list-item]
    levels[d] = leaves
    if mode == "parallel":
        workers = workers or max(4, os.cpu_count() or 1)
        pool = _shared_pool(workers)
        for level in range(d - 1, -1, -1):
            levels[level] = _sum_level_parallel(levels[level + 1], pool, workers)
    else:
        for level in range(d - 1, -1, -1):
            levels[level] = _sum_level_sequential(levels[level + 1])
    for arr in levels:
        arr.setflags(write=False)
    return PairwiseTree(levels=levels, build_mode=mode)


def branch_prob(tree: PairwiseTree, level: int, node: int) -> float:
    """Probability of taking the 1-child at ``(level, node)``."""
    if not 0 <= level < tree.depth:
        raise ValueError(f"level {level} is not an internal level of a depth-{tree.depth} tree")
    parent = tree.levels[level][node]
    if not parent > 0:
        raise ValueError(f"node ({level}, {node}) has zero weight")
    return float(tree.levels[level + 1][node + (1 << level)] / parent)


def leaf_prob_product(tree: PairwiseTree, path: BitPath) -> float:
    """Product of branch probabilities along ``path``; 0 past a dead branch.

    The 0-branch factor is taken as ``child0 / parent``, which equals
    ``1 - rho`` exactly in real arithmetic and avoids the cancellation of
    forming ``1 - rho`` when ``rho`` is close to one.
    """
    if path.depth != tree.depth:
        raise ValueError(f"path depth {path.depth} does not match tree depth {tree.depth}")
    prob = 1.0
    j = 0
    for level, bit in enumerate(path.bits):
        parent = tree.levels[level][j]
        if parent <= 0:
            return 0.0
        j += bit << level
        prob *= tree.levels[level + 1][j] / parent
    return float(prob)


def dump_levels(tree: PairwiseTree, fh: BinaryIO) -> None:
    """Debug dump: 16-byte header then every level as little-endian doubles."""
    fh.write(struct.pack("<4sIII", DUMP_MAGIC, DUMP_VERSION, tree.depth, 0))
    for arr in tree.levels:
        fh.write(arr.astype("<f8").tobytes())


def load_levels(fh: BinaryIO) -> PairwiseTree:
    magic, version, d, _ = struct.unpack("<4sIII", fh.read(16))
    if magic != DUMP_MAGIC or version != DUMP_VERSION:
        raise ValueError("not a pairwise tree dump")
    levels = []
    for level in range(d + 1):
        n = 1 << level
        levels.append(np.frombuffer(fh.read(8 * n), dtype="<f8").astype(np.float64))
    return PairwiseTree(levels=levels)
