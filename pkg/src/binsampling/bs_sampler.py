"""Binary sampling: a backward pass that builds the tree and emits one sample,
then a forward random walk for every later sample."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import pairwise_tree
from .model import WeightTable
from .pairwise_tree import PairwiseTree

# Samples walked together per vectorised FBS chunk.
FBS_CHUNK = 1 << 16


def _coin_pass(tree: PairwiseTree, rng) -> list[np.ndarray]:
    """Draw one coin per positive internal node, deepest level first.

    Within a level the coins are drawn in ascending node order. A node with a
    single live child still consumes a variate (its rho is exactly 0 or 1).
    """
    d = tree.depth
    chosen: list[np.ndarray] = [None] * d  # type: ignore[list-item]
    for level in range(d - 1, -1, -1):
        parent = tree.levels[level]
        child1 = tree.levels[level + 1][1 << level :]
        live = np.flatnonzero(parent > 0)
        bits = np.zeros(parent.size, dtype=np.uint8)
        u = rng.uniforms(live.size)
        bits[live] = u < child1[live] / parent[live]
        chosen[level] = bits
    return chosen


def _follow_bits(chosen: list[np.ndarray]) -> int:
    j = 0
    for level, bits in enumerate(chosen):
        j += int(bits[j]) << level
    return j


def bbs(table: WeightTable, rng, mode: str = "sequential") -> tuple[int, PairwiseTree]:
    """Backward binary sampling: build the tree and draw the first sample."""
    tree = pairwise_tree.build(table, mode=mode)
    tree.chosen_bits = _coin_pass(tree, rng)
    return _follow_bits(tree.chosen_bits), tree


def bbs_explicit(table: WeightTable, rng) -> tuple[int, PairwiseTree, list[int]]:
    """Debug variant that keeps the candidate set as an explicit set of leaves.

    Consumes the same variates in the same order as :func:`bbs` and returns
    the candidate-set sizes ``[|A_{d+1}|, |A_d|, ..., |A_1|]`` as well.
    """
    tree = pairwise_tree.build(table)
    tree.chosen_bits = _coin_pass(tree, rng)
    d = tree.depth
    candidates = set(int(i) for i in np.flatnonzero(tree.levels[d] > 0))
    sizes = [len(candidates)]
    for level in range(d - 1, -1, -1):
        modulus = 1 << (level + 1)
        bits = tree.chosen_bits[level]
        for j in np.flatnonzero(tree.levels[level] > 0):
            loser = int(j) + ((1 - int(bits[j])) << level)
            candidates = {a for a in candidates if a % modulus != loser}
        sizes.append(len(candidates))
    if len(candidates) != 1:
        raise AssertionError(f"candidate set did not shrink to one leaf: {sorted(candidates)}")
    return candidates.pop(), tree, sizes


@dataclass
class BsSampler:
    """Forward sampler over a built tree.

    ``sample(count)`` hands out the pending backward-pass sample first, so a
    sampler made by :meth:`from_table` realises the full BBS-then-FBS stream.
    """

    tree: PairwiseTree
    rng: object
    first_sample: int | None = None
    walk_steps: int = 0
    _first_pending: bool = False

    @classmethod
    def from_table(cls, table: WeightTable, rng, mode: str = "sequential") -> "BsSampler":
        first, tree = bbs(table, rng, mode=mode)
        return cls(tree=tree, rng=rng, first_sample=first, _first_pending=True)

    def fbs(self) -> int:
        tree = self.tree
        if tree is None or not tree.levels:
            raise RuntimeError("sampler has no built tree")
        d = tree.depth
        u = self.rng.uniforms(d)
        levels = tree.levels
        j = 0
        for level in range(d):
            rho = levels[level + 1][j + (1 << level)] / levels[level][j]
            if u[level] < rho:
                j += 1 << level
        self.walk_steps += d
        return j

    def fbs_batch(self, count: int) -> np.ndarray:
        """``count`` forward walks; same variates and results as repeated :meth:`fbs`."""
        d = self.tree.depth
        out = np.zeros(count, dtype=np.int64)
        levels = self.tree.levels
        for start in range(0, count, FBS_CHUNK):
            n = min(FBS_CHUNK, count - start)
            u = self.rng.uniforms(n * d).reshape(n, d)
            j = np.zeros(n, dtype=np.int64)
            for level in range(d):
                rho = levels[level + 1][j + (1 << level)] / levels[level][j]
                j += (u[:, level] < rho).astype(np.int64) << level
            out[start : start + n] = j
        self.walk_steps += d * count
        return out

    def sample(self, count: int) -> np.ndarray:
        if count <= 0:
            return np.zeros(0, dtype=np.int64)
        if self._first_pending:
            self._first_pending = False
            return np.concatenate(([self.first_sample], self.fbs_batch(count - 1))).astype(np.int64)
        return self.fbs_batch(count)


def bs_stream(table: WeightTable, rng, count: int, mode: str = "sequential") -> np.ndarray:
    """One backward sample followed by ``count - 1`` forward samples."""
    if count <= 0:
        return np.zeros(0, dtype=np.int64)
    return BsSampler.from_table(table, rng, mode=mode).sample(count)
