"""Inverse-transform baselines: linear-scan ITS and binary-search ITS over a
heap-labelled complete tree holding inorder prefix sums."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import WeightTable


def _u_scale(table: WeightTable, accumulated_total: float) -> float:
    # A caller-normalized table is sampled with the raw variate, so any
    # rounding drift in the accumulated total shows up as an anomaly.
    return 1.0 if table.normalized else accumulated_total


@dataclass
class CumulativeTable:
    cum: np.ndarray
    scale: float
    comparisons: int = 0
    draws: int = 0
    anomalies: int = 0

    @property
    def n_max(self) -> int:
        return self.cum.size - 1


def build_cumulative(table: WeightTable) -> CumulativeTable:
    """Running sums accumulated left to right (not pairwise)."""
    cum = np.add.accumulate(table.weights)
    cum.setflags(write=False)
    return CumulativeTable(cum=cum, scale=_u_scale(table, float(cum[-1])))


def scan_forward(ct: CumulativeTable, u: float) -> int:
    """First ``i`` with ``u <= cum[i]``, counting one comparison per cell."""
    target = u * ct.scale
    cum = ct.cum
    n = cum.size - 1
    ct.draws += 1
    for i in range(n + 1):
        ct.comparisons += 1
        if target <= cum[i]:
            return i
    ct.anomalies += 1
    return n


def scan_backward(ct: CumulativeTable, u: float) -> int:
    """Scan ``i = N, N-1, ...`` and return the first with ``u > cum[i-1]``."""
    target = u * ct.scale
    cum = ct.cum
    n = cum.size - 1
    ct.draws += 1
    if target > cum[n]:
        ct.anomalies += 1
    for i in range(n, 0, -1):
        ct.comparisons += 1
        if target > cum[i - 1]:
            return i
    ct.comparisons += 1  # u > 0 always holds for i = 0
    return 0


def locate_forward(ct: CumulativeTable, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised :func:`scan_forward`: indices and per-draw comparison counts."""
    target = np.asarray(u) * ct.scale
    idx = np.searchsorted(ct.cum, target, side="left")
    over = idx > ct.n_max
    idx = np.where(over, ct.n_max, idx)
    comps = idx + 1
    ct.draws += idx.size
    ct.comparisons += int(comps.sum())
    ct.anomalies += int(over.sum())
    return idx.astype(np.int64), comps


def locate_backward(ct: CumulativeTable, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    target = np.asarray(u) * ct.scale
    # number of cum[0..N-1] strictly below target == largest i with cum[i-1] < target
    idx = np.searchsorted(ct.cum[:-1], target, side="left")
    comps = ct.n_max + 1 - idx
    ct.draws += idx.size
    ct.comparisons += int(comps.sum())
    ct.anomalies += int((target > ct.cum[-1]).sum())
    return idx.astype(np.int64), comps


def its_forward(ct: CumulativeTable, rng) -> int:
    return scan_forward(ct, rng.uniform())


def its_backward(ct: CumulativeTable, rng) -> int:
    return scan_backward(ct, rng.uniform())


@dataclass
class InorderCdfTree:
    """Complete tree on heap labels ``0..2N``; leaf ``N + i`` holds weight ``i``.

    Every non-leaf stores the total weight of the leaves that precede it in
    inorder. ``inorder`` keeps the visiting order of the labels.
    """

    node_values: np.ndarray
    n_max: int
    total: float
    scale: float
    inorder: list[int] = field(repr=False)
    comparisons: int = 0
    draws: int = 0

    @property
    def height(self) -> int:
        return int(2 * self.n_max + 1).bit_length() - 1


def inorder_labels(n_nodes: int) -> list[int]:
    order = []
    stack = []
    k = 0
    while stack or k < n_nodes:
        while k < n_nodes:
            stack.append(k)
            k = 2 * k + 1
        k = stack.pop()
        order.append(k)
        k = 2 * k + 2
    return order


def build_inorder_tree(table: WeightTable) -> InorderCdfTree:
    n = table.n_max
    values = np.zeros(2 * n + 1, dtype=np.float64)
    values[n:] = table.weights
    order = inorder_labels(2 * n + 1)
    running = 0.0
    for k in order:
        if k >= n:
            running += values[k]
        else:
            values[k] = running
    values.setflags(write=False)
    return InorderCdfTree(
        node_values=values,
        n_max=n,
        total=running,
        scale=_u_scale(table, running),
        inorder=order,
    )


def bsits_descend(tree: InorderCdfTree, u: float) -> int:
    target = u * tree.scale
    values = tree.node_values
    n = tree.n_max
    k = 0
    tree.draws += 1
    while k < n:
        tree.comparisons += 1
        k = 2 * k + 1 if target <= values[k] else 2 * k + 2
    return k - n


def bsits_locate(tree: InorderCdfTree, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised descent: leaf indices and comparisons per draw."""
    target = np.asarray(u) * tree.scale
    values = tree.node_values
    n = tree.n_max
    k = np.zeros(target.size, dtype=np.int64)
    comps = np.zeros(target.size, dtype=np.int64)
    active = k < n
    while active.any():
        ka = k[active]
        go_left = target[active] <= values[ka]
        k[active] = np.where(go_left, 2 * ka + 1, 2 * ka + 2)
        comps[active] += 1
        active = k < n
    tree.draws += target.size
    tree.comparisons += int(comps.sum())
    return k - n, comps


def bsits_sample(tree: InorderCdfTree, rng) -> int:
    return bsits_descend(tree, rng.uniform())


def leaf_intervals(tree: InorderCdfTree) -> np.ndarray:
    """Preimage ``(lo, hi]`` of each index, read off the descent comparisons.

    Shape ``(N + 1, 2)`` in the same units as the stored values.
    """
    n = tree.n_max
    out = np.zeros((n + 1, 2))
    stack = [(0, 0.0, tree.total)]
    while stack:
        k, lo, hi = stack.pop()
        if k >= n:
            out[k - n] = (lo, hi)
            continue
        v = tree.node_values[k]
        stack.append((2 * k + 1, lo, min(hi, v)))
        stack.append((2 * k + 2, max(lo, v), hi))
    return out


class ItsSampler:
    """Batch interface over the linear-scan and binary-search baselines."""

    def __init__(self, table: WeightTable, rng, method: str = "its_forward"):
        self.method = method
        self.rng = rng
        if method in ("its_forward", "its_backward"):
            self.structure = build_cumulative(table)
        elif method == "bsits":
            self.structure = build_inorder_tree(table)
        else:
            raise ValueError(f"unknown ITS method {method!r}")

    def sample(self, count: int) -> np.ndarray:
        u = self.rng.uniforms(count)
        if self.method == "its_forward":
            return locate_forward(self.structure, u)[0]
        if self.method == "its_backward":
            return locate_backward(self.structure, u)[0]
        return bsits_locate(self.structure, u)[0]

    @property
    def mean_comparisons(self) -> float:
        s = self.structure
        return s.comparisons / s.draws if s.draws else float("nan")
