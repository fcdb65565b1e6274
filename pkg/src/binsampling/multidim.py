"""Mixed-radix flattening of K-dimensional supports and truncated sampling
with a total-variation certificate."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .bs_sampler import BsSampler
from .model import ValidationError, WeightTable


@dataclass(frozen=True)
class Shape:
    """Extents ``(M_1 + 1, ..., M_K + 1)``; the first coordinate varies fastest."""

    extents: tuple[int, ...]

    def __post_init__(self):
        ext = tuple(int(e) for e in self.extents)
        if not ext or any(e < 1 for e in ext):
            raise ValueError(f"extents must be positive, got {self.extents}")
        if math.prod(ext) > np.iinfo(np.int64).max:
            raise ValueError("shape too large for a 64-bit index")
        object.__setattr__(self, "extents", ext)

    @property
    def strides(self) -> tuple[int, ...]:
        out = [1]
        for e in self.extents[:-1]:
            out.append(out[-1] * e)
        return tuple(out)

    @property
    def size(self) -> int:
        return math.prod(self.extents)

    def __iter__(self):
        """Multi-indices in flattened order."""
        for i in range(self.size):
            yield unflatten(self, i)


def flatten(shape: Shape, m: Sequence[int]) -> int:
    if len(m) != len(shape.extents):
        raise ValueError(f"multi-index {tuple(m)} has wrong length for shape {shape.extents}")
    index = 0
    for mk, ext, stride in zip(m, shape.extents, shape.strides):
        if not 0 <= mk < ext:
            raise ValueError(f"component {mk} out of range [0, {ext - 1}]")
        index += int(mk) * stride
    return index


def unflatten(shape: Shape, i: int) -> tuple[int, ...]:
    if not 0 <= i < shape.size:
        raise ValueError(f"index {i} out of range for shape {shape.extents}")
    out = []
    for ext in shape.extents:
        i, r = divmod(int(i), ext)
        out.append(r)
    return tuple(out)


@dataclass(frozen=True)
class TruncationReport:
    kept_mass: float
    tail_bound_input: float | None = None

    @property
    def tv_bound(self) -> float | None:
        if self.tail_bound_input is None:
            return None
        return 2.0 * self.tail_bound_input / self.kept_mass

    def as_dict(self) -> dict:
        return {
            "kept_mass": self.kept_mass,
            "tail_bound_input": self.tail_bound_input,
            "tv_bound": self.tv_bound,
        }


class TruncatedSampler:
    """Binary sampler over a finite support, returning multi-indices."""

    def __init__(self, shape: Shape, bs: BsSampler):
        self.shape = shape
        self.bs = bs

    def sample_flat(self, count: int) -> np.ndarray:
        return self.bs.sample(count)

    def sample(self, count: int) -> list[tuple[int, ...]]:
        return [unflatten(self.shape, int(i)) for i in self.sample_flat(count)]


def _as_multi(m) -> tuple[int, ...]:
    if isinstance(m, (int, np.integer)):
        return (int(m),)
    return tuple(int(x) for x in m)


def truncated_sampler(
    weight_fn: Callable[[tuple[int, ...]], float],
    support: Iterable,
    rng,
    tail_bound: float | None = None,
    shape: Shape | None = None,
) -> tuple[TruncatedSampler, TruncationReport]:
    """Sample ``q(m) = w(m) / L~`` over a finite support.

    Without an explicit ``shape`` the bounding box of the support is used.
    The table is laid out in flattened order with zeros off the support, so
    support points are enumerated by increasing flattened index. ``tail_bound``
    is a caller-supplied upper bound on the weight left outside the support.
    """
    points = sorted({_as_multi(m) for m in support})
    if not points:
        raise ValidationError("support must be non-empty")
    if shape is None:
        k = len(points[0])
        if any(len(p) != k for p in points):
            raise ValidationError("support multi-indices have mixed dimensions")
        shape = Shape(tuple(max(p[i] for p in points) + 1 for i in range(k)))
    if tail_bound is not None and not (math.isfinite(tail_bound) and tail_bound >= 0):
        raise ValidationError("tail bound must be a finite non-negative number")

    weights = np.zeros(shape.size, dtype=np.float64)
    for m in points:
        w = float(weight_fn(m))
        if not (math.isfinite(w) and w > 0):
            raise ValidationError(f"weight at {m} must be positive and finite, got {w}")
        weights[flatten(shape, m)] = w
    table = WeightTable(weights)
    bs = BsSampler.from_table(table, rng)
    return TruncatedSampler(shape, bs), TruncationReport(kept_mass=bs.tree.total, tail_bound_input=tail_bound)


def tv_distance(p: np.ndarray, q: np.ndarray) -> float:
    """``sum |p - q|`` over a common finite support (q is zero off its support)."""
    return float(np.abs(np.asarray(p, dtype=np.float64) - np.asarray(q, dtype=np.float64)).sum())


def truncation_tv(full_weights: np.ndarray, kept: np.ndarray) -> float:
    """Brute-force distance between the full target and its truncation."""
    w = np.asarray(full_weights, dtype=np.float64)
    kept = np.asarray(kept, dtype=bool)
    p = w / w.sum()
    q = np.where(kept, w, 0.0)
    q = q / q.sum()
    return float(np.abs(p[kept] - q[kept]).sum() + p[~kept].sum())


def load_descriptor(text: str) -> dict:
    """Parse ``{"extents": [...], "support": "all" | [...], "tail_bound": x}``."""
    doc = json.loads(text)
    if not isinstance(doc, dict) or "extents" not in doc:
        raise ValueError('descriptor must be an object with "extents"')
    shape = Shape(tuple(doc["extents"]))
    support = doc.get("support", "all")
    if support == "all":
        points = list(shape)
    elif isinstance(support, list):
        points = [_as_multi(m) for m in support]
        for m in points:
            flatten(shape, m)
    else:
        raise ValueError('"support" must be "all" or a list of multi-indices')
    tail = doc.get("tail_bound")
    return {"shape": shape, "support": points, "tail_bound": None if tail is None else float(tail)}
