"""Target distributions used by the comparison examples and benchmarks."""

from __future__ import annotations

import numpy as np
from scipy import stats

from .model import WeightTable


def uniform(n_max: int) -> WeightTable:
    return WeightTable(np.full(n_max + 1, 1.0 / (n_max + 1)), normalized=True)


def zipf(n_max: int, s: float = 3.0) -> WeightTable:
    """Weights proportional to ``(i + 1) ** -s``, left unnormalized."""
    return WeightTable((np.arange(n_max + 1, dtype=np.float64) + 1.0) ** -s)


def reversed_zipf(n_max: int, s: float = 3.0) -> WeightTable:
    """Non-decreasing mirror of :func:`zipf`: weight ``(N - i + 1) ** -s``."""
    return WeightTable((n_max - np.arange(n_max + 1, dtype=np.float64) + 1.0) ** -s)


def binomial(n_max: int, gamma: float) -> WeightTable:
    return WeightTable(stats.binom.pmf(np.arange(n_max + 1), n_max, gamma))


def two_level(n_max: int, eps: float) -> WeightTable:
    """Mass ``1 - 2 eps / (N + 1)`` at zero, the rest spread evenly; mean ``eps``."""
    if n_max < 1 or not 0 < eps < (n_max + 1) / 2:
        raise ValueError("need N >= 1 and 0 < eps < (N + 1) / 2")
    w = np.full(n_max + 1, 2.0 * eps / (n_max * (n_max + 1)))
    w[0] = 1.0 - 2.0 * eps / (n_max + 1)
    return WeightTable(w, normalized=True)


FAMILIES = {
    "uniform": lambda n, p: uniform(n),
    "zipf": lambda n, p: zipf(n, p.get("s", 3.0)),
    "reversed_zipf": lambda n, p: reversed_zipf(n, p.get("s", 3.0)),
    "binomial": lambda n, p: binomial(n, p.get("gamma", 0.3)),
    "two_level": lambda n, p: two_level(n, p.get("eps", 0.5)),
}


def make(family: str, n_max: int, **params) -> WeightTable:
    try:
        return FAMILIES[family](n_max, params)
    except KeyError:
        raise ValueError(f"unknown distribution family {family!r}") from None
