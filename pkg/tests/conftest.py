import numpy as np
import pytest

from binsampling.model import WeightTable


@pytest.fixture
def dyadic_table():
    return WeightTable([0.5, 0.25, 0.125, 0.125])


def random_table(rng: np.random.Generator, n_max: int, zero_frac: float = 0.0) -> WeightTable:
    w = rng.random(n_max + 1)
    if zero_frac:
        w[rng.random(n_max + 1) < zero_frac] = 0.0
        if not w.any():
            w[rng.integers(n_max + 1)] = 1.0
    return WeightTable(w)


@pytest.fixture
def np_rng():
    return np.random.default_rng(20240611)
