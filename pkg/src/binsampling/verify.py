"""Oracles and meters: exact path enumeration, chi-square goodness of fit,
rounding-error measurement and comparison-cost checks."""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy import stats

from . import bs_sampler
from .its_baselines import build_cumulative, locate_backward, locate_forward
from .model import ScriptedStream, WeightTable, forcing_variate, pairwise_total
from .pairwise_tree import PairwiseTree, build

MAX_ENUM_DEPTH = 24
MIN_EXPECTED_PER_CELL = 5.0
MIN_SAMPLES_PER_BIN = 50


class GofPreconditionError(ValueError):
    def __init__(self, message: str, min_count: int):
        super().__init__(message)
        self.min_count = min_count


def exact_leaf_distribution(tree: PairwiseTree) -> np.ndarray:
    """Probability of ending at each leaf, from branch-probability products."""
    if tree.depth > MAX_ENUM_DEPTH:
        raise ValueError(f"depth {tree.depth} exceeds enumeration budget {MAX_ENUM_DEPTH}")
    prob = np.ones(1)
    for level in range(tree.depth):
        parent = tree.levels[level]
        half = parent.size
        child = tree.levels[level + 1]
        live = parent > 0
        safe = np.where(live, parent, 1.0)
        r0 = np.where(live, child[:half] / safe, 0.0)
        r1 = np.where(live, child[half:] / safe, 0.0)
        prob = np.concatenate((prob * r0, prob * r1))
    return prob


def enumerate_bbs(table: WeightTable) -> tuple[np.ndarray, list[list[int]]]:
    """Run the explicit-set backward pass under every coin assignment.

    Each assignment is weighted by the product of its coin probabilities.
    Returns the survivor distribution over leaves and every candidate-set
    size trace seen.
    """
    tree = build(table)
    d = tree.depth
    nodes = []
    for level in range(d - 1, -1, -1):
        for j in np.flatnonzero(tree.levels[level] > 0):
            parent = tree.levels[level][j]
            c0 = tree.levels[level + 1][j]
            c1 = tree.levels[level + 1][j + (1 << level)]
            nodes.append((c1 / parent, c0 / parent))
    survivor = np.zeros(1 << d)
    traces = []
    for bits in itertools.product((0, 1), repeat=len(nodes)):
        weight = 1.0
        for b, (rho, rho_bar) in zip(bits, nodes):
            weight *= rho if b else rho_bar
        if weight == 0.0:
            continue
        script = [forcing_variate(b, rho) for b, (rho, _) in zip(bits, nodes)]
        rng = ScriptedStream(script)
        leaf, _, sizes = bs_sampler.bbs_explicit(table, rng)
        assert rng.remaining == 0
        survivor[leaf] += weight
        traces.append(sizes)
    return survivor, traces


@dataclass
class GofReport:
    sample_count: int
    bins: list[int]
    chi_square: float
    degrees_of_freedom: int
    p_value: float
    alpha: float
    cells: int

    @property
    def passed(self) -> bool:
        return self.p_value > self.alpha

    def to_json(self) -> str:
        doc = asdict(self)
        doc["passed"] = self.passed
        return json.dumps(doc)


def min_gof_count(table: WeightTable) -> int:
    return MIN_SAMPLES_PER_BIN * (table.n_max + 1)


def _pool_cells(expected: np.ndarray) -> np.ndarray:
    """Cell id per bin, merging neighbours until every cell expects >= 5."""
    cell = np.zeros(expected.size, dtype=np.int64)
    current, acc = 0, 0.0
    for i, e in enumerate(expected):
        cell[i] = current
        acc += e
        if acc >= MIN_EXPECTED_PER_CELL:
            current += 1
            acc = 0.0
    if acc > 0 and current > 0:
        # fold an under-filled last cell into its predecessor
        cell[cell == current] = current - 1
    return cell


def chi_square_report(samples: np.ndarray, table: WeightTable, alpha: float = 0.001) -> GofReport:
    n_bins = table.n_max + 1
    samples = np.asarray(samples)
    count = samples.size
    if samples.size and (samples.min() < 0 or samples.max() >= n_bins):
        raise ValueError("sample outside the support")
    observed = np.bincount(samples, minlength=n_bins)
    probs = table.probabilities()
    if np.any(observed[probs == 0] > 0):
        return GofReport(count, observed.tolist(), math.inf, 0, 0.0, alpha, 0)

    live = probs > 0
    expected = count * probs[live]
    cell = _pool_cells(expected)
    n_cells = int(cell.max()) + 1
    obs_c = np.bincount(cell, weights=observed[live], minlength=n_cells)
    exp_c = np.bincount(cell, weights=expected, minlength=n_cells)
    if n_cells < 2:
        return GofReport(count, observed.tolist(), 0.0, 0, 1.0, alpha, n_cells)
    chi2 = float(np.sum((obs_c - exp_c) ** 2 / exp_c))
    dof = n_cells - 1
    return GofReport(count, observed.tolist(), chi2, dof, float(stats.chi2.sf(chi2, dof)), alpha, n_cells)


def gof_test(sampler, table: WeightTable, count: int, alpha: float = 0.001) -> GofReport:
    """Pearson chi-square of ``sampler.sample(count)`` against ``table``.

    Bins expecting fewer than five hits are pooled with their neighbours in
    index order; a hit on a zero-weight bin fails outright.
    """
    need = min_gof_count(table)
    if count < need:
        raise GofPreconditionError(
            f"need at least {need} samples (50 per bin) for N = {table.n_max}, got {count}", need
        )
    return chi_square_report(sampler.sample(count), table, alpha)


class ExactSampler:
    """Inversion of the enumerated leaf distribution; the meter's self-test."""

    def __init__(self, table: WeightTable, rng):
        probs = exact_leaf_distribution(build(table))[: table.n_max + 1]
        self.cum = np.add.accumulate(probs)
        self.rng = rng

    def sample(self, count: int) -> np.ndarray:
        u = self.rng.uniforms(count) * self.cum[-1]
        return np.minimum(np.searchsorted(self.cum, u, side="left"), self.cum.size - 1)


class ConstantSampler:
    """Always returns the same index; a sampler every GOF run must reject."""

    def __init__(self, value: int = 0):
        self.value = value

    def sample(self, count: int) -> np.ndarray:
        return np.full(count, self.value, dtype=np.int64)


@dataclass(frozen=True)
class ErrorReport:
    method: str
    precision: str
    relative_error: float
    n: int
    trial: int = 0


def sequential_sum(values: np.ndarray):
    return np.add.accumulate(values)[-1]


def rounding_error_experiment(n: int, trials: int, rng) -> list[tuple[ErrorReport, ErrorReport]]:
    """Single-precision pairwise vs sequential totals of ``n`` uniform weights.

    The reference is the correctly rounded double sum of the same
    single-precision values.
    """
    if n < 1 or n & (n - 1):
        raise ValueError(f"n must be a power of two, got {n}")
    if trials < 1:
        raise ValueError("trials must be positive")
    out = []
    for t in range(trials):
        w32 = rng.uniforms(n).astype(np.float32)
        ref = math.fsum(w32.astype(np.float64))
        pw = float(pairwise_total(w32))
        sq = float(sequential_sum(w32))
        out.append(
            (
                ErrorReport("pairwise", "single_shadow", abs(pw - ref) / ref, n, t),
                ErrorReport("sequential", "single_shadow", abs(sq - ref) / ref, n, t),
            )
        )
    return out


def error_reports_csv(pairs) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["trial", "n", "method", "precision", "relative_error"])
    for pair in pairs:
        for r in pair:
            writer.writerow([r.trial, r.n, r.method, r.precision, repr(r.relative_error)])
    return buf.getvalue()


def mean_index(table: WeightTable) -> float:
    """Mean of the normalized target."""
    w = table.weights
    return math.fsum(np.arange(w.size) * w) / math.fsum(w)


def predicted_costs(table: WeightTable) -> tuple[float, float]:
    """Expected comparisons of the forward and backward linear scans."""
    mu = mean_index(table)
    return 1.0 + mu, table.n_max + 1.0 - mu


def zipf_scan_cost(n_max: int, s: float) -> float:
    """Closed form ``sum (i+1)^(1-s) / sum (i+1)^(-s)`` over ``i = 0..N``.

    The forward cost for Zipf weights and the backward cost for their mirror.
    """
    k = np.arange(1, n_max + 2, dtype=np.float64)
    return math.fsum(k ** (1.0 - s)) / math.fsum(k**-s)


def cost_model_check(table: WeightTable, draws: int, rng) -> tuple[float, float, float, float]:
    if draws < 10_000:
        raise ValueError("cost model check needs at least 10^4 draws")
    pred_f, pred_b = predicted_costs(table)
    ct_f = build_cumulative(table)
    _, comps_f = locate_forward(ct_f, rng.uniforms(draws))
    ct_b = build_cumulative(table)
    _, comps_b = locate_backward(ct_b, rng.uniforms(draws))
    return float(comps_f.mean()), pred_f, float(comps_b.mean()), pred_b
