import numpy as np
import pytest
from conftest import random_table

from binsampling import tables
from binsampling.its_baselines import (
    ItsSampler,
    bsits_descend,
    bsits_locate,
    build_cumulative,
    build_inorder_tree,
    inorder_labels,
    leaf_intervals,
    locate_backward,
    locate_forward,
    scan_backward,
    scan_forward,
)
from binsampling.model import RngStream, WeightTable


@pytest.mark.parametrize(
    "weights, cum",
    [
        ([0.5, 0.25, 0.125, 0.125], [0.5, 0.75, 0.875, 1.0]),
        ([1.0], [1.0]),
        ([0.25] * 4, [0.25, 0.5, 0.75, 1.0]),
    ],
)
def test_build_cumulative(weights, cum):
    assert build_cumulative(WeightTable(weights)).cum.tolist() == cum


def test_cumulative_is_sequential_not_pairwise():
    w = np.random.default_rng(0).random(1000).astype(np.float64)
    ct = build_cumulative(WeightTable(w))
    running = 0.0
    for x in w:
        running += x
    assert ct.cum[-1] == running


def test_forward_scan_examples(dyadic_table):
    ct = build_cumulative(dyadic_table)
    assert scan_forward(ct, 0.6) == 1
    assert ct.comparisons == 2
    assert scan_forward(ct, 0.1) == 0
    assert ct.comparisons == 3


def test_backward_scan_example(dyadic_table):
    ct = build_cumulative(dyadic_table)
    assert scan_backward(ct, 0.6) == 1
    assert ct.comparisons == 3  # N + 1 - i


def test_scans_agree_on_grid(np_rng):
    for _ in range(5):
        table = random_table(np_rng, int(np_rng.integers(0, 60)), zero_frac=0.2)
        ct = build_cumulative(table)
        grid = (np.arange(10_000) + 0.5) / 10_000
        f, fc = locate_forward(ct, grid)
        b, bc = locate_backward(ct, grid)
        assert np.array_equal(f, b)
        assert np.array_equal(fc, f + 1)
        assert np.array_equal(bc, table.n_max + 1 - b)
        for u in grid[::97]:
            assert scan_forward(ct, u) == f[int(u * 10_000)]
            assert scan_backward(ct, u) == f[int(u * 10_000)]


def test_forward_never_returns_zero_weight(np_rng):
    table = WeightTable([0.0, 1.0, 0.0, 0.0, 2.0, 0.0])
    ct = build_cumulative(table)
    idx, _ = locate_forward(ct, np_rng.random(10_000) * 0.999 + 0.0005)
    assert set(np.unique(idx)) <= {1, 4}


def test_anomaly_clamps_to_last():
    # normalized flag with a sum slightly below one: u near 1 overshoots
    table = WeightTable([0.3, 0.3, 0.3999999], normalized=True)
    ct = build_cumulative(table)
    assert scan_forward(ct, 0.99999999) == 2
    assert ct.anomalies == 1
    idx, _ = locate_forward(ct, np.array([0.99999999]))
    assert idx.tolist() == [2] and ct.anomalies == 2


def test_fig4_inorder_order():
    assert inorder_labels(9) == [7, 3, 8, 1, 4, 0, 5, 2, 6]
    assert build_inorder_tree(WeightTable([0.2] * 5)).inorder == [7, 3, 8, 1, 4, 0, 5, 2, 6]


def brute_inorder_prefix(tree):
    """Prefix sums recomputed by a recursive inorder walk."""
    n = tree.n_max
    out = {}
    acc = [0.0]

    def walk(k):
        if k > 2 * n:
            return
        walk(2 * k + 1)
        if k >= n:
            acc[0] += tree.node_values[k]
        else:
            out[k] = acc[0]
        walk(2 * k + 2)

    walk(0)
    return out


def test_fig4_prefix_values():
    tree = build_inorder_tree(WeightTable([0.2] * 5))
    assert tree.node_values[3] == pytest.approx(0.2)
    assert tree.node_values[0] == pytest.approx(0.6)
    assert tree.node_values[4:].tolist() == [0.2] * 5
    for k, v in brute_inorder_prefix(tree).items():
        assert tree.node_values[k] == v


def test_inorder_n1():
    tree = build_inorder_tree(WeightTable([0.3, 0.7]))
    assert tree.inorder == [1, 0, 2]
    assert tree.node_values.tolist() == [0.3, 0.3, 0.7]


def test_inorder_n0():
    tree = build_inorder_tree(WeightTable([5.0]))
    assert bsits_descend(tree, 0.5) == 0
    assert tree.comparisons == 0


def test_bsits_fig4_descent():
    tree = build_inorder_tree(WeightTable([0.2] * 5))
    # leaves in inorder are labels 7, 8, 4, 5, 6 -> indices 3, 4, 0, 1, 2
    assert bsits_descend(tree, 0.5) == 0
    assert bsits_descend(tree, 1e-12) == 3
    assert bsits_descend(tree, 0.9) == 2


def test_bsits_interval_partition(np_rng):
    for n_max in list(range(0, 65)):
        table = random_table(np_rng, n_max, zero_frac=0.1)
        tree = build_inorder_tree(table)
        iv = leaf_intervals(tree)
        lengths = np.clip(iv[:, 1] - iv[:, 0], 0, None)
        assert np.allclose(lengths, table.weights, rtol=0, atol=1e-12)
        # the intervals tile (0, total]
        order = np.argsort(iv[:, 0], kind="stable")
        live = order[table.weights[order] > 0]
        assert np.allclose(iv[live[1:], 0], iv[live[:-1], 1], atol=1e-15)


def test_its_interval_partition(np_rng):
    for n_max in range(0, 65, 7):
        table = random_table(np_rng, n_max)
        ct = build_cumulative(table)
        lo = np.concatenate(([0.0], ct.cum[:-1]))
        assert np.allclose(ct.cum - lo, table.weights, rtol=0, atol=1e-12)
        # the midpoint of every cell maps back to that cell
        idx, _ = locate_forward(ct, (lo + ct.cum) / 2 / ct.scale)
        live = table.weights > 0
        assert np.array_equal(idx[live], np.flatnonzero(live))


def test_bsits_vector_matches_scalar(np_rng):
    table = random_table(np_rng, 333)
    a, b = build_inorder_tree(table), build_inorder_tree(table)
    u = np_rng.random(2000)
    got, comps = bsits_locate(a, u)
    assert got.tolist() == [bsits_descend(b, x) for x in u]
    assert a.comparisons == b.comparisons == comps.sum()


def test_bsits_comparison_bound(np_rng):
    for n_max in (1, 2, 5, 100, 1000, 4097):
        tree = build_inorder_tree(random_table(np_rng, n_max))
        _, comps = bsits_locate(tree, np_rng.random(5000))
        assert comps.max() <= int(np.ceil(np.log2(2 * n_max + 1)))


def test_its_sampler_interface():
    table = tables.uniform(9)
    for method in ("its_forward", "its_backward", "bsits"):
        s = ItsSampler(table, RngStream(1), method)
        out = s.sample(1000)
        assert out.min() >= 0 and out.max() <= 9
        assert s.mean_comparisons > 0
    with pytest.raises(ValueError):
        ItsSampler(table, RngStream(1), "alias")


def test_forward_mean_comparisons_binomial():
    table = tables.binomial(100, 0.3)
    s = ItsSampler(table, RngStream(31), "its_forward")
    s.sample(100_000)
    assert s.mean_comparisons == pytest.approx(31.0, rel=0.02)
