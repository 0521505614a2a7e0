import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import opinionlab as ol
from opinionlab.distributions import Point, Uniform, VectorDist
from opinionlab.graph import DENSE_P, _block_pairs
from opinionlab.model import ModelSpec

from conftest import random_spec


def one_community_spec(weight=Point(1.0)):
    return ModelSpec(
        K=1, ell=1, pi=[1.0], kappa=[[1.0]], c=0.3, d=0.2, H=1.0,
        weight_dists=[[weight]],
        belief_dists=[VectorDist((Uniform(-1, 1),))],
        signal_dists=[VectorDist((Uniform(-0.5, 0.5),))],
    )


def test_single_community_labels_all_zero():
    spec = one_community_spec()
    labels = ol.sample_labels(spec, 5, 1)
    assert labels.tolist() == [0] * 5
    assert ol.empirical_shares(labels, 1).tolist() == [1.0]


def test_degenerate_share_vector():
    spec = random_spec(0, K=2)
    spec.pi = np.array([1.0 - 1e-12, 1e-12])
    labels = ol.sample_labels(spec, 10, 4)
    assert np.all(labels == 0)


def test_share_concentration_binomial_oracle():
    # |pi_hat - 0.5| < 0.02 for n = 10^4 fails with prob ~6e-5 per seed
    spec = random_spec(1, K=2)
    spec.pi = np.array([0.5, 0.5])
    hits = 0
    for seed in range(1000):
        labels = ol.sample_labels(spec, 10_000, seed)
        if abs(ol.empirical_shares(labels, 2)[0] - 0.5) < 0.02:
            hits += 1
    assert hits >= 990


def test_fixed_composition_exact_census():
    spec = random_spec(2, K=3, fixed_composition=True)
    spec.pi = np.array([0.2, 0.3, 0.5])
    labels = ol.sample_labels(spec, 1000, 9)
    assert np.bincount(labels, minlength=3).tolist() == [200, 300, 500]


def test_empirical_shares_rejects_empty():
    with pytest.raises(ValueError):
        ol.empirical_shares(np.array([], dtype=int), 2)


def test_zero_kernel_gives_empty_graph():
    spec = one_community_spec()
    spec.kappa = np.array([[0.0]])
    labels = ol.sample_labels(spec, 50, 3)
    g = ol.sample_graph(spec, labels, 10.0, 3)
    assert g.edge_count() == 0
    assert np.all(g.no_inbound)


def test_saturated_kernel_gives_complete_graph():
    spec = one_community_spec()
    n = 40
    spec.kappa = np.array([[float(n) / 2.0]])  # kappa * theta / n = 1 at theta = 2
    labels = ol.sample_labels(spec, n, 3)
    g = ol.sample_graph(spec, labels, 2.0, 3)
    assert g.edge_count() == n * (n - 1)
    assert np.all(g.in_degrees() == n - 1)


def test_mean_in_degree_matches_binomial_oracle():
    # in-degree ~ Binomial(n-1, theta/n), mean ~= theta
    spec = one_community_spec()
    n, theta, seeds = 1000, 10.0, 200
    total = 0.0
    for seed in range(seeds):
        g = ol.sample_graph(spec, ol.sample_labels(spec, n, seed), theta, seed)
        total += g.in_degrees().mean()
    mean = total / seeds
    var_one = (n - 1) * (theta / n) * (1 - theta / n)
    se = np.sqrt(var_one / n / seeds)  # graph-mean averages n nearly independent degrees
    assert abs(mean - theta * (n - 1) / n) < 3 * max(se, 0.02)


def test_block_pair_frequency_matches_probability():
    rng = np.random.default_rng(5)
    for p in (0.03, DENSE_P / 2, 0.6):
        reps, rows, cols = 300, 40, 41
        count = sum(_block_pairs(rng, rows, cols, p)[0].size for _ in range(reps))
        total = reps * rows * cols
        se = np.sqrt(p * (1 - p) / total)
        assert abs(count / total - p) < 4 * se


def test_normalize_hand_case():
    spec = one_community_spec(weight=Uniform(0.0, 1.0))
    g = ol.GraphSample(
        n=4, theta=1.0, labels=np.zeros(4, dtype=np.int64), census=np.array([4]),
        pi_hat=np.array([1.0]),
        indptr=np.array([0, 3, 4, 4, 4]), sources=np.array([1, 2, 3, 0]),
        weights=np.array([1.0, 1.0, 2.0, 1.0]), beliefs=np.zeros((4, 1)),
        no_inbound=np.array([False, False, True, True]),
    )
    C = ol.normalize_weights(g)
    dense = C.toarray()
    assert dense[0].tolist() == [0.0, 0.25, 0.25, 0.5]
    assert dense[1, 0] == 1.0  # single in-neighbor gets weight one
    assert np.all(dense[2] == 0.0) and np.all(dense[3] == 0.0)
    assert C.zero_rows.tolist() == [False, False, True, True]


def test_zero_weight_row_is_zero_not_error():
    spec = one_community_spec(weight=Point(0.0))
    labels = ol.sample_labels(spec, 30, 8)
    g = ol.sample_graph(spec, labels, 5.0, 8)
    C = ol.normalize_weights(g)
    assert np.all(C.row_sums() == 0.0)
    # no-inbound indicator still tracks edges, not weights
    assert g.no_inbound.sum() < 30


@given(st.integers(min_value=0, max_value=10_000))
@settings(max_examples=15)
def test_row_sums_and_ranges(seed):
    spec = random_spec(seed)
    labels = ol.sample_labels(spec, 60, seed)
    g = ol.sample_graph(spec, labels, 8.0, seed)
    C = ol.normalize_weights(g)
    sums = C.row_sums()
    assert np.all((np.abs(sums - 1.0) <= 1e-12) | (sums == 0.0))
    assert C.inf_norm() <= 1.0 + 1e-12
    assert np.all(g.weights >= 0.0) and np.all(g.weights <= spec.H + 1e-9)
    assert np.all(np.abs(g.beliefs) <= 1.0 + 1e-12)
    if not C.dense:
        assert np.all(C.matrix.diagonal() == 0.0)


def test_determinism_same_seed_identical_graph():
    spec = random_spec(11)
    labels = ol.sample_labels(spec, 80, 13)
    g1 = ol.sample_graph(spec, labels, 6.0, 13)
    g2 = ol.sample_graph(spec, labels, 6.0, 13)
    assert np.array_equal(g1.sources, g2.sources)
    assert np.array_equal(g1.indptr, g2.indptr)
    assert np.array_equal(g1.weights, g2.weights)
    assert np.array_equal(g1.beliefs, g2.beliefs)
    g3 = ol.sample_graph(spec, labels, 6.0, 14)
    assert not (
        np.array_equal(g1.sources, g3.sources) and np.array_equal(g1.weights, g3.weights)
    )


def test_dense_storage_switch():
    spec = one_community_spec()
    n = 32
    spec.kappa = np.array([[8.0]])  # p = 8 * 2 / 32 = 0.5 -> mean in-degree ~ n/2
    labels = ol.sample_labels(spec, n, 1)
    g = ol.sample_graph(spec, labels, 2.0, 1)
    C = ol.normalize_weights(g)
    assert C.dense
    assert isinstance(C.matrix, np.ndarray)


def test_graph_dump_round_trip(tmp_path):
    spec = random_spec(21, K=2, ell=2)
    labels = ol.sample_labels(spec, 25, 2)
    g = ol.sample_graph(spec, labels, 5.0, 2)
    path = tmp_path / "graph.txt"
    ol.write_graph(g, path)
    labels2, beliefs2, edges, weights, K = ol.read_graph(path)
    assert K == 2
    assert np.array_equal(labels2, g.labels)
    assert np.allclose(beliefs2, g.beliefs)
    assert edges.shape[0] == g.edge_count()
    assert np.allclose(weights, g.weights)
    first = (edges[:, 0] == 0)
    assert first.sum() == g.indptr[1] - g.indptr[0]
