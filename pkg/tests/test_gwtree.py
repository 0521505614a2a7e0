import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import opinionlab as ol
from opinionlab.distributions import Point, Uniform, VectorDist
from opinionlab.gwtree import GWTree, TreeBudgetError, TreeLevel, _empty_level
from opinionlab.model import ModelSpec

from conftest import random_spec


def one_type_spec(weight=Point(1.0)):
    return ModelSpec(
        K=1, ell=1, pi=[1.0], kappa=[[1.0]], c=0.3, d=0.2, H=1.0,
        weight_dists=[[weight]],
        belief_dists=[VectorDist((Uniform(-1, 1),))],
        signal_dists=[VectorDist((Uniform(-0.5, 0.5),))],
    )


def test_offspring_means_matrix():
    spec = random_spec(1, K=2)
    spec.kappa = np.array([[2.0, 1.0], [0.5, 3.0]])
    q = ol.offspring_means(spec, [0.25, 0.75], 4.0)
    assert q[0, 1] == pytest.approx(1.0 * 0.25 * 4.0)
    assert q[1, 0] == pytest.approx(0.5 * 0.75 * 4.0)


def test_zero_rate_tree_is_root_only():
    spec = one_type_spec()
    tree = ol.sample_tree(spec, 0, np.array([[0.0]]), 3, 1)
    assert [lv.types.size for lv in tree.levels] == [1, 0, 0, 0]
    for s in range(1, 4):
        assert ol.path_weight_sum(tree, s) == 0.0
    assert ol.path_weight_sum(tree, 0) == 1.0


def test_root_offspring_poisson_mean():
    spec = one_type_spec()
    totals = 0
    reps = 10_000
    rng = np.random.default_rng(3)
    for _ in range(reps):
        tree = ol.sample_tree(spec, 0, np.array([[3.0]]), 1, rng)
        totals += tree.levels[1].types.size
    mean = totals / reps
    se = np.sqrt(3.0 / reps)
    assert abs(mean - 3.0) < 3 * se


def test_offspring_census_bookkeeping():
    spec = random_spec(4, K=2)
    q = ol.offspring_means(spec, spec.pi, 3.0)
    tree = ol.sample_tree(spec, 1, q, 2, 9)
    for level_idx in (0, 1):
        level = tree.levels[level_idx]
        child = tree.levels[level_idx + 1]
        for i in range(level.types.size):
            census = np.bincount(child.types[child.parent == i], minlength=2)
            assert np.array_equal(census, level.offspring[i])


def test_path_weights_multiply_along_branches():
    spec = random_spec(5, K=2)
    q = ol.offspring_means(spec, spec.pi, 2.5)
    tree = ol.sample_tree(spec, 0, q, 3, 11)
    for s in range(1, 4):
        level = tree.levels[s]
        parent_paths = tree.levels[s - 1].path_weight
        assert np.allclose(level.path_weight, parent_paths[level.parent] * level.norm_weight)
        total = ol.path_weight_sum(tree, s)
        assert -1e-12 <= total <= 1.0 + 1e-12


def test_zero_weight_atoms_zero_the_subtree():
    spec = one_type_spec(weight=Point(0.0))
    tree = ol.sample_tree(spec, 0, np.array([[4.0]]), 2, 7)
    if tree.levels[1].types.size:
        assert np.all(tree.levels[1].norm_weight == 0.0)
        assert ol.path_weight_sum(tree, 1) == 0.0


def test_budget_guard_raises_with_expected_size():
    spec = one_type_spec()
    with pytest.raises(TreeBudgetError) as err:
        ol.sample_tree(spec, 0, np.array([[50.0]]), 5, 1, node_budget=10_000)
    assert err.value.expected == pytest.approx(50.0**5)


def test_ancestry_addresses():
    spec = one_type_spec()
    tree = ol.sample_tree(spec, 0, np.array([[2.0]]), 2, 21)
    lv2 = tree.levels[2]
    for i in range(lv2.types.size):
        addr = tree.ancestry(2, i)
        assert len(addr) == 2
        assert all(part >= 1 for part in addr)


def test_generation_sum_cases():
    spec = one_type_spec()
    tree = ol.sample_tree(spec, 0, np.array([[3.0]]), 2, 5)
    # constant values: the sum collapses to the total path weight
    total = ol.weighted_generation_sum(tree, 2, np.array([1.0]))
    assert total == pytest.approx(ol.path_weight_sum(tree, 2))
    # generation zero returns the root value
    assert ol.weighted_generation_sum(tree, 0, np.array([0.7])) == pytest.approx(0.7)


def test_generation_sum_single_chain_hand_trace():
    K = 1
    levels = [
        TreeLevel(types=np.array([0]), parent=np.array([-1]), weight=np.array([np.nan]),
                  norm_weight=np.array([1.0]), path_weight=np.array([1.0]),
                  offspring=np.array([[1]])),
        TreeLevel(types=np.array([0]), parent=np.array([0]), weight=np.array([0.4]),
                  norm_weight=np.array([1.0]), path_weight=np.array([1.0]),
                  offspring=np.array([[1]])),
        TreeLevel(types=np.array([0]), parent=np.array([0]), weight=np.array([0.9]),
                  norm_weight=np.array([1.0]), path_weight=np.array([1.0]),
                  offspring=np.array([[0]])),
    ]
    tree = GWTree(root_type=0, depth=2, levels=levels)
    assert ol.weighted_generation_sum(tree, 2, np.array([0.7])) == pytest.approx(0.7)


def test_generation_sum_linear_in_values():
    spec = random_spec(6, K=2)
    q = ol.offspring_means(spec, spec.pi, 2.0)
    tree = ol.sample_tree(spec, 0, q, 2, 3)
    rng = np.random.default_rng(0)
    x = rng.uniform(-1, 1, size=2)
    y = rng.uniform(-1, 1, size=2)
    a, b = 0.3, -0.7
    lhs = ol.weighted_generation_sum(tree, 2, a * x + b * y)
    rhs = a * ol.weighted_generation_sum(tree, 2, x) + b * ol.weighted_generation_sum(tree, 2, y)
    assert lhs == pytest.approx(rhs)


def test_generation_sum_per_node_values():
    spec = one_type_spec()
    tree = ol.sample_tree(spec, 0, np.array([[4.0]]), 1, 13)
    m = tree.levels[1].types.size
    vals = np.linspace(-1, 1, max(m, 1))[:m]
    out = ol.weighted_generation_sum(tree, 1, vals)
    assert out == pytest.approx(float(tree.levels[1].path_weight @ vals))


def test_estimate_a_s_zero_row_community():
    spec = random_spec(7, K=2)
    spec.kappa = np.array([[0.0, 1.0], [0.0, 1.0]])  # community 0 has no inbound mass
    q = ol.offspring_means(spec, spec.pi, 3.0)
    beta = spec.weight_mean_matrix()
    Mb = ol.mixing_matrix(spec.pi, spec.kappa, beta)
    est, se = ol.estimate_a_s(spec, 0, 1, np.array([0.5, -0.5]), q, Mb, 200, 3)
    assert est == 0.0


def test_estimate_a_s_constant_values_reduce_to_mass_deficit():
    # deterministic values w: deviation is |w| * (1 - total path weight)
    spec = one_type_spec()
    q = np.array([[6.0]])
    w = 0.8
    est, _ = ol.estimate_a_s(spec, 0, 1, np.array([w]), q, np.array([[1.0]]), 4000, 5)
    # mass deficit is the no-offspring probability e^-6 ~ 0.0025
    assert est == pytest.approx(w * np.exp(-6.0), rel=0.35)


def test_estimate_a_s_theta_scaling():
    spec = one_type_spec()
    ests = []
    for theta in (8.0, 32.0):
        est, se = ol.estimate_a_s(
            spec, 0, 1, [Uniform(-1, 1)], np.array([[theta]]), np.array([[1.0]]), 4000, 17
        )
        ests.append(est)
    ratio = ests[1] / ests[0]
    assert 0.4 < ratio < 0.62  # expect ~ 1/2 under the theta^(-1/2) law


def test_profile_matches_single_level_estimates():
    spec = one_type_spec()
    q = np.array([[5.0]])
    ests, ses = ol.a_s_profile(spec, 0, 3, [Uniform(-1, 1)], q, np.array([[1.0]]), 3000, 23)
    assert ests.shape == (3,)
    assert np.all(ests > 0)
    assert np.all(np.diff(ests) < 0)  # noise averages shrink with depth at fixed theta
    est1, se1 = ol.estimate_a_s(spec, 0, 1, [Uniform(-1, 1)], q, np.array([[1.0]]), 3000, 29)
    assert abs(ests[0] - est1) < 4 * np.hypot(ses[0], se1)


def test_general_weights_match_point_mass_shortcut_in_distribution():
    # the reduceat fast path and the generic path must agree statistically
    spec_point = one_type_spec(weight=Point(0.7))
    spec_unif = one_type_spec(weight=Uniform(0.69, 0.71))
    q = np.array([[10.0]])
    e1, s1 = ol.estimate_a_s(spec_point, 0, 2, [Uniform(-1, 1)], q, np.array([[1.0]]), 4000, 31)
    e2, s2 = ol.estimate_a_s(spec_unif, 0, 2, [Uniform(-1, 1)], q, np.array([[1.0]]), 4000, 37)
    assert abs(e1 - e2) < 5 * np.hypot(s1, s2) + 5e-3


@given(st.integers(min_value=0, max_value=5_000))
@settings(max_examples=12)
def test_path_weight_sums_bounded_random_specs(seed):
    spec = random_spec(seed, allow_zero_rows=True)
    q = ol.offspring_means(spec, spec.pi, 2.0)
    root = int(np.random.default_rng(seed).integers(0, spec.K))
    tree = ol.sample_tree(spec, root, q, 3, seed)
    prev = 1.0
    for s in range(4):
        total = ol.path_weight_sum(tree, s)
        assert -1e-12 <= total <= prev + 1e-12  # generation mass never grows
        prev = total


def test_neighborhood_isolated_vertex():
    spec = one_type_spec()
    spec.kappa = np.array([[0.0]])
    labels = ol.sample_labels(spec, 20, 2)
    graph = ol.sample_graph(spec, labels, 5.0, 2)
    diag = ol.neighborhood_diagnostic(graph, 0, 3)
    assert diag.is_tree()
    assert diag.generation_census[0].tolist() == [1]
    assert len(diag.generation_census) <= 2


def test_neighborhood_cycle_detected():
    spec = one_type_spec()
    graph = ol.GraphSample(
        n=3, theta=1.0, labels=np.zeros(3, dtype=np.int64), census=np.array([3]),
        pi_hat=np.array([1.0]),
        indptr=np.array([0, 1, 2, 3]),
        sources=np.array([1, 2, 0]),   # 0 <- 1 <- 2 <- 0
        weights=np.ones(3), beliefs=np.zeros((3, 1)),
        no_inbound=np.zeros(3, dtype=bool),
    )
    diag = ol.neighborhood_diagnostic(graph, 0, 3)
    assert not diag.is_tree(3)
    assert diag.tree_depth == 2
    assert diag.is_tree(2) and diag.is_tree(1)


def test_neighborhood_monotone_tree_flags():
    spec = random_spec(9, K=2)
    labels = ol.sample_labels(spec, 300, 5)
    graph = ol.sample_graph(spec, labels, 4.0, 5)
    for v in range(0, 300, 37):
        diag = ol.neighborhood_diagnostic(graph, v, 3)
        for s in range(diag.tree_depth + 1):
            assert diag.is_tree(s)


def test_sparse_neighborhoods_mostly_trees():
    # theta = log log n: non-tree fraction small at n=2000 and decreasing in n
    spec = one_type_spec(weight=Uniform(0.2, 1.0))
    fractions = []
    for n, graphs in ((500, 25), (2000, 50)):
        theta = np.log(np.log(n))
        bad = total = 0
        for g_seed in range(graphs):
            labels = ol.sample_labels(spec, n, (7, g_seed))
            graph = ol.sample_graph(spec, labels, theta, (7, g_seed))
            rng = np.random.default_rng(g_seed)
            for v in rng.choice(n, size=40, replace=False):
                diag = ol.neighborhood_diagnostic(graph, int(v), 2)
                total += 1
                bad += 0 if diag.is_tree() else 1
        fractions.append(bad / total)
    assert fractions[1] < 0.05
    assert fractions[1] <= fractions[0]
