import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_graph
from heterolab.errors import ValidationError
from heterolab.graph import build_graph
from heterolab.metrics import homophily_ratio
from heterolab.synth import (
    CsbmParams,
    FeatureDistribution,
    NeighborDistribution,
    RngSeed,
    add_heterophilous_edges,
    add_heterophilous_edges_noisy,
    circulant_2hop,
    expected_aggregate,
    expected_sbm_mean_degree,
    load_dists,
    sample_aggregates,
    sample_assumption_neighborhood,
    sample_csbm,
    sample_sbm,
)


def own_class(C):
    return [NeighborDistribution.from_weights(np.eye(C)[c]) for c in range(C)]


def cross_only(C, rng):
    out = []
    for c in range(C):
        w = rng.random(C)
        w[c] = 0.0
        out.append(NeighborDistribution.from_weights(w / w.sum()))
    return out


def edge_set(g):
    return set(map(tuple, g.edge_array().tolist()))


def test_neighbor_distribution_validation():
    with pytest.raises(ValidationError):
        NeighborDistribution.from_weights([0.5, 0.6])
    with pytest.raises(ValidationError):
        NeighborDistribution.from_weights([-0.1, 1.1])
    d = NeighborDistribution.from_weights([0.0, 0.25, 0.0, 0.75])
    draws = d.sample(np.random.default_rng(0), 20_000)
    assert set(np.unique(draws)) == {1, 3}
    assert abs((draws == 3).mean() - 0.75) < 0.01


def test_circulant_preset_rows():
    d = circulant_2hop(7)
    assert d[0].weights.tolist() == [0, 0.5, 0, 0, 0, 0, 0.5]
    assert d[6].weights.tolist() == [0.5, 0, 0, 0, 0, 0.5, 0]
    assert circulant_2hop(5)[4].weights.tolist() == [0.5, 0, 0, 0.5, 0]
    assert circulant_2hop(6)[5].weights.tolist() == [0.5, 0, 0, 0, 0.5, 0]
    spec = {"classes": 3, "dists": [[0, 1, 0], [0, 0, 1], [1, 0, 0]]}
    assert [x.weights.tolist() for x in load_dists(spec)] == spec["dists"]
    with pytest.raises(ValidationError):
        load_dists({"classes": 3, "dists": [[1, 0, 0]]})


def test_k_zero_is_identity():
    g = random_graph(1)
    assert add_heterophilous_edges(g, 0, circulant_2hop(3), RngSeed(0)) == g


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(0, 60), st.integers(0, 2**32))
def test_cross_label_law_is_exact(gseed, k, seed):
    g = random_graph(gseed, n=30, m=40)
    dists = cross_only(3, np.random.default_rng(gseed))
    g2 = add_heterophilous_edges(g, k, dists, RngSeed(seed))
    e = g.num_edges
    assert g2.num_edges == e + k
    assert edge_set(g) <= edge_set(g2)
    assert np.array_equal(g2.labels, g.labels) and np.array_equal(g2.features, g.features)
    same = homophily_ratio(g) * e
    assert homophily_ratio(g2) == pytest.approx(same / (e + k), abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.integers(0, 60), st.integers(0, 2**32))
def test_full_noise_is_cross_label(gseed, k, seed):
    g = random_graph(gseed, n=30, m=40)
    g2 = add_heterophilous_edges_noisy(g, k, own_class(3), 1.0, RngSeed(seed))
    assert g2.num_edges == g.num_edges + k
    assert homophily_ratio(g2) == pytest.approx(homophily_ratio(g) * g.num_edges / (g.num_edges + k), abs=1e-12)


def test_gamma_zero_equals_plain():
    g = random_graph(3, n=40, m=50)
    a = add_heterophilous_edges(g, 30, circulant_2hop(3), RngSeed(9, 2))
    b = add_heterophilous_edges_noisy(g, 30, circulant_2hop(3), 0.0, RngSeed(9, 2))
    assert a == b
    c = add_heterophilous_edges(g, 30, circulant_2hop(3), RngSeed(9, 2))
    assert a == c


def test_own_class_monotone_toward_one():
    g = random_graph(5, n=60, m=80)
    for seed in range(5):
        hs = [homophily_ratio(add_heterophilous_edges(g, k, own_class(3), RngSeed(seed))) for k in (0, 50, 150, 400)]
        assert all(b >= a for a, b in zip(hs, hs[1:]))
        assert hs[-1] > 0.85


def test_addition_errors():
    g = build_graph([(0, 1), (1, 2), (0, 2)], [0, 1, 2])
    with pytest.raises(ValidationError, match="complete"):
        add_heterophilous_edges(g, 1, circulant_2hop(3), RngSeed(0))
    with pytest.raises(ValidationError, match="gamma"):
        add_heterophilous_edges_noisy(g, 0, circulant_2hop(3), 1.5, RngSeed(0))
    with pytest.raises(ValidationError, match="distributions"):
        add_heterophilous_edges(g, 0, circulant_2hop(4), RngSeed(0))
    # class 1 is empty and receives all the mass
    g2 = build_graph([(0, 2)], [0, 2, 2, 0], num_classes=3)
    dists = [NeighborDistribution.from_weights([0, 1, 0])] * 3
    with pytest.raises(ValidationError, match="no nodes"):
        add_heterophilous_edges(g2, 1, dists, RngSeed(0))
    # only same-class targets remain, all already linked: rejection budget runs out
    g3 = build_graph([(0, 1)], [0, 0, 1])
    with pytest.raises(ValidationError, match="placed only"):
        add_heterophilous_edges(g3, 1, own_class(2), RngSeed(0))


def test_csbm_limits():
    mu = np.zeros(2)
    empty = sample_csbm(CsbmParams(3, 3, 0.0, 0.0, mu, mu), RngSeed(0))
    assert empty.num_edges == 0
    with pytest.raises(ValidationError):
        homophily_ratio(empty)
    tri = sample_csbm(CsbmParams(3, 3, 1.0, 0.0, mu, mu), RngSeed(0))
    assert tri.edge_array().tolist() == [[0, 1], [0, 2], [1, 2], [3, 4], [3, 5], [4, 5]]
    assert homophily_ratio(tri) == 1.0


def test_csbm_mean_degree():
    params = CsbmParams(500, 500, 0.02, 0.002, np.zeros(2), np.ones(2))
    expected = 0.02 * 499 + 0.002 * 500
    assert expected_sbm_mean_degree([500, 500], 0.02, 0.002) == pytest.approx(expected)
    means = [2 * sample_csbm(params, RngSeed(s)).num_edges / 1000 for s in range(10)]
    assert abs(np.mean(means) - expected) < 0.5


def test_csbm_features_and_determinism():
    params = CsbmParams(200, 300, 0.05, 0.01, [3.0, 0.0], [-3.0, 0.0])
    g = sample_csbm(params, RngSeed(4))
    assert g == sample_csbm(params, RngSeed(4))
    assert g != sample_csbm(params, RngSeed(5))
    X = g.features
    np.testing.assert_allclose(X[:200].mean(axis=0), [3, 0], atol=0.25)
    np.testing.assert_allclose(X[200:].mean(axis=0), [-3, 0], atol=0.25)
    np.testing.assert_allclose(X[200:].std(axis=0), [1, 1], atol=0.15)


def test_csbm_label_swap_symmetry():
    a = CsbmParams(100, 200, 0.05, 0.01, [1.0], [0.0])
    b = CsbmParams(200, 100, 0.05, 0.01, [0.0], [1.0])
    ea = [sample_csbm(a, RngSeed(s)).num_edges for s in range(30)]
    eb = [sample_csbm(b, RngSeed(100 + s)).num_edges for s in range(30)]
    # same expected count (100*99/2 + 200*199/2)*0.05 + 20000*0.01 = 1442.5
    for sample in (ea, eb):
        assert abs(np.mean(sample) - 1442.5) < 4 * 38 / np.sqrt(30)
    assert abs(np.mean(ea) - np.mean(eb)) < 4 * 38 * np.sqrt(2 / 30)


def test_sbm_multiclass_shape():
    g = sample_sbm([10, 20, 30], 0.3, 0.01, np.eye(3), RngSeed(1))
    assert g.n == 60 and g.num_classes == 3 and g.features.shape == (60, 3)


def test_feature_distribution_bounds():
    f = FeatureDistribution([0.5, -0.25], "uniform", 1.0)
    x = f.sample(np.random.default_rng(0), 50_000)
    assert np.abs(x).max() <= 1.0
    assert f.half_width == 0.5
    with pytest.raises(ValidationError):
        FeatureDistribution([2.0], "uniform", 1.0)
    with pytest.raises(ValidationError):
        FeatureDistribution([0.0], "uniform")


def test_assumption_sampler_point_mass():
    v = np.array([0.3, -0.7])
    feats = [FeatureDistribution(v, "uniform", 0.7), FeatureDistribution([0.0, 0.0], "uniform", 1.0)]
    dist = NeighborDistribution.from_weights([1.0, 0.0])
    # point mass, zero-width uniform: exact
    out = sample_assumption_neighborhood(dist, feats, 7, np.eye(2), RngSeed(0))
    np.testing.assert_allclose(out, v, atol=1e-15)
    with pytest.raises(ValidationError):
        sample_assumption_neighborhood(dist, feats, 0, np.eye(2), RngSeed(0))
    with pytest.raises(ValidationError):
        sample_assumption_neighborhood(dist, feats, 3, np.eye(3), RngSeed(0))


def test_assumption_sampler_degree_one():
    feats = [FeatureDistribution([0.0, 0.0], "uniform", 1.0)] * 2
    dist = NeighborDistribution.from_weights([0.5, 0.5])
    W = np.array([[2.0, 0.0], [1.0, -1.0]])
    out = sample_assumption_neighborhood(dist, feats, 1, W, RngSeed(3))
    rng = RngSeed(3).generator()
    c = dist.sample(rng, (1, 1))
    x = feats[int(c[0, 0])].sample(rng, 1)[0]
    np.testing.assert_allclose(out, W @ x)


def test_assumption_sampler_law_of_large_numbers():
    v0, v1 = np.array([1.0, 0.0]), np.array([0.0, 1.0])
    feats = [FeatureDistribution(v0, "uniform", 1.0), FeatureDistribution(v1, "uniform", 1.0)]
    dist = NeighborDistribution.from_weights([0.5, 0.5])
    W = np.array([[1.0, 2.0], [0.0, 1.0]])
    out = sample_assumption_neighborhood(dist, feats, 10_000, W, RngSeed(2))
    target = W @ (v0 + v1) / 2
    np.testing.assert_allclose(expected_aggregate(dist, feats, W), target)
    # zero-width features: each coordinate of the mean is Binomial(n, 1/2)/n, sd 0.5/sqrt(n)
    sd = np.abs(W) @ np.full(2, 0.5 / np.sqrt(10_000))
    assert np.all(np.abs(out - target) <= 3 * sd)
    batch = sample_aggregates(dist, feats, 5, W, 4, np.random.default_rng(0))
    assert batch.shape == (4, 2)


def test_noise_lowers_gcn_accuracy_at_fixed_homophily():
    from conftest import sbm_base
    from heterolab.nn import TrainConfig, random_split, train

    base = sbm_base()
    k = round(base.num_edges * (0.8 / 0.25 - 1))
    accs = []
    for gamma in (0.0, 0.4, 0.8, 1.0):
        g = add_heterophilous_edges_noisy(base, k, circulant_2hop(7), gamma, RngSeed(0, 1))
        runs = [train(g, TrainConfig(seed=s), "gcn", random_split(g.n, s)).test_accuracy for s in range(3)]
        accs.append(np.mean(runs))
    assert all(b < a for a, b in zip(accs, accs[1:]))
    assert accs[0] - accs[-1] > 0.3


def test_cora_table_counts_directed_arcs():
    from heterolab.synth import CORA_K_TABLE

    # h = h0 |E| / (|E| + K/2) with h0 = 0.81, |E| = 5278 reproduces every entry
    for k, h in CORA_K_TABLE.items():
        assert abs(0.81 * 5278 / (5278 + k / 2) - h) < 1.5e-3
    assert abs(0.81 * 5278 / (5278 + 1003) - 0.740) > 0.05
