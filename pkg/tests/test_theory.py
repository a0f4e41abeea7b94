import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heterolab.errors import NumericalError, ValidationError
from heterolab.synth import CsbmParams, FeatureDistribution, NeighborDistribution
from heterolab.theory import (
    NeverHelps,
    analytic_misclassification,
    boundary_from_params,
    degree_threshold,
    hoeffding_bound,
    misclassification_curve,
    monte_carlo_misclassification,
    spectral_norm,
    std_normal_cdf,
    verify_concentration,
)

mpmath.mp.dps = 40


def phi_oracle(x):
    return float(mpmath.ncdf(x))


def test_phi_examples():
    assert std_normal_cdf(0.0) == 0.5
    assert std_normal_cdf(1.96) == pytest.approx(0.975002104851779563787, abs=1e-12)
    for x in (0.5, 1.0, 2.0, 5.0):
        assert std_normal_cdf(x) + std_normal_cdf(-x) == pytest.approx(1.0, abs=1e-15)
    with pytest.raises(ValidationError):
        std_normal_cdf(math.nan)


@settings(max_examples=200)
@given(st.floats(-40, 40))
def test_phi_matches_high_precision_oracle(x):
    assert abs(std_normal_cdf(x) - phi_oracle(x)) <= 1e-9
    assert std_normal_cdf(x) + std_normal_cdf(-x) == pytest.approx(1.0, abs=2e-16)


def test_spectral_norm_examples():
    assert spectral_norm(np.eye(3)) == pytest.approx(1.0, rel=1e-12)
    assert spectral_norm(np.diag([3.0, -5.0])) == pytest.approx(5.0, rel=1e-10)
    assert spectral_norm([[1.0, 1.0], [0.0, 1.0]]) == pytest.approx(1.618033988749894848, rel=1e-10)
    assert spectral_norm(np.zeros((2, 3))) == 0.0
    with pytest.raises(ValidationError):
        spectral_norm([[1.0, math.inf]])


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 4), st.integers(1, 4))
def test_spectral_norm_oracles(seed, r, c):
    rng = np.random.default_rng(seed)
    W = rng.standard_normal((r, c))
    rho = spectral_norm(W)
    assert rho == pytest.approx(np.linalg.svd(W, compute_uv=False)[0], rel=1e-6)
    v = rng.standard_normal((c, 10_000))
    v /= np.linalg.norm(v, axis=0)
    sampled = np.linalg.norm(W @ v, axis=0).max()
    assert sampled <= rho + 1e-9


def test_spectral_norm_random_unit_vectors_2d():
    W = np.array([[1.0, 1.0], [0.0, 1.0]])
    ang = np.random.default_rng(0).uniform(0, 2 * np.pi, 10_000)
    v = np.stack([np.cos(ang), np.sin(ang)])
    assert np.linalg.norm(W @ v, axis=0).max() == pytest.approx(spectral_norm(W), abs=1e-6)


def test_hoeffding_examples():
    assert hoeffding_bound(10, 0.0, 1.0, 1.0, 3) == 6.0
    assert hoeffding_bound(100, 1.0, 1.0, 1.0, 4) == pytest.approx(2.98132253766293679e-5, rel=1e-12)
    vals = [hoeffding_bound(d, 0.5, 1.3, 1.0, 2) for d in (1, 2, 4, 8, 1000, 10**5)]
    assert all(b < a for a, b in zip(vals, vals[1:])) and vals[-1] < 1e-100
    for bad in ((0, 1, 1, 1, 1), (1, -1, 1, 1, 1), (1, 1, 0, 1, 1), (1, 1, 1, 0, 1), (1, 1, 1, 1, 0)):
        with pytest.raises(ValidationError):
            hoeffding_bound(*bad)


def uniform_feats(l=2, B=1.0):
    return [FeatureDistribution(np.full(l, 0.2), "uniform", B), FeatureDistribution(np.full(l, -0.3), "uniform", B)]


def test_concentration_point_mass_is_zero():
    v = np.array([0.4, -0.1])
    feats = [FeatureDistribution(v, "uniform", 0.4), FeatureDistribution(np.zeros(2), "uniform", 1.0)]
    rep = verify_concentration(NeighborDistribution.from_weights([1.0, 0.0]), feats, np.eye(2), 5,
                               [0.1, 0.5, 1.0], 10_000, seed=0)
    assert rep.empirical == [0.0, 0.0, 0.0]


def test_concentration_degree_50_no_violations():
    W = np.random.default_rng(7).standard_normal((2, 2))
    rep = verify_concentration(NeighborDistribution.from_weights([0.3, 0.7]), uniform_feats(), W, 50,
                               np.linspace(0.1, 1.0, 10), 100_000, seed=1)
    assert rep.violations == []
    assert all(0 <= e <= 1 for e in rep.empirical)
    assert rep.rho == pytest.approx(np.linalg.svd(W, compute_uv=False)[0], rel=1e-8)


def test_concentration_tightens_with_degree():
    dist = NeighborDistribution.from_weights([0.5, 0.5])
    W = np.eye(2)
    t = [0.1, 0.2, 0.3]
    reps = [verify_concentration(dist, uniform_feats(), W, d, t, 20_000, seed=2) for d in (5, 10, 20, 40)]
    for a, b in zip(reps, reps[1:]):
        assert all(y <= x for x, y in zip(a.bound, b.bound))
        assert all(y <= x for x, y in zip(a.empirical, b.empirical))


def test_concentration_errors():
    dist = NeighborDistribution.from_weights([0.5, 0.5])
    gauss = [FeatureDistribution(np.zeros(2), "gaussian")] * 2
    with pytest.raises(ValidationError, match="uniform"):
        verify_concentration(dist, gauss, np.eye(2), 5, [0.1], 10_000, seed=0)
    with pytest.raises(ValidationError):
        verify_concentration(dist, uniform_feats(), np.eye(2), 5, [0.1], 100, seed=0)


def test_concentration_flags_violations():
    dist = NeighborDistribution.from_weights([0.5, 0.5])
    feats = [FeatureDistribution([0.9, 0.9], "uniform", 1.0), FeatureDistribution([-0.9, -0.9], "uniform", 1.0)]
    rep = verify_concentration(dist, feats, np.eye(2) * 10, 2, [0.1], 10_000, seed=0, check=False)
    assert rep.bound[0] > rep.empirical[0]
    # a bound forced to zero must be reported as violated
    from heterolab import theory

    original = theory.hoeffding_bound
    theory.hoeffding_bound = lambda *a: 0.0
    try:
        with pytest.raises(NumericalError):
            verify_concentration(dist, feats, np.eye(2), 2, [0.1], 10_000, seed=0)
    finally:
        theory.hoeffding_bound = original


def test_boundary_examples():
    b = boundary_from_params([1, 0], [-1, 0])
    np.testing.assert_array_equal(b.w, [1, 0])
    np.testing.assert_array_equal(b.m, [0, 0])
    b = boundary_from_params([3, 4], [0, 0])
    np.testing.assert_allclose(b.w, [0.6, 0.8], atol=1e-15)
    np.testing.assert_allclose(b.m, [1.5, 2.0])
    assert abs(np.linalg.norm(b.w) - 1) <= 1e-12
    s = boundary_from_params([6, 8], [0, 0])
    np.testing.assert_allclose(s.w, b.w, atol=1e-15)
    np.testing.assert_allclose(s.m, 2 * b.m)
    with pytest.raises(ValidationError):
        boundary_from_params([1, 1], [1, 1])


@settings(max_examples=50)
@given(st.integers(0, 2**32 - 1), st.floats(0.01, 100))
def test_boundary_sign_scale_invariance(seed, s):
    rng = np.random.default_rng(seed)
    b = boundary_from_params(rng.standard_normal(3), rng.standard_normal(3))
    z = rng.standard_normal((200, 3))
    raw = z @ b.w + b.b
    scaled = (s * z) @ b.w + s * b.b
    assert np.array_equal(np.sign(raw), np.sign(scaled))


def test_degree_threshold_examples():
    assert degree_threshold(0.5, 0.1) == pytest.approx(2.25, rel=1e-14)
    assert degree_threshold(0.1, 0.5) == degree_threshold(0.5, 0.1)
    assert degree_threshold(0.9, 0.1) == 1.5625
    for q in (0.01, 0.05, 0.1):
        assert degree_threshold(9 * q, q) == pytest.approx(1.5625, rel=1e-12)
    never = degree_threshold(0.3, 0.3)
    assert isinstance(never, NeverHelps) and never.threshold == math.inf
    with pytest.raises(ValidationError):
        degree_threshold(0.0, 0.5)


def params(p, q, sep=2.0, l=2):
    return CsbmParams.symmetric(1000, p, q, sep, l)


def test_analytic_examples():
    assert analytic_misclassification(params(0.9, 0.1, sep=0.0), 3)[0] == 0.5
    p_x, p_h = analytic_misclassification(params(0.9, 0.1), 4)
    assert p_x == pytest.approx(0.158655253931457051, abs=1e-12)
    assert p_h == pytest.approx(0.0547992916995579841, abs=1e-12)
    assert analytic_misclassification(params(0.3, 0.3), 50)[1] == 0.5


@pytest.mark.parametrize("p,q", [(0.5, 0.1), (0.9, 0.1), (0.2, 0.6), (0.05, 0.01)])
def test_threshold_crossing_and_monotonicity(p, q):
    P = params(p, q, sep=1.3)
    thr = degree_threshold(p, q)
    p_x, p_h = analytic_misclassification(P, thr)
    assert abs(p_h - p_x) <= 1e-12
    hs = [analytic_misclassification(P, d)[1] for d in np.linspace(0.5, 50, 40)]
    assert all(b < a for a, b in zip(hs, hs[1:]))


def test_mc_far_apart_and_collapse():
    far = monte_carlo_misclassification(params(0.9, 0.1, sep=20.0), 4, 10_000, seed=0)
    assert far["p_x_hat"] == 0.0 and far["p_h_hat"] == 0.0
    same = monte_carlo_misclassification(params(0.3, 0.3), 4, 100_000, seed=0)
    assert abs(same["p_h_hat"] - 0.5) <= 3 * math.sqrt(0.25 / 100_000)
    with pytest.raises(ValidationError):
        monte_carlo_misclassification(params(0.9, 0.1), 4, 100, seed=0)


def test_mc_analytic_example():
    r = monte_carlo_misclassification(params(0.9, 0.1), 4, 100_000, seed=0)
    assert abs(r["p_h_hat"] - 0.0548) <= 0.004


GRID = [(p, q, d) for p, q in ((0.9, 0.1), (0.5, 0.1), (0.1, 0.4), (0.3, 0.25)) for d in (1, 4, 16)]


@pytest.mark.parametrize("p,q,d", GRID)
def test_mc_matches_analytic(p, q, d):
    trials = 100_000
    r = monte_carlo_misclassification(params(p, q, sep=2.0, l=3), d, trials, seed=11)
    for key in ("x", "h"):
        exact = r[f"p_{key}"]
        assert abs(r[f"p_{key}_hat"] - exact) <= 3 * math.sqrt(exact * (1 - exact) / trials)


def test_curve_report():
    c = misclassification_curve(params(0.9, 0.1), [1, 2, 4, 8], 10_000, seed=3)
    d = c.to_json()
    assert d["kind"] == "csbm-misclassification" and d["threshold"] == 1.5625
    assert len(d["p_h"]) == 4 and all(b < a for a, b in zip(d["p_h"], d["p_h"][1:]))
    assert d["p_h"][0] > d["p_x"] > d["p_h"][1]
