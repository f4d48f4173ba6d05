import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rfrr.features import FeatureMapSpec, TargetSpec
from rfrr.simulator import (
    GaussianDesign,
    SingularSystemError,
    conditional_risk,
    feature_map_risk,
    mc_risk_feature_map,
    mc_risk_gaussian,
    ridge_fit,
    sample_gaussian_design,
    stream,
)
from rfrr.spectrum import explicit_spectrum, power_law_spectrum


def test_ridge_scalar():
    assert ridge_fit(np.array([[2.0]]), np.array([3.0]), 1.0)[0] == pytest.approx(1.2, abs=1e-15)


def test_ridge_orthonormal_lambda0():
    Q, _ = np.linalg.qr(np.random.default_rng(0).standard_normal((8, 3)))
    y = np.arange(8.0)
    assert np.allclose(ridge_fit(Q, y, 0.0), Q.T @ y, atol=1e-12)


def test_ridge_dense_inverse_oracle():
    rng = np.random.default_rng(1)
    Z, y = rng.standard_normal((20, 5)), rng.standard_normal(20)
    ref = np.linalg.inv(Z.T @ Z + 0.3 * np.eye(5)) @ Z.T @ y
    a = ridge_fit(Z, y, 0.3)
    assert np.allclose(a, ref, rtol=1e-10, atol=1e-12)
    resid = np.linalg.norm((Z.T @ Z + 0.3 * np.eye(5)) @ a - Z.T @ y)
    assert resid <= 1e-8 * np.linalg.norm(Z.T @ y)


def test_ridge_singular_lambda0():
    Z = np.array([[1.0, 1.0], [1.0, 1.0]])
    y = np.array([1.0, 1.0])
    a = ridge_fit(Z, y, 0.0)
    assert np.allclose(a, [0.5, 0.5])
    with pytest.raises(SingularSystemError):
        ridge_fit(Z, y, 0.0, allow_pinv=False)
    with pytest.raises(ValueError):
        ridge_fit(Z, y, -1.0)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.floats(1e-3, 10))
def test_ridge_first_order_optimal(seed, lam):
    rng = np.random.default_rng(seed)
    Z, y = rng.standard_normal((15, 6)), rng.standard_normal(15)
    a = ridge_fit(Z, y, lam)

    def obj(v):
        r = y - Z @ v
        return r @ r + lam * v @ v

    for _ in range(5):
        d = 1e-4 * rng.standard_normal(6)
        assert obj(a) <= obj(a + d) + 1e-12


def test_zero_target_zero_noise():
    s = explicit_spectrum([1.0, 0.5, 0.2], [0.0, 0.0, 0.0])
    d = sample_gaussian_design(20, 10, s, stream(0, 0, 0))
    assert conditional_risk(d, s.target, 0.1, 0.0) == (0.0, 0.0)
    assert mc_risk_gaussian(20, 10, 0.1, 0.0, s, replicates=3).mean_risk == 0.0


def test_exact_recovery():
    s = explicit_spectrum([1.0, 0.8, 0.6, 0.4, 0.2], np.ones(5))
    d = sample_gaussian_design(500, 50, s, stream(3, 0, 0))
    b, v = conditional_risk(d, s.target, 1e-8, 0.0)
    assert b + v < 1e-6


def test_coordinate_expansion_oracle():
    s = explicit_spectrum([1.0, 0.3], [0.7, -1.1])
    d = sample_gaussian_design(3, 2, s, stream(5, 0, 0))
    lam = 0.4
    G, F, Z = d.G, d.F, d.Z
    a = np.linalg.solve(Z.T @ Z + lam * np.eye(2), Z.T @ (G @ s.target))
    bias = 0.0
    for k in range(2):
        fitted = sum(F[j, k] * a[j] for j in range(2)) / math.sqrt(2)
        bias += (s.target[k] - fitted) ** 2
    b, _ = conditional_risk(d, s.target, lam, 0.0)
    assert b == pytest.approx(bias, abs=1e-12)


def test_variance_formula_oracle():
    s = power_law_spectrum(2.0, 0.5, trunc=30)
    d = sample_gaussian_design(40, 25, s, stream(9, 0, 0))
    lam, sigma2 = 0.05, 0.3
    A = d.Z.T @ d.Z
    R = np.linalg.inv(A + lam * np.eye(25))
    ref = sigma2 * np.trace(d.sigma_f @ A @ R @ R)
    assert conditional_risk(d, s.target, lam, sigma2)[1] == pytest.approx(ref, rel=1e-10)


def test_design_shapes_and_product():
    s = power_law_spectrum(2.0, 0.5, trunc=12)
    d = sample_gaussian_design(7, 4, s, stream(0, 0, 0))
    assert d.G.shape == (7, 12) and d.F.shape == (4, 12)
    assert np.array_equal(d.Z, d.G @ d.F.T / 2.0)


def test_dimension_mismatch():
    s = power_law_spectrum(2.0, 0.5, trunc=12)
    d = sample_gaussian_design(7, 4, s, stream(0, 0, 0))
    with pytest.raises(ValueError):
        conditional_risk(d, np.ones(5), 0.1, 0.0)


def test_sigma2_linearity():
    s = power_law_spectrum(2.0, 0.5, trunc=50)
    d = sample_gaussian_design(30, 20, s, stream(1, 0, 0))
    _, v1 = conditional_risk(d, s.target, 0.1, 0.25)
    _, v2 = conditional_risk(d, s.target, 0.1, 0.5)
    assert v2 == 2 * v1


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_bias_rotation_invariant(seed):
    rng = np.random.default_rng(seed)
    K = 6
    s = explicit_spectrum(np.sort(rng.uniform(0.1, 1, K))[::-1], rng.standard_normal(K))
    d = sample_gaussian_design(12, 8, s, rng)
    Q, _ = np.linalg.qr(rng.standard_normal((K, K)))
    rot = GaussianDesign(d.G @ Q, d.F @ Q, d.Z)
    b, v = conditional_risk(d, s.target, 0.2, 0.1)
    br, vr = conditional_risk(rot, Q.T @ s.target, 0.2, 0.1)
    assert br == pytest.approx(b, rel=1e-9, abs=1e-14)
    assert vr == pytest.approx(v, rel=1e-9)


def test_mc_reproducible_across_threads():
    s = power_law_spectrum(2.0, 0.5, trunc=200)
    a = mc_risk_gaussian(60, 40, 0.1, 0.1, s, replicates=6, seed=11, threads=1, keep=True)
    b = mc_risk_gaussian(60, 40, 0.1, 0.1, s, replicates=6, seed=11, threads=3, keep=True)
    c = mc_risk_gaussian(60, 40, 0.1, 0.1, s, replicates=6, seed=11, threads=2, keep=True)
    assert a == b == c
    d = mc_risk_gaussian(60, 40, 0.1, 0.1, s, replicates=6, seed=12)
    assert d.mean_risk != a.mean_risk


def test_mc_stderr_definition():
    s = power_law_spectrum(2.0, 0.5, trunc=200)
    e = mc_risk_gaussian(50, 30, 0.1, 0.1, s, replicates=5, seed=0, keep=True)
    r = np.array(e.per_replicate)
    assert e.std_err == pytest.approx(r.std(ddof=1) / math.sqrt(5), rel=1e-12)
    assert e.mean_risk == pytest.approx(r.mean(), rel=1e-14)
    with pytest.raises(ValueError):
        mc_risk_gaussian(50, 30, 0.1, 0.1, s, replicates=0)


def test_feature_map_realizable():
    fm = FeatureMapSpec("linear")
    target = TargetSpec("linear", np.array([1.0, -2.0, 0.5, 0.0]))
    e = mc_risk_feature_map(fm, target, n=200, p=30, d=4, lam=1e-8, sigma2=0.0, replicates=2)
    assert e.mean_risk < 1e-4


def test_feature_map_zero_inputs():
    fm = FeatureMapSpec("relu")
    target = TargetSpec("tanh", np.array([1.0, 0.5, 0.0]))
    rng = np.random.default_rng(0)
    X = np.zeros((20, 3))
    W = fm.sample_weights(10, 3, rng)
    X_test = rng.standard_normal((500, 3))
    risk = feature_map_risk(fm, target, X, target(X), W, X_test, 0.1)
    assert risk == pytest.approx(float(np.mean(target(X_test) ** 2)), rel=1e-12)


def test_feature_map_reproducible():
    fm = FeatureMapSpec("erf")
    target = TargetSpec("tanh")
    a = mc_risk_feature_map(fm, target, 50, 40, 5, 0.1, 0.1, replicates=3, seed=4, threads=1)
    b = mc_risk_feature_map(fm, target, 50, 40, 5, 0.1, 0.1, replicates=3, seed=4, threads=3)
    assert a == b
