import math

import numpy as np
import pytest

import ibreg


def test_fit_recovers_truth():
    d = ibreg.generate(400, seed=3)
    r = ibreg.fit(d["y"], d["S"], d["X"], d["Z"])
    assert r["converged"]
    est = np.concatenate([r["kappa"], r["beta"], r["gamma"]])
    truth = np.array([0, 2, 2, -1.8, -2, 4.5])
    assert np.all(np.abs(est - truth) < 3 * r["se"])


def test_zero_alphas_match_mle():
    d = ibreg.generate(150, seed=4, scenario=1)
    m = ibreg.fit(d["y"], d["S"], d["X"], d["Z"])
    for est in ("mlse", "mlme"):
        r = ibreg.fit(d["y"], d["S"], d["X"], d["Z"], estimator=est, alpha_disc=0.0, alpha_cont=0.0)
        assert np.allclose(r["beta"], m["beta"], atol=1e-6)
        assert np.allclose(r["gamma"], m["gamma"], atol=1e-6)


def test_robust_fit_resists_contamination():
    d = ibreg.generate(200, seed=5, scenario=1)
    m = ibreg.fit(d["y"], d["S"], d["X"], d["Z"])
    r = ibreg.fit(d["y"], d["S"], d["X"], d["Z"], estimator="mlse")
    assert r["tuned"]
    assert r["alpha_cont"] > 0
    assert abs(r["gamma"][0] - 4.5) < abs(m["gamma"][0] - 4.5)
    assert r["weights"].min() < 0.1


def test_helpers():
    assert ibreg.power_integral(0.5, 2.0, 1.5) == pytest.approx(math.pi / 8, rel=1e-10)
    z, p = ibreg.wald_test(-2.774, 1.0)
    assert round(p, 3) == 0.006
    assert ibreg.sqv(np.array([0.1, 0.2]), np.array([0.1, 0.16])) == pytest.approx(0.02)
    d = ibreg.generate(300, seed=6)
    r = ibreg.fit(d["y"], d["S"], d["X"], d["Z"])
    q = ibreg.quantile_residuals(d["y"], d["S"], d["X"], d["Z"], r["kappa"], r["beta"], r["gamma"], seed=2)
    assert q.shape == (300,)
    assert ibreg.ks_distance_normal(q) < 0.1


def test_errors():
    d = ibreg.generate(50, seed=1)
    with pytest.raises(ValueError):
        ibreg.fit(d["y"], d["S"], d["X"], d["Z"], estimator="nope")
    with pytest.raises(ValueError):
        ibreg.fit(d["y"] + 2.0, d["S"], d["X"], d["Z"])
    with pytest.raises(ValueError):
        ibreg.wald_test(1.0, 0.0)
