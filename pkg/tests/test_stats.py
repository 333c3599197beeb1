import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ccp import laws, stats
from ccp.stats import TestReport

# Direct summation of 1/2 sum_k |2^{-k-1} - (2/3)(1/3)^k|, i.e. the "Geom(1/3)"
# of the failure-probability convention, and of the success convention.
TV_GEOM_HALF_THIRD = 0.16666666666666666
TV_GEOM_HALF_THIRD_SUCCESS = 0.19444444444444445


def test_ks_null_calibration(rng):
    x = laws.sample_std_exp(rng, 1_000_000)
    assert stats.ks_statistic(x, laws.std_exp_cdf) < 0.002


def test_ks_degenerate():
    assert stats.ks_statistic(np.zeros(10), laws.std_exp_cdf) == 1.0
    assert stats.ks_two_sample([0, 1, 2], [5, 6, 7]) == 1.0


@settings(max_examples=40)
@given(st.lists(st.floats(-100, 100), min_size=2, max_size=50),
       st.lists(st.floats(-100, 100), min_size=2, max_size=50))
def test_ks_two_sample_symmetric(a, b):
    d = stats.ks_two_sample(a, b)
    assert d == stats.ks_two_sample(b, a)
    assert 0 <= d <= 1


def test_ecdf_right_continuous():
    f = stats.Ecdf([0, 1, 1, 2])
    assert f(1) == 0.75 and f(0.999) == 0.25 and f(-1) == 0 and f(2) == 1


def test_tv_values():
    k = np.arange(400)
    a = laws.geom_pmf(0.5, k)
    b = (2 / 3) * (1 / 3) ** k
    assert stats.tv_distance(a, a) == 0
    assert stats.tv_distance(a, b) == pytest.approx(TV_GEOM_HALF_THIRD, abs=1e-14)
    c = laws.geom_pmf(1 / 3, k)
    assert stats.tv_distance(a, c) == pytest.approx(TV_GEOM_HALF_THIRD_SUCCESS, abs=1e-14)
    assert stats.tv_distance([1.0], [1.0], 0, 1) == 1.0


@settings(max_examples=40)
@given(st.lists(st.floats(0, 1), min_size=1, max_size=20), st.lists(st.floats(0, 1), min_size=1, max_size=20),
       st.integers(0, 5), st.integers(0, 5))
def test_tv_symmetric_nonnegative(a, b, oa, ob):
    a = np.asarray(a) / max(sum(a), 1e-9)
    b = np.asarray(b) / max(sum(b), 1e-9)
    d = stats.tv_distance(a, b, oa, ob)
    assert d >= 0 and d == pytest.approx(stats.tv_distance(b, a, ob, oa))


def test_chi_square_null_calibration():
    # p-values under the null should look uniform
    ps = []
    for i in range(200):
        rng = np.random.default_rng(i)
        x = rng.binomial(20, 0.3, 20_000)
        k = np.arange(21)
        pmf = np.array([math.comb(20, j) * 0.3**j * 0.7 ** (20 - j) for j in k])
        ps.append(stats.chi_square(np.bincount(x, minlength=21), pmf)[2])
    assert stats.ks_statistic(ps, lambda p: np.clip(p, 0, 1)) < 0.15


def test_chi_square_pooling_floor():
    probs = np.array([0.9, 0.05, 0.03, 0.01, 0.005, 0.005])
    groups = stats._pool_bins(probs * 100)
    expected = np.bincount(groups, weights=probs * 100)
    assert expected.min() >= stats.MIN_EXPECTED


@settings(max_examples=40)
@given(st.lists(st.floats(0.001, 1), min_size=2, max_size=30), st.integers(10, 10_000))
def test_pooling_never_leaves_small_bins(p, m):
    probs = np.asarray(p) / sum(p)
    e = probs * m
    groups = stats._pool_bins(e)
    pooled = np.bincount(groups, weights=e)
    if e.sum() >= stats.MIN_EXPECTED:
        assert pooled.min() >= stats.MIN_EXPECTED - 1e-9


def test_chi_square_detects_wrong_law(rng):
    x = rng.poisson(1.0, 50_000)
    obs = np.bincount(x)
    _, _, p = stats.chi_square(obs, laws.geom_pmf(0.5, np.arange(obs.size)))
    assert p < 1e-6


def test_wasserstein():
    x = np.array([3.0, 1.0, 2.0])
    assert stats.wasserstein1(x, x) == 0
    assert stats.wasserstein1(x + 0.7, x) == pytest.approx(0.7)
    with pytest.raises(ValueError):
        stats.wasserstein1(x, x[:2])


def test_wasserstein_null(rng):
    x = laws.sample_std_exp(rng, 1_000_000)
    assert stats.wasserstein1(x, laws.std_exp_quantile) < 0.01


def test_mean_ci_and_trend():
    assert stats.mean_ci(np.full(40, 2.5)) == (2.5, 0.0)
    assert stats.trend_check([5, 3, 2, 1.5])
    assert not stats.trend_check([1, 2, 3])
    assert stats.trend_check([5, 3, 3.1, 1], noise=[0.1] * 4)
    assert not stats.trend_check([5, 3, 3.5, 1], noise=[0.1] * 4)
    assert not stats.trend_check([5, 5.01, 4, 4.01], noise=[1.0] * 4)


def test_report_roundtrip():
    rep = TestReport("ks", "ks", 0.01, 0.05, 1000, seed=3, metadata={"n": np.int64(5)})
    assert rep.verdict is True
    assert '"n": 5' in rep.to_json()
    assert rep.line().startswith("[PASS]")
    assert TestReport("x", "x", 0.1, 0.05, 10).verdict is False
