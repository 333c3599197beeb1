import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ccp import laws, stats


def test_gumbel_values():
    assert laws.gumbel_cdf(0, 0.0) == pytest.approx(math.exp(-1), abs=1e-15)
    x = -math.log(math.log(2))
    assert x == pytest.approx(0.366513, abs=1e-6)
    assert laws.gumbel_cdf(1, x) == pytest.approx(0.5, abs=1e-12)


@settings(max_examples=50)
@given(r=st.integers(0, 25), x=st.floats(-10, 30))
def test_gumbel_scale_identity(r, x):
    assert laws.gumbel_cdf(r, x) == pytest.approx(laws.gumbel_cdf(0, x + math.log(math.factorial(r))),
                                                  rel=1e-12, abs=1e-300)


def test_cdfs_monotone_and_bounded():
    x = np.linspace(-30, 30, 2001)
    for f in (lambda v: laws.gumbel_cdf(2, v), laws.std_exp_cdf, lambda v: laws.logistic_cdf(1, 3, v),
              laws.GeomMarginal(2).cdf, laws.GeomSum().cdf):
        y = f(x)
        assert np.all(np.diff(y) >= 0)
        assert y.min() >= 0 and y.max() <= 1
        assert y[0] < 1e-6 and y[-1] > 1 - 1e-6


def test_logistic_values():
    assert laws.logistic_cdf(0, 1, 0.0) == 0.5
    assert laws.logistic_cdf(0, 1, 800.0) == 1.0
    with pytest.raises(ValueError):
        laws.logistic_cdf(2, 2, 0.0)


def test_geom_marginal_values():
    assert laws.geom_marginal_pmf(1, 0) == 0.5
    assert laws.geom_marginal_pmf(2, 1) == pytest.approx(2 / 9, abs=1e-16)
    for r in range(1, 6):
        assert math.fsum(laws.geom_marginal_pmf(r, np.arange(200))) == pytest.approx(1.0, abs=1e-14)
    with pytest.raises(ValueError):
        laws.geom_marginal_pmf(0, 1)


def test_geom_sum_param():
    assert laws.geom_sum_param(laws.ALL_N) == pytest.approx(math.exp(-1), abs=1e-16)
    assert laws.geom_sum_param({1}) == 0.5
    assert laws.geom_sum_param(set()) == 1.0
    assert laws.geom_sum_param(range(1, 25)) == pytest.approx(math.exp(-1), abs=1e-15)


def test_joint_pgf_values():
    assert laws.joint_g_pgf([1, 1, 1]) == 1.0
    assert laws.joint_g_pgf([0]) == 0.5
    assert laws.joint_g_pgf([0, 0]) == pytest.approx(0.4, abs=1e-16)


@settings(max_examples=50)
@given(s=st.integers(1, 8), data=st.data())
def test_joint_pgf_marginal_consistency(s, data):
    r = data.draw(st.integers(1, s))
    u = data.draw(st.floats(0, 1))
    us = [1.0] * s
    us[r - 1] = u
    assert abs(laws.joint_g_pgf(us) - laws.geom_marginal_pgf(r, u)) < 1e-12


@settings(max_examples=30)
@given(idx=st.sets(st.integers(1, 6), min_size=1), u=st.floats(0, 1))
def test_joint_pgf_on_index_set_is_geometric(idx, u):
    us = [u if r in idx else 1.0 for r in range(1, 7)]
    law = laws.GeomSum(tuple(idx))
    assert laws.joint_g_pgf(us) == pytest.approx(float(law.pgf(u)), abs=1e-12)


def test_mixed_poisson_degenerate_hook(rng):
    assert laws.sample_mixed_poisson_seq(4, rng, e=0.0).tolist() == [0, 0, 0, 0]


def test_mixed_poisson_marginals_and_sum(rng):
    g = laws.sample_mixed_poisson_seq(3, rng, 1_000_000)
    for r in (1, 2, 3):
        assert stats.tv_to_law(g[:, r - 1], laws.GeomMarginal(r).pmf) < 0.005
    total = g.sum(axis=1)
    p = laws.geom_sum_param({1, 2, 3})
    obs = np.bincount(total)
    _, _, pval = stats.chi_square(obs, laws.geom_pmf(p, np.arange(obs.size)))
    assert pval > 0.01


def test_balls_into_bins_single_draws(rng):
    occ = [laws.sample_balls_into_bins(rng) for _ in range(20_000)]
    empty = np.mean([len(o) == 0 for o in occ])
    assert abs(empty - math.exp(-1)) < 4 * math.sqrt(math.exp(-1) * (1 - math.exp(-1)) / 20_000)
    assert all(o[-1] > 0 for o in occ if o)


def test_balls_into_bins_matches_mixed_poisson(rng):
    m = 1_000_000
    a = laws.sample_balls_into_bins(rng, s=2, size=m)
    b = laws.sample_mixed_poisson_seq(2, rng, m)
    cells = lambda x: np.minimum(x[:, 0], 9) * 10 + np.minimum(x[:, 1], 9)
    ca = np.bincount(cells(a), minlength=100)
    cb = np.bincount(cells(b), minlength=100)
    order = np.argsort(-(ca + cb), kind="stable")
    _, _, p = stats.chi_square_two_sample(ca[order], cb[order])
    assert p > 0.01


def test_balls_total_is_geometric(rng):
    tot = laws.sample_balls_total(rng, 200_000)
    obs = np.bincount(tot)
    _, _, p = stats.chi_square(obs, laws.geom_pmf(math.exp(-1), np.arange(obs.size)))
    assert p > 0.01


def test_samplers_ks(rng):
    m = 1_000_000
    assert stats.ks_statistic(laws.sample_gumbel(0, rng, m), lambda x: laws.gumbel_cdf(0, x)) < 0.002
    e = laws.sample_std_exp(rng, m)
    assert stats.ks_statistic(-np.log(e), lambda x: laws.gumbel_cdf(0, x)) < 0.002
    lg = laws.sample_logistic(1, 3, rng, m)
    diff = laws.sample_gumbel(3, rng, m) - laws.sample_gumbel(1, rng, m)
    assert stats.ks_two_sample(lg, diff) < 0.005
    assert stats.ks_statistic(lg, lambda x: laws.logistic_cdf(1, 3, x)) < 0.002


def test_factorial_boundary():
    assert laws.factorial(20) == float(math.factorial(20))
    assert laws.factorial(25) == pytest.approx(float(math.factorial(25)), rel=1e-12)


def test_make_law():
    assert laws.make_law("gumbel", r=2) == laws.Gumbel(2)
    assert laws.make_law("geomsum", index_set=[1, 2]).p == pytest.approx(0.4)
    assert isinstance(laws.make_law("exp"), laws.StdExp)
    with pytest.raises(ValueError):
        laws.make_law("cauchy")
