import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ccp import exact, laws, sim, stats, thinning
from ccp.streams import run_rng
from ccp.thinning import ThinningSpec


def binom_pmf(x, p):
    return np.array([math.comb(x, k) * p**k * (1 - p) ** (x - k) for k in range(x + 1)])


@settings(max_examples=30)
@given(x=st.integers(0, 500), method=st.sampled_from(["binomial-shortcut", "bernoulli-sum"]))
def test_thin_extremes(x, method):
    rng = run_rng(x)
    assert thinning.thin_count(x, ThinningSpec(0.0, method), rng) == 0
    assert thinning.thin_count(x, ThinningSpec(1.0, method), rng) == x


def test_spec_validation():
    with pytest.raises(ValueError):
        ThinningSpec(1.5)
    with pytest.raises(ValueError):
        ThinningSpec(0.5, "coin")
    with pytest.raises(ValueError):
        thinning.thin_count(-1, ThinningSpec(0.5), run_rng(0))


def test_thin_mean(rng):
    y = thinning.thin_count(np.full(1_000_000, 100), ThinningSpec(0.3), rng)
    assert abs(y.mean() - 30) < 4 * y.std() / 1000


@pytest.mark.parametrize("x,p", [(5, 0.5), (20, 0.1)])
@pytest.mark.parametrize("method", ["binomial-shortcut", "bernoulli-sum"])
def test_thin_law_is_binomial(rng, x, p, method):
    y = thinning.thin_count(np.full(1_000_000, x), ThinningSpec(p, method), rng)
    _, _, pval = stats.chi_square(np.bincount(y, minlength=x + 1), binom_pmf(x, p))
    assert pval > 1e-3


def test_thinning_composes(rng):
    x = rng.poisson(4.0, 400_000)
    a = thinning.thin_count(thinning.thin_count(x, ThinningSpec(0.6), rng), ThinningSpec(0.5), rng)
    b = thinning.thin_count(x, ThinningSpec(0.3), rng)
    _, _, p = stats.chi_square_two_sample(np.bincount(a), np.bincount(b))
    assert p > 1e-3


def test_empirical_pgf_basics(rng):
    assert thinning.empirical_pgf(np.zeros(10, int), 0.3) == (1.0, 0.0)
    assert thinning.empirical_pgf([3, 4], 1.0) == (1.0, 0.0)
    g = rng.geometric(0.5, 100_000) - 1
    est, se = thinning.empirical_pgf(g, 0.0)
    assert abs(est - 0.5) < 4 * se


@settings(max_examples=25)
@given(trials=st.integers(0, 40), prob=st.floats(0, 1), p=st.floats(0, 1), u=st.floats(0, 1))
def test_pgf_identity_closed_form_binomial(trials, prob, p, u):
    # p ⊙ Binomial(N, a) = Binomial(N, p a): both sides of the PGF identity in closed form
    lhs = thinning.binomial_pgf(trials, p * prob, u)
    rhs = thinning.binomial_pgf(trials, prob, p * u + 1 - p)
    assert lhs == pytest.approx(rhs, abs=1e-12)


def test_pgf_identity_zero_source(rng):
    rep = thinning.verify_pgf_thinning_identity(np.zeros(1000, int), 0.4, [0, 0.5, 1], rng)
    assert rep.verdict and rep.value == 0


def test_pgf_identity_simulated_u(rng):
    u = sim.batch(sim.SimConfig(50, 1, seed=2), 20_000).u[:, 0]
    rep = thinning.verify_pgf_thinning_identity(u, 1 / math.log(50), [0, 0.25, 0.5, 0.75, 1], rng)
    assert rep.verdict, rep.metadata


@pytest.mark.parametrize("r,k,expected", [(1, 0, 0.5), (2, 2, 2 / 27)])
def test_mixed_pmf_examples(r, k, expected):
    assert thinning.mixed_poisson_pmf_exp_mixing(r, k) == pytest.approx(expected, abs=1e-16)


def test_mixed_pmf_equals_geom_marginal():
    k = np.arange(31)
    for r in range(1, 6):
        a = thinning.mixed_poisson_pmf_exp_mixing(r, k)
        b = laws.geom_marginal_pmf(r, k)
        assert np.max(np.abs(a - b)) <= 1e-14


@pytest.mark.parametrize("r", [1, 2, 3])
def test_mixed_pmf_quadrature(r):
    f = math.factorial(r)
    for k in range(6):
        q = thinning.mixed_poisson_pmf_quad(k, lambda y: f * math.exp(-f * y))
        assert q == pytest.approx(float(thinning.mixed_poisson_pmf_exp_mixing(r, k)), rel=1e-9)


def test_mixed_poisson_spec(rng):
    spec = thinning.MixedPoissonSpec(lambda g, m: np.outer(laws.sample_std_exp(g, m), [1.0, 0.5]))
    x = spec.sample(rng, 200_000)
    assert x.shape == (200_000, 2)
    assert stats.tv_to_law(x[:, 1], laws.GeomMarginal(2).pmf) < 0.01


def test_thinning_trick_small_grid():
    samples = {n: sim.batch(sim.SimConfig(n, 1, backend="conditional", seed=1), 20_000).u[:, 0]
               for n in (100, 1000, 10_000)}
    trend, bound = thinning.verify_thinning_trick(samples, 1, run_rng(4), seed=1)
    assert trend.verdict, trend.metadata
    assert bound.verdict
    assert all(1.0 <= w <= 1.2 for w in bound.metadata["exact"])
    with pytest.raises(ValueError):
        thinning.verify_thinning_trick({2: samples[100], 100: samples[100]}, 1, run_rng(4))


def test_trick_bound_is_hyperharmonic_over_log():
    for n in (100, 1000, 10_000, 100_000):
        w = exact.hyperharmonic_recursive(n, 1, mode="float").approx / math.log(n)
        assert 1.0 <= w <= 1.2
