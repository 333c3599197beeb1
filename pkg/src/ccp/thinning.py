"""Discrete p-thinning and the mixed-Poisson correspondence.

``p ⊙ X`` keeps each of the ``X`` units independently with probability
``p``. Its PGF satisfies ``G_{p⊙X}(u) = G_X(p u + 1 - p)``, and thinning a
sequence ``X_n`` with ``p_n -> 0`` turns a scaling limit ``p_n X_n -> Y``
into a mixed-Poisson limit with mixing law ``Y`` (and back, under a bounded
``p_n E X_n``). The harnesses below check both facts on samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np
from scipy import integrate

from ccp import exact, laws
from ccp.stats import TestReport, tv_noise, tv_to_law, trend_check

# Absolute bound on |G_{p⊙X}(u) - G_X(pu+q)| at m = 1e6 samples.
PGF_ABS_TOL = 0.01
PGF_SE_MULT = 5.0


@dataclass(frozen=True)
class ThinningSpec:
    p: float
    method: str = "binomial-shortcut"

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must lie in [0, 1], got {self.p}")
        if self.method not in ("binomial-shortcut", "bernoulli-sum"):
            raise ValueError(f"unknown thinning method {self.method!r}")


@dataclass(frozen=True)
class MixedPoissonSpec:
    """Mixed Poisson vector with mixing sampler ``mixing(rng, size) -> (size, s)``."""

    mixing: Callable

    def sample(self, rng, size: int) -> np.ndarray:
        y = np.asarray(self.mixing(rng, size), dtype=float)
        if np.any(y < 0):
            raise ValueError("mixing samples must be non-negative")
        return rng.poisson(y)


def thin_count(x, spec: ThinningSpec, rng):
    """``p ⊙ x`` for a count or an array of counts."""
    x = np.asarray(x, dtype=np.int64)
    if np.any(x < 0):
        raise ValueError("counts must be non-negative")
    if spec.method == "binomial-shortcut":
        out = rng.binomial(x, spec.p)
    else:
        flat = x.ravel()
        keep = rng.random(int(flat.sum())) < spec.p
        owner = np.repeat(np.arange(flat.shape[0]), flat)
        out = np.bincount(owner, weights=keep, minlength=flat.shape[0]).astype(np.int64)
        out = out.reshape(x.shape)
    return int(out) if np.ndim(out) == 0 else out


def empirical_pgf(samples, u: float):
    """Mean of ``u**X`` and its standard error."""
    s = np.asarray(samples)
    if s.size == 0:
        raise ValueError("need at least one sample")
    if not 0.0 <= u <= 1.0:
        raise ValueError("u must lie in [0, 1]")
    if u == 1.0:
        return 1.0, 0.0
    vals = np.power(float(u), s.astype(float))
    se = float(vals.std(ddof=1) / math.sqrt(s.size)) if s.size > 1 else 0.0
    return float(vals.mean()), se


def binomial_pgf(trials: int, prob: float, u: float) -> float:
    return (1.0 - prob + prob * u) ** trials


def verify_pgf_thinning_identity(samples, p: float, u_grid, rng, name: str = "pgf-thinning",
                                 seed: int | None = None, exact_pgf: Callable | None = None) -> TestReport:
    """Compare ``G_{p⊙X}(u)`` and ``G_X(pu+q)`` on a grid, both estimated from ``samples``.

    Passes when every gap is within ``5`` combined standard errors and below
    ``0.01``. With ``exact_pgf`` the closed form of ``G_X`` is checked against
    both sides as well.
    """
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie in (0, 1)")
    x = np.asarray(samples, dtype=np.int64)
    thinned = thin_count(x, ThinningSpec(p), rng)
    q = 1.0 - p
    worst = 0.0
    ok = True
    rows = []
    for u in u_grid:
        lhs, se_l = empirical_pgf(thinned, u)
        rhs, se_r = empirical_pgf(x, p * u + q)
        gap = abs(lhs - rhs)
        bound = PGF_SE_MULT * math.hypot(se_l, se_r)
        good = gap <= bound and gap < PGF_ABS_TOL
        row = {"u": u, "lhs": lhs, "rhs": rhs, "se": math.hypot(se_l, se_r)}
        if exact_pgf is not None:
            truth = exact_pgf(p * u + q)
            row["exact"] = truth
            for est, se in ((lhs, se_l), (rhs, se_r)):
                good = good and abs(est - truth) <= max(PGF_SE_MULT * se, 0.0) + 1e-12 and abs(est - truth) < PGF_ABS_TOL
        ok = ok and good
        worst = max(worst, gap)
        rows.append(row)
    return TestReport(name, "max_abs_gap", worst, PGF_ABS_TOL, x.size, seed, ok,
                      {"p": p, "grid": rows})


def mixed_poisson_pmf_exp_mixing(r: int, k) -> float:
    """``P{N(E/r!) = k}`` with ``E ~ Exp(1)``: ``r!/(r!+1)^{k+1}``.

    Closed form of ``∫ e^{-y} y^k/k! · r! e^{-r! y} dy``.
    """
    if r < 1:
        raise ValueError("r must be >= 1")
    f = laws.factorial(r)
    k = np.asarray(k, dtype=float)
    return f / (f + 1.0) ** (k + 1.0)


def mixed_poisson_pmf_quad(k: int, mixing_density: Callable, upper: float = np.inf) -> float:
    """``∫ e^{-y} y^k / k! F(dy)`` by quadrature, for a mixing law with a density."""
    logk = math.lgamma(k + 1.0)

    def integrand(y):
        if y <= 0:
            return 0.0
        return math.exp(-y + k * math.log(y) - logk) * mixing_density(y)

    val, _ = integrate.quad(integrand, 0.0, upper, limit=200)
    return val


def verify_thinning_trick(samples_by_n: Mapping[int, np.ndarray], r: int, rng,
                          seed: int | None = None) -> list[TestReport]:
    """Empirical witness of the thinning trick for ``X_n = U_r^(n)``, ``p_n = ln^{-r} n``.

    (a) TV between the law of ``p_n ⊙ U_r^(n)`` and ``Geom(r!/(r!+1))``
    should decrease along the grid; (b) ``p_n E U_r^(n) = p_n H_r(n)`` should
    stay bounded. Trends are reported; the limit itself is never asserted.
    """
    grid = sorted(samples_by_n)
    if len(grid) < 2 or grid[0] < 3:
        raise ValueError("need an increasing n grid with n >= 3")
    tvs, noises, witnesses, emp = [], [], [], []
    law = laws.GeomMarginal(r)
    for n in grid:
        p = math.log(n) ** (-r)
        x = np.asarray(samples_by_n[n], dtype=np.int64)
        thinned = thin_count(x, ThinningSpec(min(p, 1.0)), rng)
        tvs.append(tv_to_law(thinned, law.pmf))
        noises.append(tv_noise(law.pmf(np.arange(60)), x.size))
        witnesses.append(p * exact.hyperharmonic_recursive(n, r, mode="float").approx)
        emp.append(p * float(x.mean()))
    trend = TestReport(f"thinning-trick r={r} TV trend", "tv_trend_ok", 0.0 if trend_check(tvs, noises) else 1.0,
                       0.0, sum(np.asarray(samples_by_n[n]).size for n in grid), seed, None,
                       {"n": grid, "tv": tvs, "noise": noises})
    bounded = TestReport(f"thinning-trick r={r} E-bound", "sup_p_EX", max(witnesses), float("inf"),
                         trend.n_samples, seed, bool(np.all(np.isfinite(witnesses))),
                         {"n": grid, "exact": witnesses, "empirical": emp})
    return [trend, bounded]
