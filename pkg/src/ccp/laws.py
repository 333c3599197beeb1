"""Limit laws of the extended coupon collector.

Evaluators are plain functions of their parameters; samplers take an explicit
``numpy.random.Generator``. The small classes at the bottom bundle each law's
evaluators and sampler behind one tag, which is what the ``law`` CLI command
and the verification suites use.

``r!`` is exact in floating point up to ``r = 20``; beyond that it goes
through ``lgamma``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from ccp.streams import exponential, open_uniform

ALL_N = "N"  # index set "all of N" for geometric sums


def factorial(r: int) -> float:
    if r < 0:
        raise ValueError("r must be >= 0")
    if r <= 20:
        return float(math.factorial(r))
    return math.exp(math.lgamma(r + 1.0))


def log_factorial(r: int) -> float:
    return math.lgamma(r + 1.0)


def gumbel_cdf(r: int, x):
    """``P{B_r < x} = exp(-e^{-x} / r!)``."""
    if r < 0:
        raise ValueError("r must be >= 0")
    return np.exp(-np.exp(-np.asarray(x, dtype=float) - log_factorial(r)))


def std_exp_cdf(x):
    x = np.asarray(x, dtype=float)
    return np.where(x > 0, -np.expm1(-np.maximum(x, 0.0)), 0.0)


def std_exp_quantile(q):
    return -np.log1p(-np.asarray(q, dtype=float))


def logistic_cdf(r1: int, r2: int, x):
    """``r2! / (r2! + r1! e^{-x})``, the law of ``B_{r2} - B_{r1}``."""
    _check_pair(r1, r2)
    shift = log_factorial(r1) - log_factorial(r2)
    return 1.0 / (1.0 + np.exp(shift - np.asarray(x, dtype=float)))


def _check_pair(r1, r2):
    if not 0 <= r1 < r2:
        raise ValueError(f"need 0 <= r1 < r2, got r1={r1}, r2={r2}")


def geom_marginal_pmf(r: int, k):
    """``P{G_r = k} = (1/(r!+1))^k r!/(r!+1)``."""
    if r < 1:
        raise ValueError("r must be >= 1")
    f = factorial(r)
    k = np.asarray(k)
    if np.any(k < 0):
        raise ValueError("k must be >= 0")
    return (1.0 / (f + 1.0)) ** k * (f / (f + 1.0))


def geom_pmf(p: float, k):
    """``P{X = k} = (1-p)^k p`` on ``k = 0, 1, ...``."""
    k = np.asarray(k)
    return (1.0 - p) ** k * p


def geom_sum_param(index_set) -> float:
    """``P_I = (1 + sum_{r in I} 1/r!)^{-1}``; ``ALL_N`` uses ``e - 1``."""
    if isinstance(index_set, str):
        if index_set != ALL_N:
            raise ValueError(f"unknown index set {index_set!r}")
        return 1.0 / math.e
    idx = set(int(r) for r in index_set)
    if any(r < 1 for r in idx):
        raise ValueError("index set must contain positive integers")
    return 1.0 / (1.0 + math.fsum(1.0 / factorial(r) for r in sorted(idx)))


def joint_g_pgf(us: Iterable[float]) -> float:
    """``E prod u_r^{G_r} = (1 + sum_r (1 - u_r)/r!)^{-1}`` over ``r = 1..s``."""
    us = [float(u) for u in us]
    if any(not 0.0 <= u <= 1.0 for u in us):
        raise ValueError("all u_r must lie in [0, 1]")
    return 1.0 / (1.0 + math.fsum((1.0 - u) / factorial(r) for r, u in enumerate(us, start=1)))


def geom_marginal_pgf(r: int, u):
    f = factorial(r)
    return f / (f + 1.0 - np.asarray(u, dtype=float))


# -- samplers -------------------------------------------------------------------

def sample_std_exp(rng, size=None):
    return exponential(rng, size)


def sample_gumbel(r: int, rng, size=None):
    """``-ln(r! E)`` with ``E ~ Exp(1)``: the rightmost point of a level-r limit process."""
    if r < 0:
        raise ValueError("r must be >= 0")
    return -log_factorial(r) - np.log(sample_std_exp(rng, size))


def sample_logistic(r1: int, r2: int, rng, size=None):
    """Inverse-CDF draw of ``L_{r1,r2}``."""
    _check_pair(r1, r2)
    u = open_uniform(rng, size)
    return log_factorial(r1) - log_factorial(r2) + np.log(u) - np.log1p(-u)


def sample_mixed_poisson_seq(s: int, rng, size=None, e=None):
    """``(G_1..G_s) = (N_r(E / r!))``: one ``E ~ Exp(1)``, then independent Poissons.

    ``e`` fixes the mixing variable (test hook). Returns shape ``(s,)`` or
    ``(size, s)``.
    """
    if s < 1:
        raise ValueError("s must be >= 1")
    if e is None:
        e = sample_std_exp(rng, size)
    e = np.asarray(e, dtype=float)
    scale = np.array([1.0 / factorial(r) for r in range(1, s + 1)])
    lam = e[..., None] * scale
    return rng.poisson(lam)


def sample_balls_into_bins(rng, s: int | None = None, size=None):
    """Balls go to bin ``r`` with probability ``1/(e r!)`` until one lands in bin 0.

    Without ``size``: returns the occupancy list ``G_1, G_2, ...`` up to the
    last non-empty bin. With ``size``: returns an ``(size, s)`` array of the
    first ``s`` bins, simulated ball by ball for all rows at once.
    """
    if size is None:
        occ: list[int] = []
        while True:
            b = int(rng.poisson(1.0))
            if b == 0:
                return occ
            if b > len(occ):
                occ.extend([0] * (b - len(occ)))
            occ[b - 1] += 1
    if s is None or s < 1:
        raise ValueError("batch sampling needs s >= 1")
    out = np.zeros((size, s), dtype=np.int64)
    active = np.arange(size)
    while active.size:
        b = rng.poisson(1.0, size=active.size)
        live = b > 0
        rows, bins = active[live], b[live]
        tracked = bins <= s
        np.add.at(out, (rows[tracked], bins[tracked] - 1), 1)
        active = rows
    return out


def sample_balls_total(rng, size=None):
    """Total number of balls placed before the stop (law ``Geom(e^{-1})``)."""
    if size is None:
        return int(sum(sample_balls_into_bins(rng)))
    total = np.zeros(size, dtype=np.int64)
    active = np.arange(size)
    while active.size:
        b = rng.poisson(1.0, size=active.size)
        active = active[b > 0]
        total[active] += 1
    return total


# -- tagged law objects ------------------------------------------------------------

@dataclass(frozen=True)
class Gumbel:
    r: int = 0

    def cdf(self, x):
        return gumbel_cdf(self.r, x)

    def sample(self, rng, size=None):
        return sample_gumbel(self.r, rng, size)


@dataclass(frozen=True)
class StdExp:
    def cdf(self, x):
        return std_exp_cdf(x)

    def quantile(self, q):
        return std_exp_quantile(q)

    def sample(self, rng, size=None):
        return sample_std_exp(rng, size)


@dataclass(frozen=True)
class GeomMarginal:
    r: int = 1

    def pmf(self, k):
        return geom_marginal_pmf(self.r, k)

    def cdf(self, x):
        x = np.floor(np.asarray(x, dtype=float))
        q = 1.0 / (factorial(self.r) + 1.0)
        return np.where(x >= 0, 1.0 - q ** (np.maximum(x, 0) + 1), 0.0)

    def pgf(self, u):
        return geom_marginal_pgf(self.r, u)

    def sample(self, rng, size=None):
        p = factorial(self.r) / (factorial(self.r) + 1.0)
        return rng.geometric(p, size) - 1


@dataclass(frozen=True)
class GeomSum:
    index_set: object = ALL_N

    @property
    def p(self) -> float:
        return geom_sum_param(self.index_set)

    def pmf(self, k):
        return geom_pmf(self.p, k)

    def cdf(self, x):
        x = np.floor(np.asarray(x, dtype=float))
        return np.where(x >= 0, 1.0 - (1.0 - self.p) ** (np.maximum(x, 0) + 1), 0.0)

    def pgf(self, u):
        return self.p / (1.0 - (1.0 - self.p) * np.asarray(u, dtype=float))

    def sample(self, rng, size=None):
        return rng.geometric(self.p, size) - 1


@dataclass(frozen=True)
class Logistic:
    r1: int = 0
    r2: int = 1

    def cdf(self, x):
        return logistic_cdf(self.r1, self.r2, x)

    def sample(self, rng, size=None):
        return sample_logistic(self.r1, self.r2, rng, size)


@dataclass(frozen=True)
class MixedPoissonSeq:
    s: int = 2

    def pgf(self, us):
        return joint_g_pgf(us)

    def marginal(self, r: int) -> GeomMarginal:
        return GeomMarginal(r)

    def sample(self, rng, size=None):
        return sample_mixed_poisson_seq(self.s, rng, size)


def make_law(tag: str, **params):
    tag = tag.lower()
    if tag == "gumbel":
        return Gumbel(int(params.get("r", 0)))
    if tag in ("exp", "stdexp"):
        return StdExp()
    if tag in ("geom", "geommarginal"):
        return GeomMarginal(int(params.get("r", 1)))
    if tag in ("geomsum",):
        idx = params.get("index_set", ALL_N)
        return GeomSum(idx if isinstance(idx, str) else tuple(idx))
    if tag == "logistic":
        return Logistic(int(params.get("r1", 0)), int(params.get("r2", 1)))
    if tag in ("mixedpoisson", "mixedpoissonseq"):
        return MixedPoissonSeq(int(params.get("s", 2)))
    raise ValueError(f"unknown law {tag!r}")
