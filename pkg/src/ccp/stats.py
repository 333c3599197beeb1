"""Goodness-of-fit statistics and the report type every check returns."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, asdict
from typing import Callable

import numpy as np
from scipy import stats as _sps

MIN_EXPECTED = 5.0


@dataclass
class TestReport:
    __test__ = False  # keep pytest from collecting this class

    name: str
    statistic: str
    value: float
    threshold: float
    n_samples: int
    seed: int | None = None
    verdict: bool | None = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.verdict is None:
            self.verdict = bool(self.value <= self.threshold)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["value"] = float(self.value)
        out["threshold"] = float(self.threshold)
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, default=_jsonable)

    def line(self) -> str:
        mark = "PASS" if self.verdict else "FAIL"
        return f"[{mark}] {self.name}: {self.statistic}={self.value:.6g} (threshold {self.threshold:.6g}, m={self.n_samples})"


def _jsonable(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(type(o))


class Ecdf:
    """Right-continuous empirical CDF."""

    def __init__(self, samples):
        self.x = np.sort(np.asarray(samples, dtype=float))
        self.size = self.x.shape[0]
        if self.size == 0:
            raise ValueError("empty sample")

    def __call__(self, t):
        return np.searchsorted(self.x, t, side="right") / self.size


def ks_statistic(samples, cdf: Callable) -> float:
    """``sup |F_m - F|`` via ``max(i/m - F(x_(i)), F(x_(i)) - (i-1)/m)``."""
    x = np.sort(np.asarray(samples, dtype=float))
    m = x.shape[0]
    if m < 2:
        raise ValueError("need at least 2 samples")
    f = np.asarray(cdf(x), dtype=float)
    i = np.arange(1, m + 1)
    return float(max(np.max(i / m - f), np.max(f - (i - 1) / m)))


def ks_two_sample(a, b) -> float:
    """``sup |F_a - F_b|`` over the pooled sample."""
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    pooled = np.concatenate([a, b])
    fa = np.searchsorted(a, pooled, side="right") / a.shape[0]
    fb = np.searchsorted(b, pooled, side="right") / b.shape[0]
    return float(np.max(np.abs(fa - fb)))


def empirical_pmf(samples, support_max: int | None = None) -> np.ndarray:
    """PMF on ``0..K`` of non-negative integer samples."""
    s = np.asarray(samples, dtype=np.int64)
    if s.size and s.min() < 0:
        raise ValueError("samples must be non-negative integers")
    counts = np.bincount(s, minlength=(support_max or 0) + 1)
    return counts / s.shape[0]


def tv_distance(pmf_a, pmf_b, offset_a: int = 0, offset_b: int = 0) -> float:
    """Half the L1 distance between PMFs given as arrays with support offsets."""
    a = np.asarray(pmf_a, dtype=float)
    b = np.asarray(pmf_b, dtype=float)
    lo = min(offset_a, offset_b)
    hi = max(offset_a + a.shape[0], offset_b + b.shape[0])
    pa = np.zeros(hi - lo)
    pb = np.zeros(hi - lo)
    pa[offset_a - lo: offset_a - lo + a.shape[0]] = a
    pb[offset_b - lo: offset_b - lo + b.shape[0]] = b
    return 0.5 * float(np.abs(pa - pb).sum())


def tv_to_law(samples, pmf: Callable) -> float:
    """TV between the empirical PMF of integer samples and a law on ``0, 1, ...``.

    The law's mass beyond the largest observed value is counted in full.
    """
    emp = empirical_pmf(samples)
    k = np.arange(emp.shape[0])
    theo = np.asarray(pmf(k), dtype=float)
    tail = max(0.0, 1.0 - theo.sum())
    return 0.5 * float(np.abs(emp - theo).sum() + tail)


def tv_noise(pmf_values, m: int) -> float:
    """Rough scale of the sampling fluctuation of an empirical TV."""
    p = np.asarray(pmf_values, dtype=float)
    return 0.5 * float(np.sqrt(p * (1 - p) / m).sum())


def _pool_bins(expected: np.ndarray):
    """Group consecutive cells so that every group has expected count >= 5.

    Returns an index array mapping cell -> group.
    """
    groups = np.empty(expected.shape[0], dtype=np.int64)
    g, acc = 0, 0.0
    for i, e in enumerate(expected):
        groups[i] = g
        acc += e
        if acc >= MIN_EXPECTED:
            g += 1
            acc = 0.0
    if acc < MIN_EXPECTED and g > 0:
        groups[groups == g] = g - 1
    return groups


def chi_square(observed, expected_probs):
    """Pearson goodness of fit with tail pooling; returns ``(stat, dof, p)``.

    ``expected_probs`` may sum to less than 1; the remainder becomes an extra
    tail cell with zero observations.
    """
    obs = np.asarray(observed, dtype=float)
    probs = np.asarray(expected_probs, dtype=float)
    if obs.shape != probs.shape:
        raise ValueError("observed and expected must be aligned")
    m = obs.sum()
    rest = 1.0 - probs.sum()
    if rest > 1e-12:
        obs = np.append(obs, 0.0)
        probs = np.append(probs, rest)
    exp = probs * m
    groups = _pool_bins(exp)
    o = np.bincount(groups, weights=obs)
    e = np.bincount(groups, weights=exp)
    if np.any(e <= 0):
        raise ValueError("expected probabilities must be positive on pooled bins")
    stat = float(((o - e) ** 2 / e).sum())
    dof = max(o.shape[0] - 1, 1)
    return stat, dof, float(_sps.chi2.sf(stat, dof))


def chi_square_two_sample(counts_a, counts_b):
    """Homogeneity test of two count vectors on a common support.

    Cells are pooled (in order) until the pooled-sample expected count in each
    group reaches 5 for both samples. Returns ``(stat, dof, p)``.
    """
    a = np.asarray(counts_a, dtype=float)
    b = np.asarray(counts_b, dtype=float)
    size = max(a.shape[0], b.shape[0])
    a = np.pad(a, (0, size - a.shape[0]))
    b = np.pad(b, (0, size - b.shape[0]))
    na, nb = a.sum(), b.sum()
    pooled = (a + b) / (na + nb)
    groups = _pool_bins(pooled * min(na, nb))
    ga = np.bincount(groups, weights=a)
    gb = np.bincount(groups, weights=b)
    tot = ga + gb
    ea = tot * na / (na + nb)
    eb = tot * nb / (na + nb)
    stat = float(((ga - ea) ** 2 / ea).sum() + ((gb - eb) ** 2 / eb).sum())
    dof = max(ga.shape[0] - 1, 1)
    return stat, dof, float(_sps.chi2.sf(stat, dof))


def wasserstein1(samples, other) -> float:
    """W1 of a sample against a quantile function or an equal-size second sample.

    One-sample form: ``mean |x_(i) - q((i - 1/2)/m)|``.
    """
    x = np.sort(np.asarray(samples, dtype=float))
    m = x.shape[0]
    if callable(other):
        q = np.asarray(other((np.arange(1, m + 1) - 0.5) / m), dtype=float)
    else:
        q = np.sort(np.asarray(other, dtype=float))
        if q.shape[0] != m:
            raise ValueError("two-sample W1 needs equal sizes")
    return float(np.mean(np.abs(x - q)))


def wasserstein1_noise(samples, quantile: Callable) -> float:
    x = np.sort(np.asarray(samples, dtype=float))
    m = x.shape[0]
    d = np.abs(x - quantile((np.arange(1, m + 1) - 0.5) / m))
    return float(d.std(ddof=1) / math.sqrt(m))


def mean_ci(samples, k_sigma: float = 4.0):
    """``(mean, k * s / sqrt(m))``."""
    x = np.asarray(samples, dtype=float)
    m = x.shape[0]
    if m < 2:
        raise ValueError("need at least 2 samples")
    return float(x.mean()), float(k_sigma * x.std(ddof=1) / math.sqrt(m))


def trend_check(values, noise=None) -> bool:
    """Non-increasing, allowing one upward step no larger than the noise scale.

    ``noise`` gives a per-value standard error; the step between ``i`` and
    ``i+1`` is compared with ``sqrt(se_i^2 + se_{i+1}^2)``. Without noise no
    upward step is tolerated.
    """
    v = np.asarray(values, dtype=float)
    if v.shape[0] < 2:
        raise ValueError("need at least 2 values")
    se = np.zeros_like(v) if noise is None else np.asarray(noise, dtype=float)
    ups = np.flatnonzero(np.diff(v) > 0)
    if ups.size == 0:
        return True
    if ups.size > 1:
        return False
    i = ups[0]
    return bool(v[i + 1] - v[i] <= math.hypot(se[i], se[i + 1]))


def ks_noise(m: int) -> float:
    """Scale of KS fluctuations for ``m`` samples under the null."""
    return 1.0 / math.sqrt(m)
