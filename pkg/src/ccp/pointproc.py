"""Multilevel point patterns on ``N_0 x (R ∪ {+inf})``.

Level ``r`` of a pattern built from one run holds the centered arrival times
of the ``(r+1)``-th coupon of every type. Three constructions are provided:

* ``build_H_n``: common centering ``x/n - ln n`` and level-``r`` thinning with
  probability ``ln^{-r} n`` (poissonized arrivals);
* ``build_Hhat_n`` / ``build_Xihat_n``: level-dependent centering
  ``x/n - ln n - r ln ln n - delta_r`` on poissonized / discrete arrivals;
* ``sample_limit_H``: the Poisson limit with intensity ``e^{-x} dx / r!`` on
  level ``r``.

Positions below ``a_min`` (default -20) are dropped at construction; they
carry no information for rightmost points or counts over windows bounded
below by more than ``a_min``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from ccp import laws
from ccp.streams import exponential

A_MIN = -20.0
INF = math.inf


@dataclass(frozen=True)
class Window:
    level: int
    a: float
    b: float = INF

    def __post_init__(self):
        if not math.isfinite(self.a):
            raise ValueError("windows must be bounded from below (finite a)")
        if self.b < self.a:
            raise ValueError(f"empty orientation: a={self.a} > b={self.b}")
        if self.level < 0:
            raise ValueError("level must be >= 0")

    def label(self) -> str:
        b = "inf" if self.b == INF else f"{self.b:g}"
        return f"{self.level}:[{self.a:g},{b}]"


@dataclass(frozen=True)
class IntensitySpec:
    """Level weight ``1/r!`` times density ``e^{-x}``."""

    def level_mass(self, r: int, a: float, b: float = INF) -> float:
        upper = 0.0 if b == INF else math.exp(-b)
        return (math.exp(-a) - upper) / laws.factorial(r)


def intensity(windows) -> float:
    """``lambda(U)`` for a window or a union of disjoint windows."""
    if isinstance(windows, Window):
        windows = [windows]
    spec = IntensitySpec()
    return math.fsum(spec.level_mass(w.level, w.a, w.b) for w in windows)


class PointPattern:
    """Immutable map ``level -> sorted positions``."""

    __slots__ = ("_levels",)

    def __init__(self, levels: Mapping[int, Iterable[float]]):
        frozen = {}
        for r, pos in levels.items():
            arr = np.sort(np.asarray(pos, dtype=float))
            if arr.size and np.isnan(arr).any():
                raise ValueError("positions must not be NaN")
            arr.setflags(write=False)
            frozen[int(r)] = arr
        self._levels = frozen

    @property
    def levels(self) -> dict:
        return dict(self._levels)

    def level(self, r: int) -> np.ndarray:
        return self._levels.get(r, np.empty(0))

    def count(self, window: Window) -> int:
        pos = self.level(window.level)
        lo = np.searchsorted(pos, window.a, side="left")
        hi = np.searchsorted(pos, window.b, side="right")
        return int(hi - lo)

    def count_union(self, windows: Sequence[Window]) -> int:
        return sum(self.count(w) for w in windows)

    def __len__(self):
        return sum(v.size for v in self._levels.values())

    def __eq__(self, other):
        if not isinstance(other, PointPattern):
            return NotImplemented
        if set(self._levels) != set(other._levels):
            return False
        return all(np.array_equal(self._levels[r], other._levels[r]) for r in self._levels)

    def to_json_dict(self) -> dict:
        return {"levels": {str(r): [_num(x) for x in v] for r, v in sorted(self._levels.items())}}

    @classmethod
    def from_json_dict(cls, d: dict) -> "PointPattern":
        return cls({int(r): [float(x) for x in v] for r, v in d["levels"].items()})


def _num(x: float):
    return "inf" if x == INF else float(x)


def dumps_patterns(patterns: Iterable[PointPattern]) -> str:
    return json.dumps([p.to_json_dict() for p in patterns])


def loads_patterns(text: str) -> list:
    return [PointPattern.from_json_dict(d) for d in json.loads(text)]


# -- centering maps ------------------------------------------------------------

def psi_map(n: int, x):
    if n < 1:
        raise ValueError("n must be >= 1")
    return np.asarray(x, dtype=float) / n - math.log(n)


def psi_hat_map(n: int, r: int, delta: float, x):
    if n < 3:
        raise ValueError("psi_hat needs n >= 3 so that ln ln n > 0")
    return np.asarray(x, dtype=float) / n - math.log(n) - r * math.log(math.log(n)) - delta


def canonical_deltas(n: int, delays: Sequence[int]) -> list:
    """``delta_0 = 0`` and ``delta_r = d_r/n - r ln ln n``.

    With these, the count of level-``r`` points right of the level-0
    rightmost equals the delayed count ``#{i : Y_{i,r} > T_0 + d_r}``.
    """
    lln = math.log(math.log(n))
    return [0.0] + [d / n - r * lln for r, d in enumerate(delays, start=1)]


# -- builders ------------------------------------------------------------------

def build_eta(z_level, n: int, a_min: float = A_MIN) -> PointPattern:
    pos = psi_map(n, z_level)
    return PointPattern({0: pos[pos >= a_min]})


def thin_pattern(pattern: PointPattern, p, rng) -> PointPattern:
    """Keep every point independently; ``p`` is a number or a per-level mapping."""
    out = {}
    for r, pos in sorted(pattern.levels.items()):
        pr = p[r] if isinstance(p, Mapping) else p
        if not 0.0 <= pr <= 1.0:
            raise ValueError("thinning probability must lie in [0, 1]")
        if pr == 1.0:
            out[r] = pos
        else:
            out[r] = pos[rng.random(pos.shape[0]) < pr]
    return PointPattern(out)


def _check_arrivals(z, n):
    z = np.asarray(z)
    if z.ndim != 2 or z.shape[0] != n:
        raise ValueError("arrival array must have shape (n, levels)")
    if n < 3:
        raise ValueError("pattern builders need n >= 3")
    return z


def build_H_n(z, n: int, rng, a_min: float = A_MIN) -> PointPattern:
    """Level ``r`` is ``psi(Z_{.,r})`` thinned with probability ``ln^{-r} n``."""
    z = _check_arrivals(z, n)
    ln = math.log(n)
    levels = {}
    for r in range(z.shape[1]):
        pos = psi_map(n, z[:, r])
        pos = pos[pos >= a_min]
        if r:
            pos = pos[rng.random(pos.shape[0]) < ln ** (-r)]
        levels[r] = pos
    return PointPattern(levels)


def build_Hhat_n(z, n: int, deltas: Sequence[float], a_min: float = A_MIN) -> PointPattern:
    z = _check_arrivals(z, n)
    levels = {}
    for r in range(z.shape[1]):
        pos = psi_hat_map(n, r, deltas[r], z[:, r])
        levels[r] = pos[pos >= a_min]
    return PointPattern(levels)


def build_Xihat_n(y, n: int, deltas: Sequence[float] | None = None,
                  delays: Sequence[int] | None = None, a_min: float = A_MIN) -> PointPattern:
    """Discrete-scheme counterpart of ``build_Hhat_n``.

    Passing integer ``delays`` instead of ``deltas`` selects the canonical
    deltas and shifts by the integer ``d_r`` before dividing by ``n``, so a
    tie ``Y_{i,r} = T_0 + d_r`` maps to exactly the level-0 rightmost value
    and is excluded by the strict count.
    """
    y = _check_arrivals(y, n)
    levels = {}
    if delays is not None:
        shifts = [0] + [int(d) for d in delays]
        if len(shifts) < y.shape[1]:
            raise ValueError("need one delay per level r >= 1")
        ln = math.log(n)
        for r in range(y.shape[1]):
            pos = (y[:, r] - shifts[r]).astype(float) / n - ln
            levels[r] = pos[pos >= a_min]
    else:
        if deltas is None or len(deltas) < y.shape[1]:
            raise ValueError("need one delta per level")
        for r in range(y.shape[1]):
            pos = psi_hat_map(n, r, deltas[r], y[:, r])
            levels[r] = pos[pos >= a_min]
    return PointPattern(levels)


def sample_limit_H(levels: Sequence[int], a: float, rng, method: str = "direct") -> PointPattern:
    """Poisson process with intensity ``e^{-x}/r!`` on ``{r} x [a, inf)``.

    ``direct``: Poisson count of mean ``e^{-a}/r!``, positions ``a + Exp(1)``.
    ``arrivals``: image of unit-rate arrivals on ``(0, e^{-a}/r!]`` under
    ``h(x) = -ln r! - ln x``.
    """
    if not math.isfinite(a):
        raise ValueError("a must be finite")
    out = {}
    for r in levels:
        mass = math.exp(-a) / laws.factorial(r)
        if method == "direct":
            k = int(rng.poisson(mass))
            out[r] = a + exponential(rng, k)
        elif method == "arrivals":
            pts = []
            t = 0.0
            while True:
                t += float(exponential(rng))
                if t > mass:
                    break
                pts.append(t)
            out[r] = -laws.log_factorial(r) - np.log(np.asarray(pts, dtype=float))
        else:
            raise ValueError(f"unknown method {method!r}")
    return PointPattern(out)


@dataclass
class PatternBatch:
    """Many single-window-bounded patterns stored level-wise in CSR form."""

    positions: dict
    offsets: dict
    size: int

    def level_counts(self, r: int) -> np.ndarray:
        return np.diff(self.offsets[r])

    def rightmost(self, r: int) -> np.ndarray:
        counts = self.level_counts(r)
        if np.any(counts == 0):
            raise ValueError(f"some patterns have an empty level {r}")
        return np.maximum.reduceat(self.positions[r], self.offsets[r][:-1])

    def count(self, window: Window) -> np.ndarray:
        pos = self.positions[window.level]
        inside = ((pos >= window.a) & (pos <= window.b)).astype(np.int64)
        csum = np.concatenate([[0], np.cumsum(inside)])
        off = self.offsets[window.level]
        return csum[off[1:]] - csum[off[:-1]]

    def pattern(self, i: int) -> PointPattern:
        return PointPattern({
            r: self.positions[r][self.offsets[r][i]: self.offsets[r][i + 1]]
            for r in self.positions
        })

    def __iter__(self):
        return (self.pattern(i) for i in range(self.size))


def sample_limit_H_batch(levels: Sequence[int], a: float, size: int, rng) -> PatternBatch:
    """``size`` independent draws of the limit process (direct construction)."""
    positions, offsets = {}, {}
    for r in levels:
        mass = math.exp(-a) / laws.factorial(r)
        counts = rng.poisson(mass, size)
        offsets[r] = np.concatenate([[0], np.cumsum(counts)])
        positions[r] = a + exponential(rng, int(counts.sum()))
    return PatternBatch(positions, offsets, size)


# -- observables ------------------------------------------------------------------

def rightmost(pattern: PointPattern, level: int) -> float:
    pos = pattern.level(level)
    if pos.size == 0:
        raise ValueError(f"level {level} is empty")
    return float(pos[-1])


def count_right_of(pattern: PointPattern, level: int, threshold: float) -> int:
    """Number of level points strictly greater than ``threshold``."""
    pos = pattern.level(level)
    return int(pos.shape[0] - np.searchsorted(pos, threshold, side="right"))


def window_stats(patterns, unions: Mapping[str, Sequence[Window]] | Sequence[Sequence[Window]]):
    """Void probability and mean count per window union, with standard errors.

    ``patterns`` may be any iterable of :class:`PointPattern` (consumed once)
    or a :class:`PatternBatch`. Returns a list of dict rows with the limit
    companions ``exp(-lambda(U))`` and ``lambda(U)``.
    """
    if not isinstance(unions, Mapping):
        unions = {"|".join(w.label() for w in u): list(u) for u in unions}
    names = list(unions)
    if isinstance(patterns, PatternBatch):
        counts = {k: sum(patterns.count(w) for w in unions[k]) for k in names}
        m = patterns.size
    else:
        acc = {k: [] for k in names}
        for pat in patterns:
            for k in names:
                acc[k].append(pat.count_union(unions[k]))
        counts = {k: np.asarray(v) for k, v in acc.items()}
        m = len(next(iter(counts.values()))) if names else 0
    if m < 2:
        raise ValueError("need at least 2 patterns")
    rows = []
    for k in names:
        c = np.asarray(counts[k], dtype=float)
        lam = intensity(unions[k])
        void = float(np.mean(c == 0))
        rows.append({
            "window": k,
            "void_hat": void,
            "void_limit": math.exp(-lam),
            "void_se": math.sqrt(max(void * (1 - void), 1e-300) / m),
            "mean_hat": float(c.mean()),
            "mean_limit": lam,
            "se": float(c.std(ddof=1) / math.sqrt(m)),
            "m": m,
        })
    return rows


WINDOW_STATS_HEADER = "window,void_hat,void_limit,mean_hat,mean_limit,se"


def window_stats_csv(rows) -> str:
    lines = [WINDOW_STATS_HEADER]
    for row in rows:
        lines.append(",".join([
            row["window"],
            f"{row['void_hat']:.6g}", f"{row['void_limit']:.6g}",
            f"{row['mean_hat']:.6g}", f"{row['mean_limit']:.6g}", f"{row['se']:.6g}",
        ]))
    return "\n".join(lines) + "\n"


# -- closed-form densities ---------------------------------------------------------

def theoretical_density(n: int, r1: int, x):
    """Density of ``psi(Z_{i,r1})``: ``(x + ln n)^{r1} e^{-x} / (n r1!)`` on ``x >= -ln n``."""
    if n < 2:
        raise ValueError("n must be >= 2")
    x = np.asarray(x, dtype=float)
    ln = math.log(n)
    s = np.maximum(x + ln, 0.0)
    val = s ** r1 * np.exp(-x) / (n * laws.factorial(r1))
    return np.where(x >= -ln, val, 0.0)


def theoretical_density_pair(n: int, r1: int, r2: int, x, y):
    """Joint density of ``(psi(Z_{i,r1}), psi(Z_{i,r2}))``, ``r2 > r1``."""
    if n < 2:
        raise ValueError("n must be >= 2")
    if not 0 <= r1 < r2:
        raise ValueError("need 0 <= r1 < r2")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    ln = math.log(n)
    gap = r2 - r1 - 1
    s = np.maximum(x + ln, 0.0)
    d = np.maximum(y - x, 0.0)
    val = s ** r1 * d ** gap * np.exp(-y) / (n * laws.factorial(r1) * laws.factorial(gap))
    return np.where((x >= -ln) & (x <= y), val, 0.0)


def theoretical_cdf(n: int, r: int, x):
    """CDF of ``psi(Z_{i,r})``: regularized lower gamma ``P(r+1, x + ln n)``."""
    from scipy.special import gammainc

    x = np.asarray(x, dtype=float)
    return gammainc(r + 1, np.maximum(x + math.log(n), 0.0))
