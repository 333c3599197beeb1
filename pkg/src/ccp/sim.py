"""Monte Carlo for the extended coupon collector.

Two schemes are simulated:

* ``discrete``: coupons arrive one per unit time with i.i.d. uniform types.
  A single pass over the draw stream with capped per-type counters yields the
  completion times ``T_r``, the empty-spot counts ``U_r`` at ``T_0`` and the
  delayed counts ``U_hat_r`` at ``T_0 + d_r``. The inner loop is the compiled
  kernel from :mod:`ccp.kernels`.
* ``poissonized``: each type gets an independent ladder of exponential
  inter-arrival times with mean ``n``. The law of ``(U_1, ..., U_r)`` is
  identical to the discrete scheme; completion times are on the continuous
  clock.

``sample_u_conditional`` is a third, much cheaper exact sampler of the
``U`` vector (see its docstring), used for large-``n`` sweeps.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, asdict

import numpy as np

from ccp import kernels
from ccp.streams import exponential, open_uniform, run_rng

BACKENDS = ("discrete", "poissonized", "conditional")
_MAX_N = 2 ** 31 - 1


@dataclass(frozen=True)
class SimConfig:
    n: int
    r_max: int = 1
    delays: tuple | None = None
    backend: str = "poissonized"
    seed: int = 0
    stream_id: int = 0
    keep_arrivals: bool = False
    track_w0: bool = False

    def __post_init__(self):
        if int(self.n) < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if self.n > _MAX_N:
            raise OverflowError(f"n={self.n} exceeds the 32-bit type index range")
        if int(self.r_max) < 0:
            raise ValueError(f"r_max must be >= 0, got {self.r_max}")
        if self.backend not in BACKENDS:
            raise ValueError(f"unknown backend {self.backend!r}; expected one of {BACKENDS}")
        if self.delays is not None:
            object.__setattr__(self, "delays", tuple(int(d) for d in self.delays))
            if len(self.delays) != self.r_max:
                raise ValueError(f"delays must have length r_max={self.r_max}, got {len(self.delays)}")
            if any(d < 0 for d in self.delays):
                raise ValueError("delays must be non-negative")
            if self.backend != "discrete":
                raise ValueError("delayed counts are defined for the discrete backend only")


@dataclass
class RunRecord:
    """Observables of one realization.

    ``t`` holds ``T_0..T_rmax`` (integers for the discrete backend, reals for
    the poissonized one; only ``T_0`` for the conditional sampler). ``u`` holds
    ``U_1..U_rmax``; ``u_hat`` is present iff delays were configured; ``w0`` is
    filled by the poissonized backend when ``track_w0`` is set.
    """

    t: np.ndarray
    u: np.ndarray
    u_hat: np.ndarray | None = None
    w0: int | None = None
    arrivals: np.ndarray | None = field(default=None, repr=False)


@dataclass
class CountState:
    """One-pass state of the discrete scheme: capped counters per type."""

    counts: np.ndarray
    level_deficits: np.ndarray
    clock: int = 0

    @classmethod
    def fresh(cls, n: int, r_max: int) -> "CountState":
        deficits = np.full(r_max + 1, n, dtype=np.int64)
        return cls(np.zeros(n, dtype=np.int32), deficits, 0)


def default_delays(n: int, r_max: int) -> tuple:
    """``d_r = round(r n ln ln n)`` for ``r = 1..r_max``; needs ``n >= 3``."""
    if n < 3:
        raise ValueError("automatic delays need n >= 3 (ln ln n must be positive)")
    lln = math.log(math.log(n))
    return tuple(int(round(r * n * lln)) for r in range(1, r_max + 1))


def chunk_size(n: int) -> int:
    return int(min(1 << 16, max(64, 2 * n)))


def run_discrete(cfg: SimConfig, rng: np.random.Generator | None = None) -> RunRecord:
    if cfg.backend != "discrete":
        raise ValueError("run_discrete needs backend='discrete'")
    if rng is None:
        rng = run_rng(cfg.seed, cfg.stream_id, 0)
    n, R = cfg.n, cfg.r_max
    state = CountState.fresh(n, R)
    t_found = np.zeros(R + 1, dtype=np.int64)
    u = np.zeros(R, dtype=np.int64)
    delays = np.asarray(cfg.delays or (), dtype=np.int64)
    u_hat = np.full(delays.shape[0], -1, dtype=np.int64)
    if cfg.keep_arrivals:
        arrivals = np.zeros((n, R + 1), dtype=np.int64)
    else:
        arrivals = np.zeros((1, 1), dtype=np.int64)
    size = chunk_size(n)
    done = False
    while not done:
        draws = rng.integers(0, n, size=size, dtype=np.uint32)
        state.clock, done = kernels.advance(
            draws, state.counts, state.level_deficits, t_found, u, delays,
            u_hat, arrivals, state.clock, cfg.keep_arrivals,
        )
    return RunRecord(
        t=t_found,
        u=u,
        u_hat=u_hat if cfg.delays is not None else None,
        arrivals=arrivals if cfg.keep_arrivals else None,
    )


def poissonized_arrivals(n: int, r_max: int, rng: np.random.Generator) -> np.ndarray:
    """``Z[i, r]``: arrival time of the (r+1)-th coupon of type i, shape (n, r_max+1)."""
    return np.cumsum(exponential(rng, (n, r_max + 1), scale=float(n)), axis=1)


def run_poissonized(cfg: SimConfig, rng: np.random.Generator | None = None) -> RunRecord:
    if cfg.backend != "poissonized":
        raise ValueError("run_poissonized needs backend='poissonized'")
    if rng is None:
        rng = run_rng(cfg.seed, cfg.stream_id, 0)
    z = poissonized_arrivals(cfg.n, cfg.r_max, rng)
    m0 = z[:, 0].max()
    u = (z[:, 1:] > m0).sum(axis=0).astype(np.int64)
    w0 = _w0_from_ladder(z, cfg.n, rng) if cfg.track_w0 else None
    return RunRecord(
        t=z.max(axis=0),
        u=u,
        w0=w0,
        arrivals=z if cfg.keep_arrivals else None,
    )


def _w0_from_ladder(z: np.ndarray, n: int, rng: np.random.Generator) -> int:
    m0 = z[:, 0].max()
    w0 = 0
    r = 0
    active = z[:, 0][z[:, 0] < m0]
    while active.size:
        w0 = r
        r += 1
        if r < z.shape[1]:
            active = z[:, r][z[:, r] < m0]
        else:
            active = active + exponential(rng, active.shape[0], scale=float(n))
            active = active[active < m0]
    return w0


def sample_w0(n: int, rng: np.random.Generator) -> int:
    """Index of the youngest collector who started before the main album closed.

    The ladder of each type is extended lazily; only types still below the
    level-0 maximum are carried forward. ``n == 1`` returns 0 by convention
    (the defining set is empty under the strict inequality).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    z0 = exponential(rng, n, scale=float(n))
    return _w0_from_ladder(z0[:, None], n, rng)


def sample_u_conditional(n: int, r_max: int, rng: np.random.Generator):
    """Exact draw of ``(T~_0, U_1..U_rmax)`` in O(r_max) time.

    Given the level-0 maximum ``M = n x`` of the poissonized ladders, the
    type attaining it counts as empty for every ``r >= 1``; each of the other
    ``n - 1`` types has ``K ~ Poisson(x)`` conditioned on ``K >= 1`` arrivals
    in ``[0, M]`` independently, and misses level ``r`` iff ``K <= r``. The
    counts of types with ``K = 1, ..., r_max`` are therefore one multinomial
    draw.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    v = open_uniform(rng)
    # M / n is the maximum of n unit exponentials: F(x) = (1 - e^-x)^n
    x = -math.log(-math.expm1(math.log(v) / n))
    u = np.ones(r_max, dtype=np.int64)
    if n > 1 and r_max > 0:
        k = np.arange(1, r_max + 1)
        log_pois = -x + k * math.log(x) - np.array([math.lgamma(j + 1.0) for j in k])
        probs = np.exp(log_pois) / -math.expm1(-x)
        probs = np.append(probs, max(0.0, 1.0 - probs.sum()))
        probs /= probs.sum()
        cells = rng.multinomial(n - 1, probs)
        u += np.cumsum(cells[:-1])
    return n * x, u


def coupled_arrivals(n: int, r_max: int, rng: np.random.Generator):
    """Poissonized ladders ``Z`` and the discrete arrival times ``Y`` embedded in them.

    Ordering all arrivals of all types on the continuous clock gives a
    sequence of i.i.d. uniform types; ``Y[i, r]`` is the rank of ``Z[i, r]``
    in that sequence. Ladders are extended until every type passes
    ``max_i Z[i, r_max]`` so that no earlier arrival is missed.
    """
    z = poissonized_arrivals(n, r_max, rng)
    horizon = z[:, r_max].max()
    cols = [z]
    last = z[:, -1]
    while np.any(last < horizon):
        last = last + exponential(rng, n, scale=float(n))
        cols.append(last[:, None])
    full = np.concatenate(cols, axis=1)
    flat = full.ravel()
    keep = flat <= horizon
    order = np.argsort(flat[keep], kind="stable")
    rank = np.empty(order.shape[0], dtype=np.int64)
    rank[order] = np.arange(1, order.shape[0] + 1)
    ranks = np.zeros(flat.shape[0], dtype=np.int64)
    ranks[keep] = rank
    y = ranks.reshape(full.shape)[:, : r_max + 1]
    return z, y


def run(cfg: SimConfig, rng: np.random.Generator | None = None) -> RunRecord:
    if cfg.backend == "discrete":
        return run_discrete(cfg, rng)
    if cfg.backend == "poissonized":
        return run_poissonized(cfg, rng)
    if rng is None:
        rng = run_rng(cfg.seed, cfg.stream_id, 0)
    t0, u = sample_u_conditional(cfg.n, cfg.r_max, rng)
    return RunRecord(t=np.array([t0]), u=u)


@dataclass
class Moments:
    """Count/mean/M2 accumulator with an associative merge."""

    count: int = 0
    mean: np.ndarray | float = 0.0
    m2: np.ndarray | float = 0.0

    @classmethod
    def of(cls, x: np.ndarray) -> "Moments":
        x = np.asarray(x, dtype=float)
        if x.shape[0] == 0:
            return cls()
        mean = x.mean(axis=0)
        return cls(x.shape[0], mean, ((x - mean) ** 2).sum(axis=0))

    def merge(self, other: "Moments") -> "Moments":
        if self.count == 0:
            return other
        if other.count == 0:
            return self
        total = self.count + other.count
        delta = other.mean - self.mean
        mean = self.mean + delta * (other.count / total)
        m2 = self.m2 + other.m2 + delta ** 2 * (self.count * other.count / total)
        return Moments(total, mean, m2)

    @property
    def var(self):
        if self.count < 2:
            return np.zeros_like(np.asarray(self.mean, dtype=float))
        return self.m2 / (self.count - 1)


@dataclass
class RunEnsemble:
    """Per-run observables for ``m_runs`` runs, stacked row-wise."""

    cfg: SimConfig
    t: np.ndarray
    u: np.ndarray
    u_hat: np.ndarray | None = None
    w0: np.ndarray | None = None

    @property
    def m_runs(self) -> int:
        return self.t.shape[0]

    def moments(self, what: str = "u") -> Moments:
        return Moments.of(getattr(self, what))

    def summary(self) -> dict:
        out = {"m_runs": self.m_runs}
        for name in ("t", "u", "u_hat", "w0"):
            arr = getattr(self, name)
            if arr is None or (arr.ndim > 1 and arr.shape[1] == 0):
                continue
            mom = Moments.of(arr)
            out[f"{name}_mean"] = np.atleast_1d(mom.mean).tolist()
            out[f"{name}_var"] = np.atleast_1d(mom.var).tolist()
        return out

    def to_json_dict(self, include_runs: bool = False) -> dict:
        cfg = asdict(self.cfg)
        cfg["delays"] = list(self.cfg.delays) if self.cfg.delays is not None else None
        out = {"config": cfg, "summary": self.summary()}
        if include_runs:
            out["runs"] = {
                name: getattr(self, name).tolist()
                for name in ("t", "u", "u_hat", "w0")
                if getattr(self, name) is not None
            }
        return out

    @staticmethod
    def concat(parts: list["RunEnsemble"]) -> "RunEnsemble":
        first = parts[0]

        def stack(name):
            arrs = [getattr(p, name) for p in parts]
            return None if arrs[0] is None else np.concatenate(arrs)

        return RunEnsemble(first.cfg, stack("t"), stack("u"), stack("u_hat"), stack("w0"))


BLOCK_RUNS = 256


def _run_block(cfg: SimConfig, start: int, stop: int) -> RunEnsemble:
    recs = [run(cfg, run_rng(cfg.seed, cfg.stream_id, i)) for i in range(start, stop)]
    t = np.stack([r.t for r in recs])
    u = np.stack([r.u for r in recs])
    u_hat = np.stack([r.u_hat for r in recs]) if cfg.delays is not None else None
    w0 = np.array([r.w0 for r in recs], dtype=np.int64) if cfg.track_w0 else None
    return RunEnsemble(cfg, t, u, u_hat, w0)


def batch(cfg: SimConfig, m_runs: int, threads: int | None = 1) -> RunEnsemble:
    """Run ``m_runs`` independent realizations.

    Run ``i`` uses the stream ``(cfg.seed, cfg.stream_id, i)``; blocks of runs
    are merged in index order, so the result is bit-identical for any
    ``threads`` value.
    """
    if m_runs < 1:
        raise ValueError("m_runs must be >= 1")
    bounds = [(s, min(s + BLOCK_RUNS, m_runs)) for s in range(0, m_runs, BLOCK_RUNS)]
    threads = resolve_threads(threads)
    if threads == 1 or len(bounds) == 1:
        parts = [_run_block(cfg, a, b) for a, b in bounds]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda ab: _run_block(cfg, *ab), bounds))
    return RunEnsemble.concat(parts)


def resolve_threads(threads: int | None) -> int:
    if threads is None or threads <= 0:
        env = os.environ.get("CCP_THREADS")
        if env:
            return max(1, int(env))
        return os.cpu_count() or 1
    return int(threads)
