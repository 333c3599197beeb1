"""Verification suites for the limit theorems.

Each suite takes an ``n`` grid, a run count (an int or a per-``n`` mapping),
a seed and a thread count, and returns a list of :class:`ResultRow`. Rows
whose threshold is ``inf`` are informational; the gate thresholds apply at
the largest ``n`` of the grid, and ``*_trend`` rows apply the one-inversion
trend rule across the grid.

Random streams are keyed by the seed and a stream id derived from a label,
so results do not depend on the thread count. The discrete-scheme suites
(``t2``, ``t3``, ``cor``) share one ensemble per ``(n, runs, seed)``.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, asdict
from typing import Mapping, Sequence

import numpy as np

from ccp import constants as C
from ccp import laws, pointproc, sim, stats, thinning
from ccp.streams import run_rng

THEOREMS = ("t1", "t2", "t3", "cor", "conv", "trick")
CSV_FIELDS = ("theorem", "n", "r", "statistic", "value", "threshold", "se", "pass", "seed", "ms")
INF = math.inf


@dataclass
class ResultRow:
    theorem: str
    n: int
    r: str
    statistic: str
    value: float
    threshold: float
    se: float
    passed: bool
    seed: int
    ms: float = 0.0

    def as_record(self, timing: bool = True) -> dict:
        d = asdict(self)
        d["pass"] = d.pop("passed")
        if not timing:
            d["ms"] = 0
        return {k: d[k] for k in CSV_FIELDS}


def stream_id(label: str) -> int:
    return zlib.crc32(label.encode()) & 0x7FFFFFFF


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.10g}"


def rows_to_csv(rows: Sequence[ResultRow], timing: bool = False) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for row in rows:
        rec = row.as_record(timing)
        w.writerow([rec[k] if isinstance(rec[k], str) else _fmt(rec[k]) for k in CSV_FIELDS])
    return buf.getvalue()


def rows_to_json(rows: Sequence[ResultRow], timing: bool = False) -> str:
    def clean(v):
        if isinstance(v, float) and not math.isfinite(v):
            return _fmt(v)
        return v

    recs = [{k: clean(v) for k, v in r.as_record(timing).items()} for r in rows]
    return json.dumps(recs, indent=1, default=lambda o: o.item()) + "\n"


def _runs_for(runs, n: int) -> int:
    if isinstance(runs, Mapping):
        return int(runs[n])
    return int(runs)


def _trend_row(theorem, n_last, r, statistic, values, noise, seed) -> ResultRow:
    v = np.asarray(values, dtype=float)
    se = np.asarray(noise, dtype=float)
    steps = np.diff(v)
    worst = int(np.argmax(steps)) if steps.size else 0
    up = float(max(steps.max(), 0.0)) if steps.size else 0.0
    allowed = float(math.hypot(se[worst], se[worst + 1])) if steps.size else 0.0
    ok = stats.trend_check(v, se)
    return ResultRow(theorem, n_last, str(r), f"{statistic}_trend", up, allowed, float("nan"), ok, seed)


class _Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.ms = 1e3 * (time.perf_counter() - self.t0)


# -- shared samples --------------------------------------------------------------

_DISCRETE_CACHE: dict = {}


def discrete_ensemble(n: int, runs: int, seed: int, threads=None, r_max: int = 2) -> sim.RunEnsemble:
    """Discrete-scheme runs with ``d_r = round(r n ln ln n)``, cached per process."""
    key = (n, runs, seed, r_max)
    if key not in _DISCRETE_CACHE:
        cfg = sim.SimConfig(n, r_max, delays=sim.default_delays(n, r_max), backend="discrete",
                            seed=seed, stream_id=stream_id(f"discrete:{n}"))
        _DISCRETE_CACHE[key] = sim.batch(cfg, runs, threads)
    return _DISCRETE_CACHE[key]


def clear_cache():
    _DISCRETE_CACHE.clear()


def conditional_u(n: int, r_max: int, runs: int, seed: int, threads=None, label: str = "u") -> np.ndarray:
    cfg = sim.SimConfig(n, r_max, backend="conditional", seed=seed, stream_id=stream_id(f"{label}:{n}"))
    return sim.batch(cfg, runs, threads).u


# -- suites ----------------------------------------------------------------------

def suite_t1(n_grid, runs, r_list=(1,), seed=0, threads=None) -> list:
    """``r! U_r / ln^r n`` vs Exp(1) (W1) and ``ln^{-r} n ⊙ U_r`` vs Geom (TV)."""
    rows = []
    n_last = n_grid[-1]
    r_max = max(r_list)
    samples, sample_ms = {}, {}
    for n in n_grid:
        with _Timer() as tm:
            samples[n] = conditional_u(n, r_max, _runs_for(runs, n), seed, threads, "t1")
        sample_ms[n] = tm.ms
    for r in r_list:
        w1s, w1_se, tvs, tv_se = [], [], [], []
        law = laws.GeomMarginal(r)
        for n in n_grid:
            u, ms = samples[n][:, r - 1], sample_ms[n]
            with _Timer() as tm:
                ln = math.log(n)
                scaled = laws.factorial(r) * u / ln ** r
                w1 = stats.wasserstein1(scaled, laws.std_exp_quantile)
                se = stats.wasserstein1_noise(scaled, laws.std_exp_quantile)
                rng = run_rng(seed, stream_id(f"t1-thin:{n}:{r}"))
                thinned = thinning.thin_count(u, thinning.ThinningSpec(min(1.0, ln ** -r)), rng)
                tv = stats.tv_to_law(thinned, law.pmf)
                noise = stats.tv_noise(law.pmf(np.arange(64)), u.shape[0])
            w1s.append(w1), w1_se.append(se), tvs.append(tv), tv_se.append(noise)
            thr = C.TV_T1 if n == n_last else INF
            rows.append(ResultRow("t1", n, str(r), "w1_exp", w1, INF, se, True, seed, ms + tm.ms))
            rows.append(ResultRow("t1", n, str(r), "tv_geom_thinned", tv, thr, noise, tv <= thr, seed, tm.ms))
        if len(n_grid) > 1:
            rows.append(_trend_row("t1", n_last, r, "w1_exp", w1s, w1_se, seed))
            rows.append(_trend_row("t1", n_last, r, "tv_geom_thinned", tvs, tv_se, seed))
    return rows


def _discrete_rmax(r_needed: int) -> int:
    return max(2, r_needed)


def suite_t3(n_grid, runs, r_list=(0, 1), seed=0, threads=None) -> list:
    """KS of ``T_r/n - ln n - r ln ln n`` against Gumbel(r)."""
    rows = []
    n_last = n_grid[-1]
    for r in r_list:
        ks_vals, ks_se = [], []
        for n in n_grid:
            m = _runs_for(runs, n)
            with _Timer() as tm:
                ens = discrete_ensemble(n, m, seed, threads, _discrete_rmax(max(r_list)))
                x = ens.t[:, r] / n - math.log(n) - r * math.log(math.log(n))
                ks = stats.ks_statistic(x, lambda v: laws.gumbel_cdf(r, v))
            thr = C.KS_T3.get(r, INF) if n == n_last else INF
            ks_vals.append(ks), ks_se.append(stats.ks_noise(m))
            rows.append(ResultRow("t3", n, str(r), "ks_gumbel", ks, thr, stats.ks_noise(m), ks <= thr, seed, tm.ms))
        if len(n_grid) > 1:
            rows.append(_trend_row("t3", n_last, r, "ks_gumbel", ks_vals, ks_se, seed))
    return rows


def _joint_cells(a, b, cap: int = 8) -> np.ndarray:
    return np.minimum(a, cap) * (cap + 1) + np.minimum(b, cap)


def joint_g_chi_square(u_hat: np.ndarray, seed: int, n_ref: int = 1_000_000):
    """Two-sample chi-square of ``(U_hat_1, U_hat_2)`` vs ``(N_1(E), N_2(E/2))`` draws.

    Cells are ``(min(a, 8), min(b, 8))``, ordered by pooled frequency so that
    tail pooling merges the rare cells first.
    """
    rng = run_rng(seed, stream_id("joint-g-reference"))
    ref = laws.sample_mixed_poisson_seq(2, rng, n_ref)
    ca = np.bincount(_joint_cells(u_hat[:, 0], u_hat[:, 1]), minlength=81)
    cb = np.bincount(_joint_cells(ref[:, 0], ref[:, 1]), minlength=81)
    order = np.argsort(-(ca / ca.sum() + cb / cb.sum()), kind="stable")
    return stats.chi_square_two_sample(ca[order], cb[order])


def suite_t2(n_grid, runs, r_list=(1, 2), seed=0, threads=None) -> list:
    """Delayed counts ``U_hat_r`` vs Geom(r!/(r!+1)) marginals and the joint law."""
    rows = []
    n_last = n_grid[-1]
    r_max = _discrete_rmax(max(r_list))
    tvs = {r: [] for r in r_list}
    tv_se = {r: [] for r in r_list}
    for n in n_grid:
        m = _runs_for(runs, n)
        with _Timer() as tm:
            ens = discrete_ensemble(n, m, seed, threads, r_max)
        for r in r_list:
            law = laws.GeomMarginal(r)
            tv = stats.tv_to_law(ens.u_hat[:, r - 1], law.pmf)
            noise = stats.tv_noise(law.pmf(np.arange(64)), m)
            tvs[r].append(tv), tv_se[r].append(noise)
            thr = C.TV_T2 if n == n_last else INF
            rows.append(ResultRow("t2", n, str(r), "tv_geom", tv, thr, noise, tv <= thr, seed, tm.ms))
    if len(n_grid) > 1:
        for r in r_list:
            rows.append(_trend_row("t2", n_last, r, "tv_geom", tvs[r], tv_se[r], seed))
    if {1, 2} <= set(r_list):
        ens = discrete_ensemble(n_last, _runs_for(runs, n_last), seed, threads, r_max)
        with _Timer() as tm:
            stat, dof, p = joint_g_chi_square(ens.u_hat[:, :2], seed)
        rows.append(ResultRow("t2", n_last, "1-2", "chi2_joint_p", p, C.P_JOINT_G, float("nan"),
                              p > C.P_JOINT_G, seed, tm.ms))
    return rows


def suite_cor(n_grid, runs, pairs=((0, 1),), seed=0, threads=None) -> list:
    """KS of ``(T_r2 - T_r1)/n - (r2 - r1) ln ln n`` against Logistic(r1, r2)."""
    rows = []
    n_last = n_grid[-1]
    r_max = _discrete_rmax(max(r2 for _, r2 in pairs))
    for r1, r2 in pairs:
        ks_vals, ks_se = [], []
        for n in n_grid:
            m = _runs_for(runs, n)
            with _Timer() as tm:
                ens = discrete_ensemble(n, m, seed, threads, r_max)
                gap = (ens.t[:, r2] - ens.t[:, r1]) / n - (r2 - r1) * math.log(math.log(n))
                ks = stats.ks_statistic(gap, lambda v: laws.logistic_cdf(r1, r2, v))
            thr = C.KS_COR if n == n_last else INF
            ks_vals.append(ks), ks_se.append(stats.ks_noise(m))
            rows.append(ResultRow("cor", n, f"{r1}-{r2}", "ks_logistic", ks, thr, stats.ks_noise(m),
                                  ks <= thr, seed, tm.ms))
        if len(n_grid) > 1:
            rows.append(_trend_row("cor", n_last, f"{r1}-{r2}", "ks_logistic", ks_vals, ks_se, seed))
    return rows


CONV_UNION = (pointproc.Window(0, 0.0), pointproc.Window(1, 0.0))


def h_n_window_counts(n: int, m: int, seed: int, threads=None, windows=CONV_UNION) -> np.ndarray:
    """Counts of ``H^(n)`` in each window for ``m`` independent patterns (streamed)."""
    sid = stream_id(f"conv:{n}")
    levels = max(w.level for w in windows)
    a_min = min(w.a for w in windows)

    def block(lo, hi):
        out = np.empty((hi - lo, len(windows)), dtype=np.int64)
        for j, i in enumerate(range(lo, hi)):
            rng = run_rng(seed, sid, i)
            z = sim.poissonized_arrivals(n, levels, rng)
            pat = pointproc.build_H_n(z, n, rng, a_min=a_min)
            out[j] = [pat.count(w) for w in windows]
        return out

    bounds = [(s, min(s + sim.BLOCK_RUNS, m)) for s in range(0, m, sim.BLOCK_RUNS)]
    threads = sim.resolve_threads(threads)
    if threads == 1 or len(bounds) == 1:
        parts = [block(a, b) for a, b in bounds]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda ab: block(*ab), bounds))
    return np.concatenate(parts)


def suite_conv(n_grid, runs, seed=0, threads=None) -> list:
    """Void probability and mean count of ``H^(n)`` on ``{0,1} x [0, inf)``."""
    rows = []
    n_last = n_grid[-1]
    lam = pointproc.intensity(list(CONV_UNION))
    voids, void_se, means, mean_se = [], [], [], []
    for n in n_grid:
        m = _runs_for(runs, n)
        with _Timer() as tm:
            total = h_n_window_counts(n, m, seed, threads).sum(axis=1)
        void = float(np.mean(total == 0))
        vse = math.sqrt(max(void * (1 - void), 1e-300) / m)
        mean = float(total.mean())
        mse = float(total.std(ddof=1) / math.sqrt(m))
        verr, merr = abs(void - math.exp(-lam)), abs(mean - lam)
        last = n == n_last
        vthr = C.VOID_TOL if last else INF
        mthr = C.MEAN_TOL if last else INF
        rows.append(ResultRow("conv", n, "0-1", "void_abs_err", verr, vthr, vse, verr < vthr, seed, tm.ms))
        rows.append(ResultRow("conv", n, "0-1", "mean_abs_err", merr, mthr, mse, merr < mthr, seed, 0.0))
        voids.append(verr), void_se.append(vse), means.append(merr), mean_se.append(mse)
    if len(n_grid) > 1:
        rows.append(_trend_row("conv", n_last, "0-1", "void_abs_err", voids, void_se, seed))
        rows.append(_trend_row("conv", n_last, "0-1", "mean_abs_err", means, mean_se, seed))
    return rows


def suite_trick(n_grid, runs, r_list=(1,), seed=0, threads=None) -> list:
    """Thinning-trick witness: TV trend of ``ln^{-r} n ⊙ U_r`` and the bound ``p_n H_r(n)``."""
    rows = []
    n_last = n_grid[-1]
    r_max = max(r_list)
    samples = {n: conditional_u(n, r_max, _runs_for(runs, n), seed, threads, "trick") for n in n_grid}
    for r in r_list:
        rng = run_rng(seed, stream_id(f"trick-thin:{r}"))
        with _Timer() as tm:
            trend, bound = thinning.verify_thinning_trick({n: samples[n][:, r - 1] for n in n_grid}, r, rng, seed)
        meta = trend.metadata
        for n, tv, noise in zip(meta["n"], meta["tv"], meta["noise"]):
            thr = C.TV_TRICK if (n == n_last and r == 1) else INF
            rows.append(ResultRow("trick", n, str(r), "tv_geom_thinned", tv, thr, noise, tv <= thr, seed, 0.0))
        rows.append(_trend_row("trick", n_last, r, "tv_geom_thinned", meta["tv"], meta["noise"], seed))
        for n, w in zip(bound.metadata["n"], bound.metadata["exact"]):
            rows.append(ResultRow("trick", n, str(r), "p_n_H", w, INF, float("nan"), math.isfinite(w), seed, 0.0))
        rows[-1].ms = tm.ms
    return rows


SUITES = {
    "t1": suite_t1,
    "t2": suite_t2,
    "t3": suite_t3,
    "cor": suite_cor,
    "conv": suite_conv,
    "trick": suite_trick,
}

DEFAULTS = {
    "t1": {"n": [100, 1000, 10_000, 100_000], "runs": 100_000, "r": [1]},
    "t2": {"n": [1000, 10_000, 100_000], "runs": 10_000, "r": [1, 2]},
    "t3": {"n": [100, 1000, 10_000], "runs": 20_000, "r": [0, 1]},
    "cor": {"n": [1000, 10_000, 100_000], "runs": 10_000, "r": [0, 1]},
    "conv": {"n": [1000, 10_000, 100_000], "runs": 2000, "r": None},
    "trick": {"n": [100, 1000, 10_000, 100_000], "runs": 100_000, "r": [1]},
}


def run_suite(theorem: str, n_grid, runs, r_list=None, seed: int = 0, threads=None) -> list:
    if theorem not in SUITES:
        raise ValueError(f"unknown theorem id {theorem!r}; expected one of {THEOREMS}")
    n_grid = [int(n) for n in n_grid]
    if any(b <= a for a, b in zip(n_grid, n_grid[1:])):
        raise ValueError("n grid must be strictly increasing")
    if not n_grid or n_grid[0] < 3:
        raise ValueError("n grid values must be >= 3")
    fn = SUITES[theorem]
    if theorem == "conv":
        return fn(n_grid, runs, seed=seed, threads=threads)
    if theorem == "cor":
        r_list = r_list or DEFAULTS["cor"]["r"]
        if len(r_list) % 2:
            raise ValueError("cor expects r values in pairs r1 r2 ...")
        pairs = [(r_list[i], r_list[i + 1]) for i in range(0, len(r_list), 2)]
        for r1, r2 in pairs:
            if not 0 <= r1 < r2:
                raise ValueError("cor pairs need 0 <= r1 < r2")
        return fn(n_grid, runs, pairs=pairs, seed=seed, threads=threads)
    r_list = list(r_list or DEFAULTS[theorem]["r"])
    low = 0 if theorem == "t3" else 1
    if any(r < low for r in r_list):
        raise ValueError(f"{theorem} needs r >= {low}")
    return fn(n_grid, runs, r_list=r_list, seed=seed, threads=threads)
