"""Time the compiled discrete-scheme kernel against the numpy fallback.

Usage: python3 benchmarks/bench_kernels.py [--n 1000 100000] [--runs 20]

Both kernels consume identical draw streams, so the ensembles they return
must agree exactly; the script checks that before reporting timings.
"""

import argparse
import time

import numpy as np

from ccp import _fallback, kernels, sim


def _time(advance, cfg, runs):
    saved = kernels.advance
    kernels.advance = advance
    try:
        t0 = time.perf_counter()
        ens = sim.batch(cfg, runs, threads=1)
        return time.perf_counter() - t0, ens
    finally:
        kernels.advance = saved


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, nargs="+", default=[1000, 10_000, 100_000])
    ap.add_argument("--runs", type=int, default=20)
    ap.add_argument("--r-max", type=int, default=2)
    args = ap.parse_args(argv)

    if kernels.KERNEL != "cython":
        print("compiled kernel not available; only the fallback can be timed")
    print(f"{'n':>8} {'runs':>6} {'cython ms/run':>14} {'numpy ms/run':>13} {'speedup':>8}")
    for n in args.n:
        cfg = sim.SimConfig(n, args.r_max, delays=sim.default_delays(n, args.r_max),
                            backend="discrete", seed=1, stream_id=7)
        t_np, ens_np = _time(_fallback.advance, cfg, args.runs)
        if kernels.KERNEL == "cython":
            t_cy, ens_cy = _time(kernels.advance, cfg, args.runs)
            assert np.array_equal(ens_cy.t, ens_np.t) and np.array_equal(ens_cy.u_hat, ens_np.u_hat)
            cy = f"{1e3 * t_cy / args.runs:14.2f}"
            speed = f"{t_np / t_cy:7.1f}x"
        else:
            cy, speed = f"{'-':>14}", f"{'-':>8}"
        print(f"{n:>8} {args.runs:>6} {cy} {1e3 * t_np / args.runs:13.2f} {speed}")


if __name__ == "__main__":
    main()
