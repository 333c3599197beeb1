"""Command-line front end: ``ccp {exact,verify,sweep,law,simulate}``.

Exit codes: 0 success, 1 a statistical check failed (``verify`` only),
2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction

import numpy as np

from ccp import exact, laws, sim, verify

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2
MIN_SWEEP_RUNS = 100


class ConfigError(ValueError):
    pass


def _frac(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# -- exact --------------------------------------------------------------------------

def cmd_exact(args) -> int:
    what = args.what
    if what == "hyperharmonic":
        if args.method == "alternating":
            val = exact.hyperharmonic_alternating(args.n, args.r)
        else:
            val = exact.hyperharmonic_recursive(args.n, args.r, mode="float" if args.method == "float" else "exact")
        if args.format == "json":
            text = json.dumps({"n": val.n, "r": val.r, "method": val.method, "approx": val.approx,
                               "exact": _frac(val.exact) if val.exact is not None else None}) + "\n"
        else:
            text = f"{val}\n"
    elif what == "pgf":
        pmf = exact.exact_u_pgf_coefficients(args.n, args.r)
        lines = [" ".join(f"{k}:{_frac(p)}" for k, p in pmf.as_dict().items())]
        if args.u is not None:
            lines.append(f"G({args.u:g}) = {exact.exact_u_pgf(args.n, args.r, args.u):.12g}")
        lines.append(f"mean = {_frac(pmf.mean())} ≈ {float(pmf.mean()):.6f}")
        text = "\n".join(lines) + "\n"
    elif what == "oracle":
        pmf = exact.oracle_u_pmf(args.n, args.r)
        text = " ".join(f"{k}:{_frac(p)}" for k, p in pmf.as_dict().items()) + "\n"
    elif what == "et":
        asym = exact.expected_t_asymptotic(args.n, args.r)
        line = f"n={args.n} r={args.r} asymptotic={asym:.6f}"
        if args.r == 0:
            et0 = exact.expected_t0_exact(args.n)
            line += f" exact={float(et0):.6f}"
            if args.n <= 60:
                line += f" ({_frac(et0)})"
        text = line + "\n"
    else:  # pragma: no cover - argparse restricts choices
        raise ConfigError(f"unknown exact command {what!r}")
    _emit(text, args.out)
    return EXIT_OK


# -- verify / sweep -----------------------------------------------------------------

def _plan(args) -> dict:
    theorem = args.theorem
    defaults = verify.DEFAULTS[theorem]
    n_grid = args.n or defaults["n"]
    runs = args.runs or defaults["runs"]
    if runs < MIN_SWEEP_RUNS:
        raise ConfigError(f"--runs must be >= {MIN_SWEEP_RUNS}")
    r_list = args.r if args.r is not None else defaults["r"]
    return {"theorem": theorem, "n_grid": n_grid, "runs": runs, "r_list": r_list}


def _run_plan(args):
    plan = _plan(args)
    # each invocation recomputes its samples, as a fresh process would
    verify.clear_cache()
    rows = verify.run_suite(plan["theorem"], plan["n_grid"], plan["runs"], plan["r_list"],
                            seed=args.seed, threads=args.threads)
    if args.format == "json":
        text = verify.rows_to_json(rows, timing=args.timing)
    else:
        text = verify.rows_to_csv(rows, timing=args.timing)
    _emit(text, args.out)
    return rows


def cmd_verify(args) -> int:
    rows = _run_plan(args)
    return EXIT_OK if all(r.passed for r in rows) else EXIT_FAIL


def cmd_sweep(args) -> int:
    _run_plan(args)
    return EXIT_OK


# -- law ----------------------------------------------------------------------------

def _law_from_args(args):
    params = {}
    if args.r is not None:
        params["r"] = args.r
    if args.r1 is not None:
        params["r1"] = args.r1
    if args.r2 is not None:
        params["r2"] = args.r2
    if args.s is not None:
        params["s"] = args.s
    if args.index_set is not None:
        params["index_set"] = laws.ALL_N if args.index_set.upper() == "N" else [
            int(v) for v in args.index_set.split(",") if v]
    return laws.make_law(args.tag, **params)


def cmd_law(args) -> int:
    law = _law_from_args(args)
    fn = getattr(law, args.fn, None)
    if fn is None:
        raise ConfigError(f"law {args.tag!r} has no {args.fn}")
    if args.x:
        xs = np.asarray(args.x, dtype=float)
    else:
        lo, hi, num = args.grid
        xs = np.linspace(float(lo), float(hi), int(num))
    if args.fn == "pmf":
        xs = np.round(xs).astype(np.int64)
        if np.any(xs < 0):
            raise ConfigError("pmf points must be non-negative integers")
    if args.fn == "pgf" and isinstance(law, laws.MixedPoissonSeq):
        vals = [law.pgf([x] * law.s) for x in xs]
    else:
        vals = np.asarray(fn(xs), dtype=float)
    if args.format == "json":
        text = json.dumps([{"x": float(x), "value": float(v)} for x, v in zip(xs, vals)]) + "\n"
    else:
        text = "x," + args.fn + "\n" + "".join(f"{x:.10g},{v:.12g}\n" for x, v in zip(xs, vals))
    _emit(text, args.out)
    return EXIT_OK


# -- simulate -----------------------------------------------------------------------

def cmd_simulate(args) -> int:
    delays = None
    if args.delays is not None:
        if args.delays == ["auto"]:
            delays = sim.default_delays(args.n, args.r_max)
        else:
            delays = tuple(int(d) for d in args.delays)
    cfg = sim.SimConfig(args.n, args.r_max, delays=delays, backend=args.backend, seed=args.seed,
                        stream_id=args.stream_id, track_w0=args.w0)
    ens = sim.batch(cfg, args.runs, args.threads)
    text = json.dumps(ens.to_json_dict(include_runs=args.include_runs), default=_jsonable) + "\n"
    _emit(text, args.out)
    return EXIT_OK


def _jsonable(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, float) and not math.isfinite(o):
        return str(o)
    raise TypeError(type(o))


# -- parser -------------------------------------------------------------------------

def _global_flags(parser, suppress: bool):
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--seed", type=int, default=d(0), help="master seed (default 0)")
    parser.add_argument("--threads", type=int, default=d(None),
                        help="worker threads (default: $CCP_THREADS or logical cores)")
    parser.add_argument("--out", default=d(None), help="output file (default stdout)")
    parser.add_argument("--format", choices=("csv", "json"), default=d("csv"))
    parser.add_argument("--timing", action="store_true", default=d(False),
                        help="fill the ms column with wall times (output is then not reproducible)")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ccp", description="Extended coupon collector toolkit")
    _global_flags(p, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, suppress=True)
    sub = p.add_subparsers(dest="command", required=True)

    ex = sub.add_parser("exact", parents=[common], help="exact values")
    ex.add_argument("what", choices=("hyperharmonic", "pgf", "oracle", "et"))
    ex.add_argument("--n", type=int, required=True)
    ex.add_argument("--r", type=int, default=1)
    ex.add_argument("--u", type=float, default=None, help="evaluation point for pgf")
    ex.add_argument("--method", choices=("recursion", "alternating", "float"), default="recursion")
    ex.set_defaults(func=cmd_exact)

    for name, func, helptext in (("verify", cmd_verify, "run a theorem check (exit 1 on failure)"),
                                 ("sweep", cmd_sweep, "write result rows over an n grid")):
        sp = sub.add_parser(name, parents=[common], help=helptext)
        sp.add_argument("theorem", choices=verify.THEOREMS)
        sp.add_argument("--n", type=int, nargs="+", default=None)
        sp.add_argument("--runs", type=int, default=None)
        sp.add_argument("--r", type=int, nargs="+", default=None)
        sp.set_defaults(func=func)

    lw = sub.add_parser("law", parents=[common], help="evaluate a limit law on a grid")
    lw.add_argument("tag", help="gumbel | exp | geom | geomsum | logistic | mixedpoisson")
    lw.add_argument("--fn", choices=("cdf", "pmf", "pgf"), default="cdf")
    lw.add_argument("--r", type=int, default=None)
    lw.add_argument("--r1", type=int, default=None)
    lw.add_argument("--r2", type=int, default=None)
    lw.add_argument("--s", type=int, default=None)
    lw.add_argument("--index-set", default=None, help="comma-separated r values, or N")
    lw.add_argument("--grid", nargs=3, default=("-2", "5", "8"), metavar=("LO", "HI", "NUM"))
    lw.add_argument("--x", type=float, nargs="+", default=None)
    lw.set_defaults(func=cmd_law)

    sm = sub.add_parser("simulate", parents=[common], help="simulate runs, print a JSON ensemble")
    sm.add_argument("--n", type=int, required=True)
    sm.add_argument("--r-max", type=int, default=1)
    sm.add_argument("--backend", choices=sim.BACKENDS, default="poissonized")
    sm.add_argument("--runs", type=int, default=1000)
    sm.add_argument("--delays", nargs="+", default=None, help="integers, or 'auto' for round(r n ln ln n)")
    sm.add_argument("--stream-id", type=int, default=0)
    sm.add_argument("--w0", action="store_true", help="track W_0 (poissonized backend)")
    sm.add_argument("--include-runs", action="store_true")
    sm.set_defaults(func=cmd_simulate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OverflowError) as exc:
        print(f"ccp: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
