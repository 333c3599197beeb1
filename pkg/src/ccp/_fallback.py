"""Pure-numpy twin of the compiled ``advance`` kernel.

Works chunk-at-a-time: a stable sort by coupon type gives every draw its
occurrence number, and only the first ``r_max + 1`` occurrences per type are
events. Results (state updates, returned clock) match the compiled kernel
exactly for identical chunks.
"""

import numpy as np


def advance(draws, counts, deficits, t_found, u_at_t0, delays, u_hat,
            arrivals, clock, keep_arrivals):
    draws = np.asarray(draws)
    L = draws.shape[0]
    R = deficits.shape[0] - 1
    end_clock = clock + L

    order = np.argsort(draws, kind="stable")
    sd = draws[order]
    idx = np.arange(L)
    starts = np.ones(L, dtype=bool)
    starts[1:] = sd[1:] != sd[:-1]
    rank = idx - np.maximum.accumulate(np.where(starts, idx, 0))
    occ = counts[sd].astype(np.int64) + rank
    keep = occ <= R
    ev_type = sd[keep].astype(np.int64)
    ev_level = occ[keep]
    ev_clock = clock + 1 + order[keep].astype(np.int64)
    o = np.argsort(ev_clock, kind="stable")
    ev_type, ev_level, ev_clock = ev_type[o], ev_level[o], ev_clock[o]

    level_clocks = [ev_clock[ev_level == c] for c in range(R + 1)]
    for c in range(R + 1):
        need = deficits[c]
        if t_found[c] == 0 and 0 < need <= level_clocks[c].shape[0]:
            t_found[c] = level_clocks[c][need - 1]
            if c == 0:
                t0 = t_found[0]
                for r in range(1, R + 1):
                    seen = np.searchsorted(level_clocks[r], t0, side="right")
                    u_at_t0[r - 1] = deficits[r] - seen

    t0 = t_found[0]
    if t0 > 0:
        for i in range(delays.shape[0]):
            target = t0 + delays[i]
            if u_hat[i] < 0 and target <= end_clock:
                seen = np.searchsorted(level_clocks[i + 1], target, side="right")
                u_hat[i] = deficits[i + 1] - seen

    done = bool(t_found[R] > 0 and np.all(u_hat >= 0))
    stop = end_clock
    if done:
        stop = int(t_found[R])
        if delays.shape[0]:
            stop = max(stop, int(t0 + delays.max()))
        applied = ev_clock <= stop
        ev_type, ev_level, ev_clock = ev_type[applied], ev_level[applied], ev_clock[applied]

    deficits -= np.bincount(ev_level, minlength=R + 1)[: R + 1]
    np.maximum.at(counts, ev_type, (ev_level + 1).astype(counts.dtype))
    if keep_arrivals:
        arrivals[ev_type, ev_level] = ev_clock
    return stop, done
