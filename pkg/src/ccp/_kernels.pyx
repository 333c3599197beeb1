# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loop of the discrete coupon-collector scheme.

``advance`` consumes one chunk of uniformly drawn coupon types and updates a
capped-counter state in place. The pure-numpy twin lives in ``_fallback.py``;
both must return identical results for identical chunks.
"""

from libc.stdint cimport int32_t, int64_t, uint32_t


def advance(const uint32_t[::1] draws,
            int32_t[::1] counts,
            int64_t[::1] deficits,
            int64_t[::1] t_found,
            int64_t[::1] u_at_t0,
            const int64_t[::1] delays,
            int64_t[::1] u_hat,
            int64_t[:, ::1] arrivals,
            int64_t clock,
            bint keep_arrivals):
    """Process ``draws``; return ``(clock, done)``.

    ``t_found[0] == 0`` means the main album is not complete yet. ``u_hat``
    entries are -1 until their delayed clock is reached.
    """
    cdef Py_ssize_t L = draws.shape[0]
    cdef Py_ssize_t R = deficits.shape[0] - 1
    cdef Py_ssize_t n_delays = delays.shape[0]
    cdef Py_ssize_t j, r
    cdef uint32_t k
    cdef int32_t c
    cdef int64_t t0 = t_found[0]
    cdef int64_t next_target = -1
    cdef int64_t pending = 0
    cdef bint done = False

    for r in range(n_delays):
        if u_hat[r] < 0:
            pending += 1
    if t0 > 0 and pending > 0:
        next_target = _next_target(t0, delays, u_hat)

    with nogil:
        for j in range(L):
            clock += 1
            k = draws[j]
            c = counts[k]
            if c <= R:
                counts[k] = c + 1
                deficits[c] -= 1
                if keep_arrivals:
                    arrivals[k, c] = clock
                if deficits[c] == 0:
                    t_found[c] = clock
                    if c == 0:
                        t0 = clock
                        for r in range(1, R + 1):
                            u_at_t0[r - 1] = deficits[r]
                        if pending > 0:
                            next_target = _next_target(t0, delays, u_hat)
            if next_target == clock:
                for r in range(n_delays):
                    if u_hat[r] < 0 and t0 + delays[r] == clock:
                        u_hat[r] = deficits[r + 1]
                        pending -= 1
                if pending > 0:
                    next_target = _next_target(t0, delays, u_hat)
                else:
                    next_target = -1
            if deficits[R] == 0 and pending == 0:
                done = True
                break
    return clock, done


cdef inline int64_t _next_target(int64_t t0, const int64_t[::1] delays,
                                 int64_t[::1] u_hat) noexcept nogil:
    cdef int64_t best = -1
    cdef Py_ssize_t r
    for r in range(delays.shape[0]):
        if u_hat[r] < 0 and (best < 0 or t0 + delays[r] < best):
            best = t0 + delays[r]
    return best
