"""Deterministic random streams.

Every simulated run draws from its own PCG64 generator keyed by
``(seed, stream_id, run_index)`` through numpy's ``SeedSequence`` spawn keys,
so a run's outcome never depends on which worker executed it or in what
order.
"""

import numpy as np

_HALF_ULP = 2.0 ** -54


def run_rng(seed: int, stream_id: int = 0, run_index: int = 0) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(stream_id), int(run_index)))
    return np.random.Generator(np.random.PCG64(ss))


def as_rng(rng) -> np.random.Generator:
    """Accept a Generator, an int seed, or None."""
    if isinstance(rng, np.random.Generator):
        return rng
    return run_rng(0 if rng is None else int(rng))


def open_uniform(rng: np.random.Generator, size=None):
    """Uniforms on the open interval (0, 1).

    ``Generator.random`` returns multiples of 2**-53 in [0, 1); shifting by
    half a step keeps every value strictly inside the interval.
    """
    return rng.random(size) + _HALF_ULP


def exponential(rng: np.random.Generator, size=None, scale: float = 1.0):
    """Exponential variates by inversion, never taking log(0)."""
    return -scale * np.log(open_uniform(rng, size))
