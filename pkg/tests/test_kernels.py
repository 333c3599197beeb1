import os
import subprocess
import sys

import numpy as np

import ccp
from ccp import kernels, sim

SNIPPET = (
    "import numpy as np, ccp; from ccp import sim;"
    "e = sim.batch(sim.SimConfig(200, 2, delays=(50, 90), backend='discrete', seed=9), 300);"
    "print(ccp.KERNEL, int(e.t.sum()), int(e.u.sum()), int(e.u_hat.sum()))"
)


def test_kernel_selected():
    assert ccp.KERNEL in ("cython", "numpy")
    assert kernels.KERNEL == ccp.KERNEL


def test_pure_python_switch_gives_identical_runs():
    env = dict(os.environ, CCP_PURE_PYTHON="1")
    pure = subprocess.run([sys.executable, "-c", SNIPPET], env=env, capture_output=True, text=True, check=True)
    env.pop("CCP_PURE_PYTHON")
    default = subprocess.run([sys.executable, "-c", SNIPPET], env=env, capture_output=True, text=True, check=True)
    assert pure.stdout.split()[0] == "numpy"
    assert pure.stdout.split()[1:] == default.stdout.split()[1:]


def test_chunk_size_bounds():
    assert sim.chunk_size(1) == 64
    assert sim.chunk_size(10**6) == 1 << 16
    draws = np.zeros(0, dtype=np.uint32)
    state = sim.CountState.fresh(3, 1)
    out = kernels.advance(draws, state.counts, state.level_deficits, np.zeros(2, np.int64), np.zeros(1, np.int64),
                          np.zeros(0, np.int64), np.zeros(0, np.int64), np.zeros((1, 1), np.int64), 0, False)
    assert tuple(out) == (0, False)
