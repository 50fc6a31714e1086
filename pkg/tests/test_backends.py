"""Compiled vs. pure-Python sampling cores.

The two cores promise an identical RNG consumption pattern (one PCG64
double per vertex draw), so equal seeds must give bit-identical edge
sets, restart counts, and duplicate counts.
"""

import os
import subprocess
import sys

import numpy as np
import pytest

from umpc.sampling import _core_py, backend_name

compiled = pytest.importorskip(
    "umpc.sampling._core", reason="compiled sampling core not built"
)

CASES = [
    (4, 2, 6),
    (5, 2, 4),
    (8, 2, 12),
    (12, 2, 30),
    (30, 2, 60),
    (9, 3, 20),
    (14, 3, 28),
    (10, 4, 15),
    (64, 2, 96),
    (200, 2, 400),
]


@pytest.mark.parametrize("n,k,m", CASES)
@pytest.mark.parametrize("seed", [0, 1, 17, 2 ** 31])
def test_cores_agree_bit_for_bit(n, k, m, seed):
    cap = -(-(k * m) // n)
    fast = compiled.balanced_sample_core(n, k, m, cap, 100 * m, 64, np.random.default_rng(seed))
    slow = _core_py.balanced_sample_core(n, k, m, cap, 100 * m, 64, np.random.default_rng(seed))
    assert np.array_equal(np.asarray(fast[0]), np.asarray(slow[0]))
    assert fast[1] == slow[1]  # restarts
    assert fast[2] == slow[2]  # duplicate rejections


def test_default_backend_is_compiled_here():
    assert backend_name() == "compiled"


def test_env_var_forces_pure_python():
    env = dict(os.environ, UMPC_PURE_PYTHON="1")
    out = subprocess.run(
        [sys.executable, "-c", "from umpc.sampling import backend_name; print(backend_name())"],
        capture_output=True,
        text=True,
        env=env,
        check=True,
    )
    assert out.stdout.strip() == "python"


def test_env_var_zero_keeps_compiled():
    env = dict(os.environ, UMPC_PURE_PYTHON="0")
    out = subprocess.run(
        [sys.executable, "-c", "from umpc.sampling import backend_name; print(backend_name())"],
        capture_output=True,
        text=True,
        env=env,
        check=True,
    )
    assert out.stdout.strip() == "compiled"
