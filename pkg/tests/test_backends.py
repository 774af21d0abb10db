import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hermite_bmo import _backend, _pykernels

_ckernels = pytest.importorskip("hermite_bmo._ckernels")


@pytest.mark.parametrize("nmax", [0, 1, 5, 200])
def test_hermite_table_agrees(nmax):
    x = np.linspace(-30, 30, 1201)
    a = _ckernels.hermite_table(nmax, x)
    b = _pykernels.hermite_table(nmax, x)
    assert a.shape == b.shape == (nmax + 1, x.size)
    assert np.abs(a - b).max() <= 1e-13


@pytest.mark.parametrize("k", [0, 1, 2, 1000, 16384])
def test_hermite_last_two_agrees(k):
    # far outside the turning point the values underflow identically in both
    x = np.concatenate([np.linspace(-200, 200, 2001), [0.0, 1e-300, 37.5]])
    (a0, a1), (b0, b1) = _ckernels.hermite_last_two(k, x), _pykernels.hermite_last_two(k, x)
    assert np.abs(a0 - b0).max() <= 1e-12 and np.abs(a1 - b1).max() <= 1e-12


@given(st.integers(0, 2**32 - 1), st.integers(1, 3), st.booleans())
def test_mean_oscillation_scan_agrees(seed, n, complex_):
    rng = np.random.default_rng(seed)
    M = {1: 40, 2: 14, 3: 7}[n]
    w = int(rng.integers(2, M + 1))
    vals = rng.standard_normal((M,) * n)
    if complex_:
        vals = vals + 1j * rng.standard_normal((M,) * n)
    means = np.ascontiguousarray(_pykernels.window_means(vals, w))
    a = _ckernels.mean_oscillation_scan(vals, means, w)
    b = _pykernels.mean_oscillation_scan(vals, means, w)
    assert a.shape == b.shape == (M - w + 1,) * n
    assert np.abs(a - b).max() <= 1e-13


def test_default_backend_is_compiled():
    if os.environ.get("HERMITE_BMO_BACKEND", "").lower() == "python":
        pytest.skip("fallback forced by environment")
    assert _backend.NAME == "cython"


def test_environment_forces_fallback():
    code = (
        "from hermite_bmo import _backend, _pykernels\n"
        "from hermite_bmo.hermite import Grid, HermiteCoefficients, analyze, synthesize\n"
        "import numpy as np\n"
        "assert _backend.NAME == 'python' and _backend.kernels is _pykernels\n"
        "c = HermiteCoefficients(1, 20, np.arange(21.0))\n"
        "print(np.abs(analyze(synthesize(c, Grid.default(20, 1)), 20).coeffs - c.coeffs).max())\n"
    )
    env = dict(os.environ, HERMITE_BMO_BACKEND="python")
    proc = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert float(proc.stdout) <= 1e-10
