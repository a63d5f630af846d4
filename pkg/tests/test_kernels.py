import os
import subprocess
import sys

import numpy as np
import pytest

from qrekit import _kernels_py as py
from qrekit import kernels

compiled = pytest.importorskip("qrekit._kernels")


@pytest.mark.skipif(os.environ.get("QREKIT_PURE") == "1", reason="fallback forced")
def test_backend_is_compiled_when_built():
    assert kernels.BACKEND == "cython"


def test_pure_flag_selects_fallback():
    env = dict(os.environ, QREKIT_PURE="1")
    out = subprocess.run(
        [sys.executable, "-c", "from qrekit import kernels; print(kernels.BACKEND)"],
        capture_output=True, text=True, env=env, check=True,
    )
    assert out.stdout.strip() == "python"


@pytest.mark.parametrize("m,nt", [(0, 1), (1, 3), (5, 11), (200, 31), (50, 1)])
def test_correlate_taps(m, nt):
    rng = np.random.default_rng(m + nt)
    x, taps = rng.normal(size=m), rng.normal(size=nt)
    a, b = py.correlate_taps(x, taps), compiled.correlate_taps(x, taps)
    assert np.allclose(a, b, rtol=0, atol=1e-12)
    if m:
        K = nt // 2
        full = np.correlate(np.pad(x, K), taps, mode="valid")
        assert np.allclose(a, full, rtol=0, atol=1e-12)


def test_strict_local_maxima():
    rng = np.random.default_rng(1)
    for m in (0, 1, 2, 3, 100):
        row = np.round(rng.normal(size=m), 1)
        assert np.array_equal(py.strict_local_maxima(row, 0.2), compiled.strict_local_maxima(row, 0.2))
    assert list(compiled.strict_local_maxima(np.array([0.0, 1.0, 1.0, 0.0, 2.0, 0.0]), 0.0)) == [4]


def test_conn_pair():
    rng = np.random.default_rng(2)
    for _ in range(200):
        xs = np.unique(rng.integers(0, 60, size=rng.integers(0, 8))).astype(np.int64)
        ys = np.unique(rng.integers(0, 60, size=rng.integers(0, 8))).astype(np.int64)
        d = int(rng.integers(0, 4))
        want = [y for y in ys if any(abs(x - y) <= d for x in xs)]
        assert list(py.conn_pair(xs, ys, d)) == want
        assert list(compiled.conn_pair(xs, ys, d)) == want


def test_mdt_run():
    rng = np.random.default_rng(3)
    y = np.abs(rng.normal(scale=80, size=5000))
    y[::700] += 900
    a_peaks, a_trace = py.mdt_run(y, 200.0, 150, np.log(2) / 300, 20.0)
    b_peaks, b_trace = compiled.mdt_run(y, 200.0, 150, np.log(2) / 300, 20.0)
    assert np.array_equal(a_peaks, b_peaks)
    assert np.allclose(a_trace, b_trace, equal_nan=True, rtol=0, atol=1e-12)
