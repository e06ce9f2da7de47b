"""Compiled extension vs numpy fallback: the two backends must agree."""
import numpy as np
import pytest

from swave import _kernels
from swave._kernels import _fallback

_compiled = None
try:
    from swave._kernels import _wavecore as _compiled
except ImportError:
    pass

needs_compiled = pytest.mark.skipif(_compiled is None,
                                    reason="compiled extension not built")

KINDS = [_kernels.SIGMOID, _kernels.RELU, _kernels.SOFTPLUS, _kernels.SOFTSIGN]


def test_backend_reported():
    assert _kernels.BACKEND in ("compiled", "fallback")


@needs_compiled
@pytest.mark.parametrize("kind", KINDS)
@pytest.mark.parametrize("s", [0.25, 1.0, 4.0])
def test_bump_parity(kind, s):
    x = np.random.default_rng(kind * 7 + int(s * 4)).normal(0.0, 3.0 / s, 4000)
    a = _fallback.bump_eval(kind, s, x)
    b = _compiled.bump_eval(kind, s, x)
    assert np.max(np.abs(a - b)) <= 2e-15


@needs_compiled
@pytest.mark.parametrize("kind", KINDS)
def test_wave_parity(kind):
    s, theta, m = 1.5, 7.0, 12
    x = np.random.default_rng(kind).normal(0.0, 20.0, 4000)
    a = _fallback.wave_eval(kind, s, theta, m, 1.7, -0.2, x)
    b = _compiled.wave_eval(kind, s, theta, m, 1.7, -0.2, x)
    assert np.max(np.abs(a - b)) <= 2e-15


@needs_compiled
def test_wave_parity_large_m():
    # far shifts must be skipped identically, not accumulated differently
    x = np.random.default_rng(5).normal(0.0, 4.0, 2000)
    a = _fallback.wave_eval(_kernels.SIGMOID, 4.0, 1.0, 200, 1.0, 0.0, x)
    b = _compiled.wave_eval(_kernels.SIGMOID, 4.0, 1.0, 200, 1.0, 0.0, x)
    assert np.max(np.abs(a - b)) <= 2e-15


def test_bump_nonnegative_all_kinds():
    # exact in real arithmetic; four-term kinds cancel to ~1e-14 in far tails
    x = np.linspace(-80.0, 80.0, 30001)
    for kind in KINDS:
        for s in (0.3, 1.0, 6.0):
            assert np.min(_fallback.bump_eval(kind, s, x)) >= -1e-12


def test_wave_empty_input():
    out = _kernels.wave_eval(_kernels.SIGMOID, 1.0, 10.0, 3, 1.0, 0.0,
                             np.empty(0))
    assert out.shape == (0,)


def test_force_fallback_env(tmp_path):
    import subprocess
    import sys

    code = ("import swave; print(swave.BACKEND)")
    out = subprocess.run([sys.executable, "-c", code],
                         env={"SWAVE_FORCE_FALLBACK": "1", "PATH": "/usr/bin:/bin"},
                         capture_output=True, text=True, cwd=str(tmp_path))
    assert out.stdout.strip() == "fallback"
