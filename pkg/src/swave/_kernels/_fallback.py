"""Vectorized numpy implementation of the bump/wave evaluation kernels.

Kept in exact operational lockstep with the compiled module in _wavecore.pyx:
same term order inside each bump formula, same nearest-shift-first summation
order for the wave, same tie-breaking.  Tests assert agreement to 1e-12.
"""
from __future__ import annotations

import numpy as np

SIGMOID = 0
RELU = 1
SOFTPLUS = 2
SOFTSIGN = 3


def _logistic(z):
    out = np.empty_like(z)
    pos = z >= 0
    neg = ~pos
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[neg])
    out[neg] = ez / (1.0 + ez)
    return out


def _softplus(z):
    # log(1 + e^z) without overflow for large |z|
    return np.where(z > 0.0, z, 0.0) + np.log1p(np.exp(-np.abs(z)))


def _relu(z):
    return np.where(z > 0.0, z, 0.0)


def bump_eval(kind: int, s: float, x) -> np.ndarray:
    """Evaluate the unit bump psi for the given gate kind at points x."""
    x = np.asarray(x, dtype=np.float64)
    if kind == SIGMOID:
        return _logistic(s * x + 1.0) + _logistic(1.0 - s * x) - 1.0
    if kind == RELU:
        sx = s * x
        return _relu(sx + 1.0) - _relu(sx) + _relu(1.0 - sx) - _relu(-sx) - 1.0
    if kind == SOFTPLUS:
        sx = s * x
        return _softplus(sx + 1.0) - _softplus(sx) + _softplus(1.0 - sx) - _softplus(-sx) - 1.0
    if kind == SOFTSIGN:
        a = x + 1.0
        b = 1.0 - x
        return a / (1.0 + np.abs(a)) + b / (1.0 + np.abs(b))
    raise ValueError(f"unknown kind id {kind}")


def wave_eval(kind: int, s: float, theta: float, m: int, scale: float, offset: float, x) -> np.ndarray:
    """Evaluate scale * sum_{|k|<=m} psi(x - k*theta) + offset at points x.

    Shifts are accumulated nearest first (two advancing frontiers), so terms
    are added in decreasing magnitude; psi is even and unimodal.  Ties go to
    the left frontier.
    """
    x = np.asarray(x, dtype=np.float64)
    shape = x.shape
    x = np.ravel(x)
    knear = np.clip(np.rint(x / theta), -float(m), float(m))
    total = bump_eval(kind, s, x - knear * theta)
    lo = knear.copy()
    hi = knear.copy()
    for _ in range(2 * m):
        dlo = np.where(lo > -m, np.abs(x - (lo - 1.0) * theta), np.inf)
        dhi = np.where(hi < m, np.abs(x - (hi + 1.0) * theta), np.inf)
        take_lo = dlo <= dhi
        k = np.where(take_lo, lo - 1.0, hi + 1.0)
        total = total + bump_eval(kind, s, x - k * theta)
        lo = np.where(take_lo, lo - 1.0, lo)
        hi = np.where(take_lo, hi, hi + 1.0)
    return (scale * total + offset).reshape(shape)
