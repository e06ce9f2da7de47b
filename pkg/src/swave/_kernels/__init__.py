"""Kernel backend selection.

Prefers the compiled extension; falls back to the numpy implementation when
the extension is missing or when SWAVE_FORCE_FALLBACK is set (used by the
benchmark and the cross-implementation tests).
"""
import os

from . import _fallback

SIGMOID = _fallback.SIGMOID
RELU = _fallback.RELU
SOFTPLUS = _fallback.SOFTPLUS
SOFTSIGN = _fallback.SOFTSIGN

if os.environ.get("SWAVE_FORCE_FALLBACK"):
    _impl = _fallback
    BACKEND = "fallback"
else:
    try:
        from . import _wavecore as _impl
        BACKEND = "compiled"
    except ImportError:
        _impl = _fallback
        BACKEND = "fallback"

bump_eval = _impl.bump_eval
wave_eval = _impl.wave_eval

__all__ = [
    "BACKEND",
    "SIGMOID",
    "RELU",
    "SOFTPLUS",
    "SOFTSIGN",
    "bump_eval",
    "wave_eval",
    "_fallback",
]
