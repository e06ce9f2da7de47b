"""Truncated periodic waves built from bump units.

A wave is the lattice sum F^(m)(x) = sum_{|k|<=m} psi(x - k theta), emitted
as scale * F^(m) + offset with scale chosen so the emitted range sits inside
[-1, 1].  Since psi >= 0 the emitted values actually land in [0, 1].

Two lattice conventions are exposed: default_theta gives 4 * essential_radius
(the pitch the quasiperiodicity analysis is calibrated for), lattice_theta
gives 4/s (gate shifts then fall on the uniform grid (4k +- 1)/s, which is
the layout the explicit network representation uses).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .activation import ActivationKind, BumpUnit, tail_integral
from .dist import InputDist1D
from .errors import InvalidParameterError, ResourceLimitError
from .quadrature import adaptive_simpson
from .seeding import derive_seed

# default lower bound on emitted variance; a configuration, not a claim
V_MIN_DEFAULT = 1e-3
_MC_CHUNK = 1 << 17


@dataclass(frozen=True)
class WaveSpec:
    psi: BumpUnit
    theta: float
    m: int
    scale: float
    offset: float

    def __post_init__(self):
        if not (self.theta > 0) or not math.isfinite(self.theta):
            raise InvalidParameterError(f"theta must be positive, got {self.theta!r}")
        if self.m < 0:
            raise InvalidParameterError(f"m must be >= 0, got {self.m!r}")
        if not (self.scale > 0):
            raise InvalidParameterError(f"scale must be positive, got {self.scale!r}")

    def describe(self) -> dict:
        return {
            "kind": self.psi.kind.variant,
            "sharpness": self.psi.kind.sharpness,
            "theta": self.theta,
            "m": self.m,
            "scale": self.scale,
            "offset": self.offset,
        }


def default_theta(psi: BumpUnit) -> float:
    return 4.0 * psi.essential_radius


def lattice_theta(kind: ActivationKind) -> float:
    """Pitch 4/s: every gate shift lands on the grid (4k +- 1)/s."""
    return 4.0 / kind.sharpness


def _raw_eval(psi: BumpUnit, theta: float, m: int, x) -> np.ndarray:
    return _kernels.wave_eval(psi.kind.kind_id, psi.kind.sharpness, theta, m, 1.0, 0.0, x)


def _period_grid(psi: BumpUnit, theta: float, m: int, points: int = 4097) -> np.ndarray:
    """Evaluation grid on [-theta/2, theta/2]: uniform points plus relu kinks."""
    points = max(points, 65)
    grid = np.linspace(-theta / 2.0, theta / 2.0, points)
    extras = [0.0]
    if psi.kind.variant == "relu":
        inv_s = 1.0 / psi.kind.sharpness
        half = theta / 2.0
        kmin = int(math.floor((-half - inv_s) / theta)) - 1
        kmax = int(math.ceil((half + inv_s) / theta)) + 1
        for k in range(max(kmin, -m), min(kmax, m) + 1):
            for e in (-inv_s, 0.0, inv_s):
                p = k * theta + e
                if -half <= p <= half:
                    extras.append(p)
    return np.unique(np.concatenate([grid, np.asarray(extras)]))


def make_wave(psi: BumpUnit, theta: float, m: int, rescale: bool = True,
              grid_points: int = 4097) -> WaveSpec:
    """Build a WaveSpec, scaling by the measured sup over one period.

    psi is even and unimodal, so the sup of the raw sum over the line is
    attained on [-theta/2, theta/2]; a dense grid there (plus exact kink
    points for relu) estimates it.  rescale=False keeps the raw sum
    (scale 1, offset 0), which is the literal gate-expansion normalization.
    """
    if not (psi.l1_norm > 1e-12):
        raise InvalidParameterError(f"degenerate bump: l1_norm={psi.l1_norm!r}")
    if not (theta > 0) or not math.isfinite(theta):
        raise InvalidParameterError(f"theta must be positive, got {theta!r}")
    if m < 0 or int(m) != m:
        raise InvalidParameterError(f"m must be a nonnegative integer, got {m!r}")
    m = int(m)
    if not rescale:
        return WaveSpec(psi=psi, theta=theta, m=m, scale=1.0, offset=0.0)
    grid = _period_grid(psi, theta, m, grid_points)
    sup_est = float(np.max(np.abs(_raw_eval(psi, theta, m, grid))))
    if sup_est <= 1e-300:
        raise InvalidParameterError("wave sup vanished; cannot rescale")
    return WaveSpec(psi=psi, theta=theta, m=m, scale=1.0 / sup_est, offset=0.0)


def eval_wave(w: WaveSpec, x: float) -> float:
    out = _kernels.wave_eval(
        w.psi.kind.kind_id, w.psi.kind.sharpness, w.theta, w.m, w.scale, w.offset,
        np.asarray([x], dtype=np.float64),
    )
    return float(out[0])


def eval_wave_batch(w: WaveSpec, xs) -> np.ndarray:
    return _kernels.wave_eval(
        w.psi.kind.kind_id, w.psi.kind.sharpness, w.theta, w.m, w.scale, w.offset, xs
    )


def wave_sup_ratio(w: WaveSpec) -> float:
    """Measured C_sup in sup|F^(m)| <= C_sup * l1 / theta (raw, pre-scale)."""
    sup_raw = 1.0 / w.scale if w.scale != 1.0 else float(
        np.max(np.abs(_raw_eval(w.psi, w.theta, w.m, _period_grid(w.psi, w.theta, w.m))))
    )
    return sup_raw * w.theta / w.psi.l1_norm


def choose_truncation(psi: BumpUnit, M: float, delta: float,
                      theta: float = None, m_cap: int = 1_000_000) -> int:
    """Smallest m with tail mass beyond m*theta/2 below 4*delta*r and
    coverage m*theta/2 >= M.

    theta defaults to 4 * essential_radius.  Both conditions are monotone in
    m, so doubling plus binary search finds the minimum.
    """
    if not (M > 0) or not (delta > 0):
        raise InvalidParameterError("M and delta must be positive")
    if theta is None:
        theta = default_theta(psi)
    target = 4.0 * delta * psi.essential_radius

    def ok(m: int) -> bool:
        return tail_integral(psi, m * theta / 2.0) < target

    lo = int(math.ceil(2.0 * M / theta))
    if ok(lo):
        return lo
    hi = max(2 * lo, lo + 1)
    while not ok(hi):
        if hi > m_cap:
            raise ResourceLimitError(
                f"truncation order above cap: need m > {m_cap} "
                f"for delta={delta!r} (tail target {target:.3e})"
            )
        hi *= 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    if hi > m_cap:
        raise ResourceLimitError(f"truncation order above cap: need m = {hi} > {m_cap}")
    return hi


def wave_variance(w: WaveSpec, tol: float = 1e-10) -> float:
    """Variance of the emitted wave under U(0, theta), by quadrature."""
    kid = w.psi.kind.kind_id
    s = w.psi.kind.sharpness

    def value(x):
        return float(_kernels.wave_eval(kid, s, w.theta, w.m, w.scale, w.offset,
                                        np.asarray([x]))[0])

    breakpoints = []
    if w.psi.kind.variant == "relu":
        inv_s = 1.0 / s
        kmax = min(w.m, int(math.ceil((w.theta + inv_s) / w.theta)) + 1)
        kmin = max(-w.m, int(math.floor(-inv_s / w.theta)) - 1)
        for k in range(kmin, kmax + 1):
            for e in (-inv_s, 0.0, inv_s):
                p = k * w.theta + e
                if 0.0 < p < w.theta:
                    breakpoints.append(p)
    mean = adaptive_simpson(value, 0.0, w.theta, tol=tol, breakpoints=breakpoints) / w.theta
    second = adaptive_simpson(lambda x: value(x) ** 2, 0.0, w.theta, tol=tol,
                              breakpoints=breakpoints) / w.theta
    return max(second - mean * mean, 0.0)


def _truncation_gap(w: WaveSpec, m_a: int, m_b: int, M: float) -> float:
    """sup over a dense grid on [-M, M] of |F^(m_a) - F^(m_b)|, raw values."""
    char_width = w.psi.essential_radius / 50.0
    count = int(min(200001, max(4097, math.ceil(2.0 * M / char_width) + 1)))
    grid = np.linspace(-M, M, count)
    a = _raw_eval(w.psi, w.theta, m_a, grid)
    b = _raw_eval(w.psi, w.theta, m_b, grid)
    return float(np.max(np.abs(a - b)))


def quasiperiodicity_defect(w: WaveSpec, M: float) -> float:
    """Distance of the raw truncated sum from a periodic reference on [-M, M].

    The reference is the wider truncation m_ref = max(4m, m + ceil(4M/theta)),
    standing in for the infinite periodic sum; its own truncation error is
    controlled by the tail mass beyond m_ref*theta - M.
    """
    if not (M > 0):
        raise InvalidParameterError("M must be positive")
    m_ref = max(4 * w.m, w.m + int(math.ceil(4.0 * M / w.theta)))
    return _truncation_gap(w, w.m, m_ref, M)


def shift_effect(w: WaveSpec, dist: InputDist1D, z: float, n_mc: int, seed: int,
                 c_const: float = 4.0):
    """Monte Carlo shift effect |E phi(x - z) - E phi(x)| and its bound.

    Common random numbers: both expectations use the same sample stream,
    drawn in fixed-size chunks with per-chunk derived seeds so the result
    does not depend on how chunks are distributed over workers.  The bound
    is C * (defect + (theta/sigma) * E|phi|) with the defect measured at
    window |z| + 8 sigma.
    """
    if n_mc < 10_000:
        raise InvalidParameterError("shift_effect needs n_mc >= 1e4")
    if not math.isfinite(z):
        raise InvalidParameterError("z must be finite")
    sum_base = 0.0
    sum_shift = 0.0
    sum_abs = 0.0
    done = 0
    chunk_id = 0
    while done < n_mc:
        take = min(_MC_CHUNK, n_mc - done)
        rng = np.random.default_rng(derive_seed(seed, f"shift_effect/chunk{chunk_id}"))
        x = dist.sample(rng, take)
        base = eval_wave_batch(w, x)
        shifted = eval_wave_batch(w, x - z)
        sum_base += float(np.sum(base))
        sum_shift += float(np.sum(shifted))
        sum_abs += float(np.sum(np.abs(base)))
        done += take
        chunk_id += 1
    effect = abs(sum_shift / n_mc - sum_base / n_mc)
    sigma = dist.std()
    defect = quasiperiodicity_defect(w, abs(z) + 8.0 * sigma)
    bound = c_const * (defect + (w.theta / sigma) * (sum_abs / n_mc))
    return effect, bound
