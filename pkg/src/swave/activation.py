"""Gate kinds and the localized bump unit built from each.

A bump unit is the even, nonnegative, integrable function obtained by
combining two (or four) shifted copies of a gate:

    sigmoid   psi(x) = sig(s x + 1) + sig(1 - s x) - 1
    relu      psi(x) = r(s x + 1) - r(s x) + r(1 - s x) - r(-s x) - 1
    softplus  same four-term combination with the softplus gate
    softsign  psi(x) = t(x + 1) + t(1 - x)    (sharpness plays no role)

with sig the logistic function, r(z) = max(0, z), t(z) = z / (1 + |z|).
The relu combination collapses to the tent max(0, 1 - s|x|).

Tail decay drives every downstream bound.  The exponential kinds use the
majorant 2e * exp(-s a) / s; relu is exactly zero beyond 1/s; softsign decays
like 2/x^2 and its tail has the closed form 2 ln(1 + 2/a) for a >= 1, which
we add analytically instead of stretching the quadrature window to O(1/tol).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence, Tuple

import numpy as np

from . import _kernels
from .errors import InvalidParameterError
from .quadrature import adaptive_simpson, bisect_root

VARIANTS = ("sigmoid", "relu", "softplus", "softsign")
_KIND_IDS = {
    "sigmoid": _kernels.SIGMOID,
    "relu": _kernels.RELU,
    "softplus": _kernels.SOFTPLUS,
    "softsign": _kernels.SOFTSIGN,
}
# fraction of the l1 mass that defines the essential radius
MASS_FRACTION = 5.0 / 6.0


@dataclass(frozen=True)
class ActivationKind:
    """A gate variant plus its sharpness s (> 0; softsign ignores s)."""

    variant: str
    sharpness: float = 1.0

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise InvalidParameterError(
                f"unknown variant {self.variant!r}, expected one of {VARIANTS}"
            )
        if not (self.sharpness > 0) or not math.isfinite(self.sharpness):
            raise InvalidParameterError(f"sharpness must be positive, got {self.sharpness!r}")

    @property
    def kind_id(self) -> int:
        return _KIND_IDS[self.variant]

    def gate(self, z):
        """The raw activation sigma_s(z), vectorized over z."""
        z = np.asarray(z, dtype=np.float64)
        s = self.sharpness
        if self.variant == "sigmoid":
            out = np.empty_like(z)
            pos = s * z >= 0
            neg = ~pos
            out[pos] = 1.0 / (1.0 + np.exp(-s * z[pos]))
            ez = np.exp(s * z[neg])
            out[neg] = ez / (1.0 + ez)
            return out
        if self.variant == "relu":
            return np.maximum(0.0, s * z)
        if self.variant == "softplus":
            sz = s * z
            return np.where(sz > 0.0, sz, 0.0) + np.log1p(np.exp(-np.abs(sz)))
        return z / (1.0 + np.abs(z))


@dataclass(frozen=True)
class BumpUnit:
    """An even localized bump with cached norm and essential radius.

    terms holds (coeff, sign, shift) triples: the bump equals
    sum coeff * gate(sign * x + shift) + constant_offset, which is also the
    exact hidden-layer expansion used for network export.
    """

    kind: ActivationKind
    terms: Tuple[Tuple[float, float, float], ...]
    constant_offset: float
    l1_norm: float
    essential_radius: float

    def __call__(self, x):
        return _kernels.bump_eval(self.kind.kind_id, self.kind.sharpness, x)

    def eval_from_terms(self, x):
        """Direct evaluation from the term list; cross-checks the kernel."""
        x = np.asarray(x, dtype=np.float64)
        total = np.full_like(x, self.constant_offset)
        for coeff, sign, shift in self.terms:
            total = total + coeff * self.kind.gate(sign * x + shift)
        return total

    def kink_points(self) -> Tuple[float, ...]:
        if self.kind.variant != "relu":
            return ()
        s = self.kind.sharpness
        return (-1.0 / s, 0.0, 1.0 / s)


def _canonical_terms(kind: ActivationKind):
    s = kind.sharpness
    if kind.variant == "softsign":
        return ((1.0, 1.0, 1.0), (1.0, -1.0, 1.0)), 0.0
    if kind.variant == "sigmoid":
        return ((1.0, 1.0, 1.0 / s), (1.0, -1.0, 1.0 / s)), -1.0
    # relu and softplus share the four-term combination
    return (
        (1.0, 1.0, 1.0 / s),
        (-1.0, 1.0, 0.0),
        (1.0, -1.0, 1.0 / s),
        (-1.0, -1.0, 0.0),
    ), -1.0


def _abs_bump(kind: ActivationKind):
    kid = kind.kind_id
    s = kind.sharpness
    return lambda x: abs(float(_kernels.bump_eval(kid, s, np.asarray([x]))[0]))


def _exp_window(s: float, tol: float) -> float:
    # where the exponential-tail majorant 2e exp(-s a)/s drops below tol/10
    return math.log(20.0 * math.e / (s * tol)) / s


def tail_integral(psi: BumpUnit, a: float, tol: float = 1e-10) -> float:
    """Two-sided tail mass of |psi| outside [-a, a].

    Quadrature over a finite window plus an analytic tail term per kind:
    exactly zero beyond 1/s for relu, the exponential majorant for sigmoid
    and softplus, and the closed form 2 ln(1 + 2/B) for softsign.
    """
    if a < 0:
        raise InvalidParameterError("tail starts at a >= 0")
    kind = psi.kind
    s = kind.sharpness
    f = _abs_bump(kind)
    if kind.variant == "relu":
        edge = 1.0 / s
        if a >= edge:
            return 0.0
        return 2.0 * adaptive_simpson(f, a, edge, tol=tol / 2)
    if kind.variant == "softsign":
        b = max(a, 1.0)
        quad = 2.0 * adaptive_simpson(f, a, b, tol=tol / 2) if a < b else 0.0
        return quad + 2.0 * math.log1p(2.0 / b)
    b = max(a, _exp_window(s, tol))
    quad = 2.0 * adaptive_simpson(f, a, b, tol=tol / 2) if a < b else 0.0
    return quad + 2.0 * math.e * math.exp(-s * b) / s


def l1_norm(psi: BumpUnit, tol: float = 1e-10) -> float:
    """Integral of |psi| over the line, accurate to roughly tol."""
    kind = psi.kind
    s = kind.sharpness
    f = _abs_bump(kind)
    if kind.variant == "relu":
        return adaptive_simpson(f, -1.0 / s, 1.0 / s, tol=tol, breakpoints=[0.0])
    if kind.variant == "softsign":
        return adaptive_simpson(f, -1.0, 1.0, tol=tol) + 2.0 * math.log(3.0)
    w = _exp_window(s, tol)
    return adaptive_simpson(f, -w, w, tol=tol) + 2.0 * math.e * math.exp(-s * w) / s


def essential_radius(psi: BumpUnit, tol: float = 1e-10) -> float:
    """Radius r with mass of |psi| over [-r, r] equal to 5/6 of the total.

    Solves tail_integral(r) = (1 - 5/6) * l1 by bisection; the cumulative
    mass is strictly monotone wherever psi is nonzero, so the root is unique.
    """
    total = psi.l1_norm
    if not (total > 0) or not math.isfinite(total):
        raise InvalidParameterError(f"degenerate bump: l1_norm={total!r}")
    target = (1.0 - MASS_FRACTION) * total

    def g(r):
        return target - tail_integral(psi, r, tol=tol)

    hi = 1.0 / psi.kind.sharpness if psi.kind.variant != "softsign" else 1.0
    while g(hi) < 0.0:
        hi *= 2.0
        if hi > 1e12:
            raise InvalidParameterError("essential radius bracket exceeded 1e12")
    return bisect_root(g, 0.0, hi, xtol=1e-11)


def make_bump(kind: ActivationKind, tol: float = 1e-10) -> BumpUnit:
    """Construct the canonical bump for a gate kind, caching norm and radius."""
    terms, const = _canonical_terms(kind)
    stub = BumpUnit(kind=kind, terms=terms, constant_offset=const,
                    l1_norm=math.nan, essential_radius=math.nan)
    norm = l1_norm(stub, tol=tol)
    if not (norm > 1e-12):
        raise InvalidParameterError(f"degenerate bump for {kind}: l1={norm!r}")
    withnorm = replace(stub, l1_norm=norm)
    radius = essential_radius(withnorm, tol=tol)
    return replace(withnorm, essential_radius=radius)


def check_mean_bound(psi: BumpUnit, grid: Sequence[float], eps: float) -> float:
    """Max over the grid of |psi(x)| / (local mean of |psi| on [x-eps, x+eps]).

    Regions where both sides vanish contribute ratio 0; values below the
    float cancellation floor of the four-term gate combinations (~1e-12)
    count as vanished.  A finite result certifies that point values are
    controlled by local averages at scale eps.
    """
    if eps <= 0:
        raise InvalidParameterError("eps must be positive")
    f = _abs_bump(psi.kind)
    kinks = psi.kink_points()
    worst = 0.0
    for x in grid:
        x = float(x)
        num = f(x)
        local = adaptive_simpson(
            f, x - eps, x + eps, tol=1e-13,
            breakpoints=[k for k in kinks if x - eps < k < x + eps],
        )
        den = local / (2.0 * eps)
        if den <= 1e-12:
            ratio = 0.0 if num <= 1e-9 else math.inf
        else:
            ratio = num / den
        worst = max(worst, ratio)
    return worst
