"""Adaptive Simpson quadrature and a bisection root finder.

The integrands in this package are one-dimensional, cheap, and smooth except
for isolated kinks whose locations are known in advance (piecewise-linear
gates).  Known kinks are passed as explicit breakpoints so that every
sub-interval handed to the Simpson rule is smooth inside.
"""
from __future__ import annotations

import math
from typing import Callable, Iterable, Sequence

from .errors import InvalidParameterError, NumericFailureError

DEFAULT_TOL = 1e-8
MAX_INTERVALS = 20000


def _eval(f: Callable[[float], float], x: float) -> float:
    v = float(f(x))
    if not math.isfinite(v):
        raise NumericFailureError(f"integrand returned {v!r} at x={x!r}")
    return v


def _simpson_piece(f, a, fa, b, fb, tol, budget):
    """Adaptive Simpson on one smooth piece.

    budget is a single-element list shared across pieces; each subdivision
    spends one unit.  Uses the standard |S_half - S_whole| <= 15 tol accept
    test, with a floor on interval width so a tolerance that outruns double
    precision degrades into machine-accurate acceptance instead of looping.
    """
    m = 0.5 * (a + b)
    fm = _eval(f, m)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    total = 0.0
    stack = [(a, fa, m, fm, b, fb, whole, tol)]
    while stack:
        a0, fa0, m0, fm0, b0, fb0, s0, t0 = stack.pop()
        lm = 0.5 * (a0 + m0)
        rm = 0.5 * (m0 + b0)
        flm = _eval(f, lm)
        frm = _eval(f, rm)
        left = (m0 - a0) / 6.0 * (fa0 + 4.0 * flm + fm0)
        right = (b0 - m0) / 6.0 * (fm0 + 4.0 * frm + fb0)
        delta = left + right - s0
        width_floor = (b0 - a0) <= 1e-13 * (1.0 + abs(a0) + abs(b0))
        if abs(delta) <= 15.0 * t0 or width_floor:
            total += left + right + delta / 15.0
            continue
        budget[0] -= 1
        if budget[0] < 0:
            raise NumericFailureError(
                f"quadrature did not converge within {MAX_INTERVALS} subdivisions"
            )
        half_t = 0.5 * t0
        stack.append((a0, fa0, lm, flm, m0, fm0, left, half_t))
        stack.append((m0, fm0, rm, frm, b0, fb0, right, half_t))
    return total


def adaptive_simpson(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float = DEFAULT_TOL,
    breakpoints: Iterable[float] = (),
    max_intervals: int = MAX_INTERVALS,
) -> float:
    """Integrate f over [a, b] to absolute tolerance tol.

    breakpoints: interior kink locations; the interval is split there so each
    piece is smooth.  Points outside (a, b) are ignored.  Raises
    NumericFailureError when the subdivision cap is exhausted or the
    integrand produces a non-finite value.
    """
    if not (math.isfinite(a) and math.isfinite(b)):
        raise InvalidParameterError("integration endpoints must be finite")
    if a == b:
        return 0.0
    if a > b:
        raise InvalidParameterError(f"need a <= b, got a={a!r} b={b!r}")
    if tol <= 0:
        raise InvalidParameterError("tol must be positive")
    cuts = sorted({float(x) for x in breakpoints if a < x < b})
    edges = [a, *cuts, b]
    span = b - a
    budget = [max_intervals]
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        piece_tol = max(tol * (hi - lo) / span, 1e-300)
        total += _simpson_piece(f, lo, _eval(f, lo), hi, _eval(f, hi), piece_tol, budget)
    return total


def bisect_root(
    g: Callable[[float], float],
    lo: float,
    hi: float,
    xtol: float = 1e-12,
    max_iter: int = 200,
) -> float:
    """Root of g on [lo, hi] by bisection; g must change sign across it."""
    glo = _eval(g, lo)
    ghi = _eval(g, hi)
    if glo == 0.0:
        return lo
    if ghi == 0.0:
        return hi
    if (glo > 0) == (ghi > 0):
        raise InvalidParameterError(
            f"no sign change on [{lo!r}, {hi!r}]: g(lo)={glo!r} g(hi)={ghi!r}"
        )
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if hi - lo <= xtol * (1.0 + abs(mid)):
            return mid
        gm = _eval(g, mid)
        if gm == 0.0:
            return mid
        if (gm > 0) == (glo > 0):
            lo, glo = mid, gm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def grid_with_points(a: float, b: float, count: int, extra: Sequence[float] = ()) -> list:
    """Sorted evaluation grid over [a, b]: uniform count points plus extras."""
    if count < 2:
        raise InvalidParameterError("grid needs at least 2 points")
    step = (b - a) / (count - 1)
    pts = {a + i * step for i in range(count)}
    pts.update(float(x) for x in extra if a <= x <= b)
    return sorted(pts)
