"""Subset families, hard target functions, and their explicit networks.

A hard function is f(x) = wave(sum_{i in S} x_i) for a subset S of the
coordinates with |S| = floor(n/2).  Families keep every pairwise overlap
|S intersect T| below (1/2 - c) n, which is what makes the functions nearly
uncorrelated over product distributions.

Every hard function has an exact one-hidden-layer representation: each
lattice shift k contributes one hidden unit per bump term, with weight row
sign * 1_S and bias shift - sign * k * theta.  The hidden weight matrix is
rank one (rows are +-1_S) until perturbed.

Network export format (swave-net, version 1): a JSON document with fields,
in order: format, version, n, hidden_count, activation {variant, sharpness},
output_scale, output_bias, hidden_weights (row-major nested lists),
hidden_biases, output_weights, drift (null until perturbed).  Floats
round-trip exactly through repr.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional, Tuple

import numpy as np

from .activation import ActivationKind
from .errors import InvalidParameterError, ResourceLimitError
from .wave import WaveSpec, eval_wave_batch

_REJECTION_BUDGET_PER_SET = 10_000


@dataclass(frozen=True)
class SubsetFamily:
    n: int
    c: float
    sets: Tuple[int, ...]

    def __post_init__(self):
        if not (0.0 < self.c < 0.5):
            raise InvalidParameterError(f"overlap margin c must be in (0, 1/2), got {self.c!r}")

    def check_pairs(self) -> None:
        """Exhaustive pairwise overlap verification; raises on violation."""
        limit = (0.5 - self.c) * self.n
        size = self.n // 2
        for i, s in enumerate(self.sets):
            if bin(s).count("1") != size:
                raise InvalidParameterError(f"set {i} has size {bin(s).count('1')} != {size}")
            for j in range(i):
                overlap = bin(s & self.sets[j]).count("1")
                if not overlap < limit:
                    raise InvalidParameterError(
                        f"sets {j},{i} overlap {overlap} >= {limit}"
                    )


def subset_indices(mask: int) -> np.ndarray:
    return np.asarray([i for i in range(mask.bit_length()) if (mask >> i) & 1],
                      dtype=np.int64)


def build_subset_family(n: int, count: int, c: float = 0.1, seed: int = 0) -> SubsetFamily:
    """Rejection-sample count subsets of size floor(n/2) with bounded overlaps.

    Draws uniform subsets and keeps one when it meets the pairwise bound
    against everything kept so far.  Budget: count * 1e4 draws total.
    """
    if n < 4:
        raise InvalidParameterError("n must be >= 4")
    if count < 1:
        raise InvalidParameterError("count must be >= 1")
    if not (0.0 < c < 0.5):
        raise InvalidParameterError(f"overlap margin c must be in (0, 1/2), got {c!r}")
    rng = np.random.default_rng(seed)
    size = n // 2
    limit = (0.5 - c) * n
    kept: list = []
    budget = count * _REJECTION_BUDGET_PER_SET
    for _ in range(budget):
        if len(kept) == count:
            break
        idx = rng.choice(n, size=size, replace=False)
        mask = 0
        for i in idx:
            mask |= 1 << int(i)
        if all(bin(mask & other).count("1") < limit for other in kept):
            kept.append(mask)
    if len(kept) < count:
        raise ResourceLimitError(
            f"rejection budget {budget} exhausted: kept {len(kept)} of {count} "
            f"sets (n={n}, c={c})"
        )
    fam = SubsetFamily(n=n, c=c, sets=tuple(kept))
    fam.check_pairs()
    return fam


@dataclass(frozen=True)
class HardFunction:
    wave: WaveSpec
    subset: int
    n: int

    def __post_init__(self):
        if self.subset <= 0 or self.subset.bit_length() > self.n:
            raise InvalidParameterError("subset mask must be nonzero and fit in n bits")

    def eval_batch(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.n:
            raise InvalidParameterError(
                f"expected inputs of shape (count, {self.n}), got {X.shape}"
            )
        z = np.sum(X[:, subset_indices(self.subset)], axis=1)
        return eval_wave_batch(self.wave, z)

    def describe(self) -> dict:
        d = self.wave.describe()
        d.update({"n": self.n, "subset": hex(self.subset)})
        return d


def eval_hard(f: HardFunction, x) -> float:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (f.n,):
        raise InvalidParameterError(f"expected input of shape ({f.n},), got {x.shape}")
    return float(f.eval_batch(x[None, :])[0])


def eval_hard_batch(f: HardFunction, X) -> np.ndarray:
    return f.eval_batch(X)


@dataclass(frozen=True)
class NetworkRep:
    hidden_weights: np.ndarray
    hidden_biases: np.ndarray
    output_weights: np.ndarray
    output_bias: float
    activation: ActivationKind
    output_scale: float
    drift: Optional[float] = None

    @property
    def n(self) -> int:
        return self.hidden_weights.shape[1]

    @property
    def hidden_count(self) -> int:
        return self.hidden_weights.shape[0]


def to_network(f: HardFunction) -> NetworkRep:
    """Exact hidden-layer expansion of a hard function.

    One unit per (lattice shift k, bump term): 2(2m+1) units for the
    two-term bumps, 4(2m+1) for the four-term ones.  The output bias
    absorbs the per-shift constant offset and the emission offset.
    """
    w = f.wave
    psi = w.psi
    idx = subset_indices(f.subset)
    rows = []
    biases = []
    out_w = []
    for k in range(-w.m, w.m + 1):
        for coeff, sign, shift in psi.terms:
            row = np.zeros(f.n)
            row[idx] = sign
            rows.append(row)
            biases.append(shift - sign * k * w.theta)
            out_w.append(coeff)
    return NetworkRep(
        hidden_weights=np.asarray(rows),
        hidden_biases=np.asarray(biases),
        output_weights=np.asarray(out_w),
        output_bias=w.scale * (2 * w.m + 1) * psi.constant_offset + w.offset,
        activation=psi.kind,
        output_scale=w.scale,
    )


def network_forward(net: NetworkRep, x) -> float:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (net.n,):
        raise InvalidParameterError(f"expected input of shape ({net.n},), got {x.shape}")
    return float(network_forward_batch(net, x[None, :])[0])


def network_forward_batch(net: NetworkRep, X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != net.n:
        raise InvalidParameterError(
            f"expected inputs of shape (count, {net.n}), got {X.shape}"
        )
    pre = X @ net.hidden_weights.T + net.hidden_biases
    act = net.activation.gate(pre)
    return net.output_scale * (act @ net.output_weights) + net.output_bias


def condition_number(W) -> float:
    """Ratio of extreme singular values; +inf when effectively rank-deficient."""
    W = np.asarray(W, dtype=np.float64)
    if W.ndim != 2:
        raise InvalidParameterError("condition_number expects a matrix")
    if not np.any(W):
        raise InvalidParameterError("zero matrix has no condition number")
    svals = np.linalg.svd(W, compute_uv=False)
    smax = float(svals[0])
    smin = float(svals[-1])
    if smin < 1e-13 * smax:
        return math.inf
    return smax / smin


def perturb_network(net: NetworkRep, delta: float, seed: int,
                    probe_count: int = 256) -> NetworkRep:
    """Add N(0, delta) noise to every hidden weight; record output drift.

    Drift is the max |forward difference| over a Gaussian probe set drawn
    after the noise from the same stream, so the whole perturbation is
    deterministic in (net, delta, seed).
    """
    if not (delta > 0):
        raise InvalidParameterError("delta must be positive")
    rng = np.random.default_rng(seed)
    noise = rng.normal(0.0, math.sqrt(delta), net.hidden_weights.shape)
    bumped = replace(net, hidden_weights=net.hidden_weights + noise)
    probes = rng.standard_normal((probe_count, net.n))
    drift = float(np.max(np.abs(
        network_forward_batch(bumped, probes) - network_forward_batch(net, probes)
    )))
    return replace(bumped, drift=drift)


_NET_FORMAT = "swave-net"
_NET_VERSION = 1


def save_network(net: NetworkRep, path) -> None:
    doc = {
        "format": _NET_FORMAT,
        "version": _NET_VERSION,
        "n": net.n,
        "hidden_count": net.hidden_count,
        "activation": {"variant": net.activation.variant,
                       "sharpness": net.activation.sharpness},
        "output_scale": net.output_scale,
        "output_bias": net.output_bias,
        "hidden_weights": net.hidden_weights.tolist(),
        "hidden_biases": net.hidden_biases.tolist(),
        "output_weights": net.output_weights.tolist(),
        "drift": net.drift,
    }
    with open(path, "w") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def load_network(path) -> NetworkRep:
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("format") != _NET_FORMAT or doc.get("version") != _NET_VERSION:
        raise InvalidParameterError(f"{Path(path)} is not a {_NET_FORMAT} v{_NET_VERSION} file")
    return NetworkRep(
        hidden_weights=np.asarray(doc["hidden_weights"], dtype=np.float64),
        hidden_biases=np.asarray(doc["hidden_biases"], dtype=np.float64),
        output_weights=np.asarray(doc["output_weights"], dtype=np.float64),
        output_bias=float(doc["output_bias"]),
        activation=ActivationKind(doc["activation"]["variant"],
                                  doc["activation"]["sharpness"]),
        output_scale=float(doc["output_scale"]),
        drift=doc.get("drift"),
    )
