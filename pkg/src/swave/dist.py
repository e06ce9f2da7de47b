"""Input distributions, dataset generation, and dataset file formats.

All samplers are driven by numpy Generators seeded explicitly; a dataset is
bit-for-bit reproducible from the (seed, dist, count) triple recorded in its
meta sidecar.

File formats
------------
CSV: header ``x1,...,xn,y``, one row per sample, floats printed with %.17g so
a text round trip is exact.

Binary: little-endian throughout.
  bytes 0-3   magic b"SWDS"
  bytes 4-7   uint32 format version (currently 1)
  bytes 8-11  uint32 n (input dimension)
  bytes 12-19 uint64 count (rows)
  then count rows of (n + 1) float64: the inputs followed by the label.

Either writer also emits a JSON sidecar at ``<path>.json`` holding the meta
dict (generator config, seed, rounding) needed to regenerate the file.
"""
from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .errors import InvalidParameterError

_FAMILIES = ("gaussian", "laplace", "uniform")
_MAGIC = b"SWDS"
_VERSION = 1


@dataclass(frozen=True)
class InputDist1D:
    """A symmetric logconcave law on the line, optionally unit-variance."""

    family: str
    unit_variance: bool = True

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise InvalidParameterError(
                f"unknown family {self.family!r}, expected one of {_FAMILIES}"
            )

    def std(self) -> float:
        if self.unit_variance:
            return 1.0
        if self.family == "gaussian":
            return 1.0
        if self.family == "laplace":
            return math.sqrt(2.0)
        return 1.0 / math.sqrt(3.0)

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        if self.family == "gaussian":
            return rng.standard_normal(size)
        if self.family == "laplace":
            b = 1.0 / math.sqrt(2.0) if self.unit_variance else 1.0
            return rng.laplace(0.0, b, size)
        a = math.sqrt(3.0) if self.unit_variance else 1.0
        return rng.uniform(-a, a, size)

    def describe(self) -> dict:
        return {"family": self.family, "unit_variance": self.unit_variance}


@dataclass(frozen=True)
class ProductDist:
    """n iid copies of a 1D law."""

    base: InputDist1D
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise InvalidParameterError("dimension n must be >= 1")

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        return self.base.sample(rng, (count, self.n))

    def describe(self) -> dict:
        return {"kind": "product", "n": self.n, "base": self.base.describe()}


@dataclass(frozen=True)
class L1BallDist:
    """Uniform law on the l1 ball of the given radius (default n)."""

    n: int
    radius: Optional[float] = None

    def __post_init__(self):
        if self.n < 1:
            raise InvalidParameterError("dimension n must be >= 1")
        if self.radius is not None and not self.radius > 0:
            raise InvalidParameterError("radius must be positive")

    @property
    def effective_radius(self) -> float:
        return float(self.n) if self.radius is None else float(self.radius)

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        # simplex point from normalized exponentials, random signs, then a
        # radial factor U^(1/n) for uniformity in the ball
        g = rng.standard_exponential((count, self.n))
        signs = rng.integers(0, 2, (count, self.n)) * 2.0 - 1.0
        y = signs * g / np.sum(g, axis=1, keepdims=True)
        u = rng.random(count) ** (1.0 / self.n)
        return self.effective_radius * u[:, None] * y

    def describe(self) -> dict:
        return {"kind": "l1ball", "n": self.n, "radius": self.effective_radius}


InputDistN = Union[ProductDist, L1BallDist]


def sample_input(dist: InputDistN, count: int, seed: int) -> np.ndarray:
    """Draw count rows from dist; deterministic in (dist, count, seed)."""
    if count < 1:
        raise InvalidParameterError("count must be >= 1")
    rng = np.random.default_rng(seed)
    return dist.sample(rng, count)


def round_labels(labels: np.ndarray, levels: int) -> np.ndarray:
    """Snap labels to the uniform grid of `levels` points on [-1, 1].

    Rounds half to even, matching the bias-free convention used everywhere
    else in the package.
    """
    if levels < 2:
        raise InvalidParameterError("need at least 2 label levels")
    pitch = 2.0 / (levels - 1)
    idx = np.clip(np.rint((np.asarray(labels) + 1.0) / pitch), 0, levels - 1)
    return -1.0 + idx * pitch


@dataclass
class LabeledSampleSet:
    inputs: np.ndarray
    labels: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.inputs = np.asarray(self.inputs, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.float64)
        if self.inputs.ndim != 2 or self.labels.ndim != 1:
            raise InvalidParameterError("inputs must be (count, n), labels (count,)")
        if self.inputs.shape[0] != self.labels.shape[0]:
            raise InvalidParameterError("inputs and labels disagree on count")

    @property
    def count(self) -> int:
        return self.inputs.shape[0]

    @property
    def n(self) -> int:
        return self.inputs.shape[1]


def make_dataset(f, dist: InputDistN, count: int, seed: int,
                 rounding: Optional[int] = None) -> LabeledSampleSet:
    """Labeled dataset for a target f over dist.

    f must expose eval_batch(X) and describe(); rounding, when given, snaps
    labels to a `rounding`-level grid on [-1, 1].
    """
    X = sample_input(dist, count, seed)
    y = np.asarray(f.eval_batch(X), dtype=np.float64)
    if rounding is not None:
        y = round_labels(y, rounding)
    meta = {
        "format_version": _VERSION,
        "count": int(count),
        "n": int(X.shape[1]),
        "seed": int(seed),
        "dist": dist.describe(),
        "function": f.describe(),
        "rounding": None if rounding is None else int(rounding),
    }
    return LabeledSampleSet(X, y, meta)


def label_stats(ds: LabeledSampleSet) -> tuple:
    """(mean, unbiased variance) of the labels.

    The variance doubles as the constant-predictor MSE baseline.
    """
    if ds.count < 2:
        raise InvalidParameterError("need at least 2 samples for label stats")
    y = ds.labels
    return float(np.mean(y)), float(np.var(y, ddof=1))


def _write_sidecar(path: Path, meta: dict) -> None:
    with open(str(path) + ".json", "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _read_sidecar(path: Path) -> dict:
    side = Path(str(path) + ".json")
    if side.exists():
        with open(side) as fh:
            return json.load(fh)
    return {}


def save_csv(ds: LabeledSampleSet, path) -> None:
    path = Path(path)
    header = ",".join([f"x{i + 1}" for i in range(ds.n)] + ["y"])
    table = np.hstack([ds.inputs, ds.labels[:, None]])
    np.savetxt(path, table, fmt="%.17g", delimiter=",", header=header, comments="")
    _write_sidecar(path, ds.meta)


def load_csv(path) -> LabeledSampleSet:
    path = Path(path)
    table = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return LabeledSampleSet(table[:, :-1], table[:, -1], _read_sidecar(path))


def save_binary(ds: LabeledSampleSet, path) -> None:
    path = Path(path)
    header = struct.pack("<4sIIQ", _MAGIC, _VERSION, ds.n, ds.count)
    table = np.ascontiguousarray(np.hstack([ds.inputs, ds.labels[:, None]]), dtype="<f8")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(table.tobytes(order="C"))
    _write_sidecar(path, ds.meta)


def load_binary(path) -> LabeledSampleSet:
    path = Path(path)
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < 20 or raw[:4] != _MAGIC:
        raise InvalidParameterError(f"{path} is not a SWDS dataset")
    _, version, n, count = struct.unpack("<4sIIQ", raw[:20])
    if version != _VERSION:
        raise InvalidParameterError(f"unsupported dataset version {version}")
    expect = 20 + count * (n + 1) * 8
    if len(raw) != expect:
        raise InvalidParameterError(f"{path}: expected {expect} bytes, found {len(raw)}")
    table = np.frombuffer(raw, dtype="<f8", offset=20).reshape(count, n + 1).copy()
    return LabeledSampleSet(table[:, :-1], table[:, -1], _read_sidecar(path))
