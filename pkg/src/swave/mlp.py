"""Dense MLP with hand-written backpropagation and momentum SGD.

Everything is float64 numpy; no autograd, no framework.  The loss is plain
mean squared error.  The same model doubles as the grid-sweep learner and
as the client model of the statistical-query training loop, which needs
per-example gradients (one VSTAT query per gradient coordinate).

Checkpoint format (swave-mlp, version 1): JSON with fields format, version,
activation, layers (list of {"W": row-major nested lists with shape
(fan_in, fan_out), "b": list}).
"""
from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from .errors import InvalidParameterError
from .seeding import derive_seed

_ACTIVATIONS = ("relu", "sigmoid")


@dataclass(frozen=True)
class MLPSpec:
    layer_sizes: Tuple[int, ...]
    hidden_activation: str = "relu"

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.layer_sizes)
        object.__setattr__(self, "layer_sizes", sizes)
        if len(sizes) < 3:
            raise InvalidParameterError("need at least one hidden layer")
        if any(s < 1 for s in sizes):
            raise InvalidParameterError("layer sizes must be positive")
        if sizes[-1] != 1:
            raise InvalidParameterError("output layer must have size 1")
        if self.hidden_activation not in _ACTIVATIONS:
            raise InvalidParameterError(
                f"hidden_activation must be one of {_ACTIVATIONS}"
            )

    @property
    def param_count(self) -> int:
        return sum(a * b + b for a, b in zip(self.layer_sizes[:-1], self.layer_sizes[1:]))


@dataclass
class Params:
    weights: List[np.ndarray]  # each (fan_in, fan_out)
    biases: List[np.ndarray]
    activation: str

    def copy(self) -> "Params":
        return Params([w.copy() for w in self.weights],
                      [b.copy() for b in self.biases], self.activation)

    @property
    def count(self) -> int:
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))


def init_params(spec: MLPSpec, seed: int) -> Params:
    """Fan-in scaled Gaussian weights, zero biases.

    std = sqrt(2/fan_in) for relu hidden layers, sqrt(1/fan_in) for sigmoid;
    the affine output layer always uses sqrt(1/fan_in).
    """
    rng = np.random.default_rng(seed)
    weights = []
    biases = []
    last = len(spec.layer_sizes) - 2
    for i, (fan_in, fan_out) in enumerate(zip(spec.layer_sizes[:-1], spec.layer_sizes[1:])):
        if i < last and spec.hidden_activation == "relu":
            std = math.sqrt(2.0 / fan_in)
        elif i < last:
            std = math.sqrt(1.0 / fan_in)
        else:
            std = math.sqrt(1.0 / fan_in)
        weights.append(rng.normal(0.0, std, (fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return Params(weights, biases, spec.hidden_activation)


def _act(activation: str, z: np.ndarray) -> np.ndarray:
    if activation == "relu":
        return np.maximum(0.0, z)
    out = np.empty_like(z)
    pos = z >= 0
    neg = ~pos
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[neg])
    out[neg] = ez / (1.0 + ez)
    return out


def _act_grad(activation: str, z: np.ndarray, a: np.ndarray) -> np.ndarray:
    if activation == "relu":
        # subgradient at the kink taken as 0
        return (z > 0.0).astype(np.float64)
    return a * (1.0 - a)


def _forward_cached(params: Params, X: np.ndarray):
    acts = [X]
    pres = []
    h = X
    depth = len(params.weights)
    for i, (w, b) in enumerate(zip(params.weights, params.biases)):
        z = h @ w + b
        pres.append(z)
        h = z if i == depth - 1 else _act(params.activation, z)
        acts.append(h)
    return h[:, 0], acts, pres


def forward(params: Params, X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    squeeze = X.ndim == 1
    if squeeze:
        X = X[None, :]
    if X.shape[1] != params.weights[0].shape[0]:
        raise InvalidParameterError(
            f"expected inputs with {params.weights[0].shape[0]} features, got {X.shape}"
        )
    pred, _, _ = _forward_cached(params, X)
    return pred[0] if squeeze else pred


def mse(params: Params, X, y) -> float:
    pred = forward(params, np.asarray(X, dtype=np.float64))
    return float(np.mean((pred - np.asarray(y, dtype=np.float64)) ** 2))


def backward(params: Params, X, y):
    """Exact gradients of mean((pred - y)^2) over the batch."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or y.shape != (X.shape[0],):
        raise InvalidParameterError("backward expects X (B, n) and labels (B,)")
    pred, acts, pres = _forward_cached(params, X)
    B = X.shape[0]
    delta = (2.0 / B) * (pred - y)[:, None]
    grads_w = [None] * len(params.weights)
    grads_b = [None] * len(params.weights)
    for i in range(len(params.weights) - 1, -1, -1):
        grads_w[i] = acts[i].T @ delta
        grads_b[i] = np.sum(delta, axis=0)
        if i > 0:
            delta = (delta @ params.weights[i].T) * _act_grad(
                params.activation, pres[i - 1], acts[i]
            )
    return list(zip(grads_w, grads_b))


def per_example_grads(params: Params, X, y) -> np.ndarray:
    """Rows are full gradients of (pred_i - y_i)^2, flattened layer by layer.

    The batch gradient equals the row mean, so this is the query surface the
    statistical-query trainer exposes coordinate by coordinate.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    pred, acts, pres = _forward_cached(params, X)
    B = X.shape[0]
    out = np.empty((B, params.count))
    delta = 2.0 * (pred - y)[:, None]
    pieces_w = [None] * len(params.weights)
    pieces_b = [None] * len(params.weights)
    for i in range(len(params.weights) - 1, -1, -1):
        pieces_w[i] = acts[i][:, :, None] * delta[:, None, :]
        pieces_b[i] = delta
        if i > 0:
            delta = (delta @ params.weights[i].T) * _act_grad(
                params.activation, pres[i - 1], acts[i]
            )
    col = 0
    for i in range(len(params.weights)):
        wsize = params.weights[i].size
        out[:, col:col + wsize] = pieces_w[i].reshape(B, wsize)
        col += wsize
        bsize = params.biases[i].size
        out[:, col:col + bsize] = pieces_b[i]
        col += bsize
    return out


def flatten_params(params: Params) -> np.ndarray:
    parts = []
    for w, b in zip(params.weights, params.biases):
        parts.append(w.ravel())
        parts.append(b.ravel())
    return np.concatenate(parts)


def set_flat(params: Params, vec: np.ndarray) -> None:
    col = 0
    for i in range(len(params.weights)):
        w = params.weights[i]
        params.weights[i] = vec[col:col + w.size].reshape(w.shape).copy()
        col += w.size
        b = params.biases[i]
        params.biases[i] = vec[col:col + b.size].copy()
        col += b.size
    if col != vec.size:
        raise InvalidParameterError("flat vector size does not match parameter count")


@dataclass(frozen=True)
class TrainConfig:
    lr: float
    momentum: float = 0.9
    batch_size: int = 128
    epochs: int = 30
    seed: int = 0
    weight_decay: float = 0.0
    patience: int = 5
    divergence_threshold: float = 1e6

    def __post_init__(self):
        if not (self.lr >= 0):
            raise InvalidParameterError("lr must be >= 0")
        if not (0.0 <= self.momentum < 1.0):
            raise InvalidParameterError("momentum must be in [0, 1)")
        if self.batch_size < 1:
            raise InvalidParameterError("batch_size must be >= 1")

    def describe(self) -> dict:
        return {
            "lr": self.lr, "momentum": self.momentum, "batch_size": self.batch_size,
            "epochs": self.epochs, "seed": self.seed, "weight_decay": self.weight_decay,
            "patience": self.patience,
        }


@dataclass(frozen=True)
class TrainData:
    train_x: np.ndarray
    train_y: np.ndarray
    test_x: np.ndarray
    test_y: np.ndarray

    def __post_init__(self):
        for name in ("train_x", "train_y", "test_x", "test_y"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=np.float64))
        if self.train_x.shape[0] != self.train_y.shape[0]:
            raise InvalidParameterError("train inputs and labels disagree on count")
        if self.test_x.shape[0] != self.test_y.shape[0]:
            raise InvalidParameterError("test inputs and labels disagree on count")


@dataclass
class TrainReport:
    epoch_train_mse: List[float]
    final_test_mse: float
    baseline_mse: float
    wall_time: float
    config: dict
    diverged: bool = False
    epochs_run: int = 0


def sgd_train(params: Params, data: TrainData, cfg: TrainConfig) -> TrainReport:
    """Momentum SGD (v <- mu v - lr g, w <- w + v), deterministic per seed.

    Early-stops after cfg.patience epochs without train-MSE improvement; the
    test set is only touched once, for the final report.  Training mutates
    params in place.
    """
    if data.train_x.shape[0] < cfg.batch_size:
        raise InvalidParameterError("train count must be >= batch size")
    rng = np.random.default_rng(cfg.seed)
    vel = [(np.zeros_like(w), np.zeros_like(b))
           for w, b in zip(params.weights, params.biases)]
    start = time.perf_counter()
    history: List[float] = []
    diverged = False
    best = math.inf
    stale = 0
    n_train = data.train_x.shape[0]
    for _ in range(cfg.epochs):
        perm = rng.permutation(n_train)
        for lo in range(0, n_train, cfg.batch_size):
            sel = perm[lo:lo + cfg.batch_size]
            grads = backward(params, data.train_x[sel], data.train_y[sel])
            for i, (gw, gb) in enumerate(grads):
                if cfg.weight_decay:
                    gw = gw + cfg.weight_decay * params.weights[i]
                vw, vb = vel[i]
                vw *= cfg.momentum
                vw -= cfg.lr * gw
                vb *= cfg.momentum
                vb -= cfg.lr * gb
                params.weights[i] += vw
                params.biases[i] += vb
        epoch_mse = mse(params, data.train_x, data.train_y)
        history.append(epoch_mse)
        if not math.isfinite(epoch_mse) or epoch_mse > cfg.divergence_threshold:
            diverged = True
            break
        if epoch_mse < best - 1e-12:
            best = epoch_mse
            stale = 0
        else:
            stale += 1
            if stale >= cfg.patience:
                break
    test_mse = mse(params, data.test_x, data.test_y)
    if not math.isfinite(test_mse):
        test_mse = math.inf
    baseline = float(np.var(data.test_y, ddof=1)) if data.test_y.size > 1 else 0.0
    return TrainReport(
        epoch_train_mse=history,
        final_test_mse=float(test_mse),
        baseline_mse=baseline,
        wall_time=time.perf_counter() - start,
        config=cfg.describe(),
        diverged=diverged,
        epochs_run=len(history),
    )


def grad_check(spec: MLPSpec, seed: int, n_coords: int = 200, h: float = 1e-5) -> float:
    """Max relative error of backprop vs central finite differences.

    For relu nets, probe coordinates whose perturbed passes put any
    pre-activation within 10h of a kink are skipped: the loss is not
    differentiable there and finite differences measure nothing useful.
    """
    params = init_params(spec, seed)
    rng = np.random.default_rng(derive_seed(seed, "grad_check"))
    X = rng.standard_normal((16, spec.layer_sizes[0]))
    y = rng.uniform(-1.0, 1.0, 16)
    analytic_parts = []
    for gw, gb in backward(params, X, y):
        analytic_parts.append(gw.ravel())
        analytic_parts.append(gb.ravel())
    analytic = np.concatenate(analytic_parts)
    flat = flatten_params(params)
    total = flat.size
    coords = rng.choice(total, size=min(n_coords, total), replace=False)
    scratch = params.copy()

    def loss_and_margin(vec):
        set_flat(scratch, vec)
        pred, _, pres = _forward_cached(scratch, X)
        margin = math.inf
        if spec.hidden_activation == "relu":
            margin = min(float(np.min(np.abs(z))) for z in pres[:-1])
        return float(np.mean((pred - y) ** 2)), margin

    worst = 0.0
    for j in coords:
        bumped = flat.copy()
        bumped[j] += h
        lp, mp = loss_and_margin(bumped)
        bumped[j] -= 2 * h
        lm, mm = loss_and_margin(bumped)
        if min(mp, mm) < 10.0 * h:
            continue
        fd = (lp - lm) / (2 * h)
        rel = abs(analytic[j] - fd) / max(abs(analytic[j]), abs(fd), 1e-8)
        worst = max(worst, rel)
    return worst


_MLP_FORMAT = "swave-mlp"
_MLP_VERSION = 1


def save_params(params: Params, path) -> None:
    doc = {
        "format": _MLP_FORMAT,
        "version": _MLP_VERSION,
        "activation": params.activation,
        "layers": [{"W": w.tolist(), "b": b.tolist()}
                   for w, b in zip(params.weights, params.biases)],
    }
    with open(path, "w") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def load_params(path) -> Params:
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("format") != _MLP_FORMAT or doc.get("version") != _MLP_VERSION:
        raise InvalidParameterError(f"{path} is not a {_MLP_FORMAT} v{_MLP_VERSION} file")
    return Params(
        weights=[np.asarray(layer["W"], dtype=np.float64) for layer in doc["layers"]],
        biases=[np.asarray(layer["b"], dtype=np.float64) for layer in doc["layers"]],
        activation=doc["activation"],
    )
