"""Statistical-query oracles and the SQ-mediated SGD trainer.

A VSTAT(t) oracle answers a [0,1]-valued query with expectation p by any v
satisfying |p - v| <= max{1/t, sqrt(p(1-p)/t)}.  Two response strategies:

empirical  the mean of the query over t fresh labeled examples, i.e. what
           minibatch SGD actually sees;
decoy      an adversarial but valid answer: the label-independent
           expectation (labels redrawn from the marginal, independent of x)
           clamped into the tolerance band around a high-precision estimate
           of p.  Every bit of label information the clamp does not force is
           withheld.

The trainer fetches each gradient coordinate as its own scalar query,
normalized to [0,1] via (clip(g, -B, B) + B) / (2B).
"""
from __future__ import annotations

import json
import math
import threading
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

from . import mlp
from .dist import InputDistN, round_labels, sample_input
from .errors import InvalidParameterError, NumericFailureError, QueryBudgetError
from .seeding import derive_seed


def tolerance(p: float, t: int) -> float:
    if not (0.0 <= p <= 1.0):
        raise InvalidParameterError(f"p must be in [0,1], got {p!r}")
    if t < 1:
        raise InvalidParameterError(f"t must be >= 1, got {t!r}")
    return max(1.0 / t, math.sqrt(p * (1.0 - p) / t))


@dataclass(frozen=True)
class SoftIndicator:
    y: float
    eps: float

    def __post_init__(self):
        if not (self.eps > 0):
            raise InvalidParameterError("eps must be positive")


def soft_indicator_eval(chi: SoftIndicator, x):
    """Triangular kernel max{0, 1/eps - (1/eps)^2 |x - y|}; unit L1 mass."""
    x = np.asarray(x, dtype=np.float64)
    inv = 1.0 / chi.eps
    return np.maximum(0.0, inv - inv * inv * np.abs(x - chi.y))


@dataclass
class QuerySpec:
    """A [0,1]-valued query of a labeled example, vectorized over batches.

    evaluator(X, y) -> values; out-of-range values are clamped and counted
    in `violations` rather than raised, so misbehaving queries stay visible
    without aborting a run.  lipschitz_y is metadata: the Lipschitz constant
    of the query in the label at fixed input.
    """

    evaluator: Callable[[np.ndarray, np.ndarray], np.ndarray]
    lipschitz_y: float = math.nan
    name: str = "query"
    violations: int = 0

    def evaluate(self, X, y) -> np.ndarray:
        vals = np.asarray(self.evaluator(X, y), dtype=np.float64)
        bad = int(np.count_nonzero((vals < 0.0) | (vals > 1.0)))
        if bad:
            self.violations += bad
            vals = np.clip(vals, 0.0, 1.0)
        return vals


@dataclass(frozen=True)
class HardExampleSource:
    """Labeled-example distribution (x, f(x)) for a hard target."""

    f: object  # anything with eval_batch / describe
    dist: InputDistN
    rounding: Optional[int] = None

    def draw(self, rng: np.random.Generator, count: int):
        X = self.dist.sample(rng, count)
        y = np.asarray(self.f.eval_batch(X), dtype=np.float64)
        if self.rounding is not None:
            y = round_labels(y, self.rounding)
        return X, y

    def draw_inputs(self, rng: np.random.Generator, count: int) -> np.ndarray:
        return self.dist.sample(rng, count)

    def label_marginal(self, rng: np.random.Generator, count: int) -> np.ndarray:
        # labels of an independent draw: the marginal with no x-coupling
        _, y = self.draw(rng, count)
        return y

    def describe(self) -> dict:
        return {"function": self.f.describe(), "dist": self.dist.describe(),
                "rounding": self.rounding}


class JsonlTranscript:
    """Streams oracle transcript records to a JSON-lines file."""

    def __init__(self, path):
        self._fh = open(path, "w")

    def record(self, entry: dict) -> None:
        self._fh.write(json.dumps(entry))
        self._fh.write("\n")

    def close(self) -> None:
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


@dataclass
class OracleConfig:
    t: int
    mode: str  # "empirical" | "decoy"
    decoy_reference: Optional[Callable[[np.random.Generator, int], np.ndarray]] = None
    query_budget: Optional[int] = None
    queries_used: int = 0
    transcript: Optional[object] = None  # anything with .record(dict)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def __post_init__(self):
        if self.t < 1:
            raise InvalidParameterError("t must be >= 1")
        if self.mode not in ("empirical", "decoy"):
            raise InvalidParameterError(f"unknown oracle mode {self.mode!r}")


def vstat_answer(oracle: OracleConfig, q: QuerySpec, truth, seed: int) -> float:
    """One VSTAT(t) answer for query q against the true example distribution.

    Empirical mode averages q over t fresh samples.  Decoy mode estimates p
    at 10t samples, computes the label-independent expectation v* over
    another 10t inputs with labels drawn from the decoy reference (default:
    the truth's own label marginal), and returns v* clamped into the
    tolerance band around the p estimate; the band membership is re-checked
    on every call.
    """
    with oracle._lock:
        if oracle.query_budget is not None and oracle.queries_used >= oracle.query_budget:
            raise QueryBudgetError(
                f"query budget {oracle.query_budget} exhausted"
            )
        oracle.queries_used += 1
        qid = oracle.queries_used
    rng = np.random.default_rng(seed)
    if oracle.mode == "empirical":
        X, y = truth.draw(rng, oracle.t)
        v = float(np.mean(q.evaluate(X, y)))
        p_est = v
        tol = tolerance(p_est, oracle.t)
    else:
        X1, y1 = truth.draw(rng, 10 * oracle.t)
        p_est = float(np.mean(q.evaluate(X1, y1)))
        # inputs only; labels of this draw never enter the answer
        if hasattr(truth, "draw_inputs"):
            X2 = truth.draw_inputs(rng, 10 * oracle.t)
        else:
            X2, _ = truth.draw(rng, 10 * oracle.t)
        ref = oracle.decoy_reference
        y_dec = ref(rng, 10 * oracle.t) if ref is not None else truth.label_marginal(
            rng, 10 * oracle.t)
        v_star = float(np.mean(q.evaluate(X2, y_dec)))
        tol = tolerance(p_est, oracle.t)
        v = min(max(v_star, p_est - tol), p_est + tol)
        if abs(v - p_est) > tol + 1e-12:
            raise NumericFailureError(
                f"decoy answer left the tolerance band: |{v} - {p_est}| > {tol}"
            )
    if oracle.transcript is not None:
        with oracle._lock:
            oracle.transcript.record({
                "query": qid, "mode": oracle.mode, "t": oracle.t,
                "p_est": p_est, "v": v, "tolerance": tol, "name": q.name,
            })
    return v


def indicator_decomposition_defect(q: QuerySpec, f, dist: InputDistN, eps: float,
                                   n_mc: int, seed: int):
    """How far E q(x, f(x)) sits from its soft-indicator decomposition.

    Monte Carlo estimate of |E q(x, f(x)) - integral of E(q(x,y) chi_y(f(x)))
    over y|, the y-integral discretized on a grid of pitch eps/8 spanning the
    observed label range padded by eps.  Returns (defect, bound, std_error)
    with bound = (5/3) * lipschitz_y * eps.
    """
    if not (eps > 0):
        raise InvalidParameterError("eps must be positive")
    if not math.isfinite(q.lipschitz_y):
        raise InvalidParameterError("query needs a finite lipschitz_y")
    X = sample_input(dist, n_mc, seed)
    labels = np.asarray(f.eval_batch(X), dtype=np.float64)
    term_direct = q.evaluate(X, labels)
    pitch = eps / 8.0
    lo = float(np.min(labels)) - eps
    hi = float(np.max(labels)) + eps
    count = int(math.ceil((hi - lo) / pitch)) + 1
    inv = 1.0 / eps
    term_grid = np.zeros(n_mc)
    for j in range(count):
        yj = lo + j * pitch
        w = np.maximum(0.0, inv - inv * inv * np.abs(labels - yj))
        if not np.any(w):
            continue
        term_grid += q.evaluate(X, np.full(n_mc, yj)) * w * pitch
    diff = term_direct - term_grid
    defect = abs(float(np.mean(diff)))
    std_error = float(np.std(diff, ddof=1)) / math.sqrt(n_mc)
    bound = (5.0 / 3.0) * q.lipschitz_y * eps
    return defect, bound, std_error


@dataclass
class SQTrainReport:
    steps_done: int
    queries_used: int
    truncated: bool
    train_mse: float
    test_mse: float
    baseline_mse: float
    config: dict


def sq_sgd_train(spec: mlp.MLPSpec, params: mlp.Params, oracle: OracleConfig,
                 truth, grad_bound: float, steps: int, lr: float, seed: int,
                 eval_count: int = 2000) -> SQTrainReport:
    """Train by fetching every gradient coordinate through the oracle.

    Per step, coordinate j of the batch gradient is obtained as a VSTAT
    answer to the normalized query (clip(g_j, -B, B) + B) / (2B) over fresh
    examples, then de-normalized and applied as a plain gradient step.
    Query count is exactly steps * parameter count unless the budget runs
    out, in which case the report comes back flagged truncated.  Final train
    and test MSE are measured on fresh held-out draws.
    """
    if not (grad_bound > 0):
        raise InvalidParameterError("grad_bound must be positive")
    if steps < 0 or lr < 0:
        raise InvalidParameterError("steps and lr must be nonnegative")
    pcount = params.count
    B = grad_bound
    truncated = False
    step = 0
    for step in range(1, steps + 1):
        grad = np.empty(pcount)

        def coord_query(j):
            def ev(X, y):
                g = mlp.per_example_grads(params, X, y)[:, j]
                return (np.clip(g, -B, B) + B) / (2.0 * B)
            return QuerySpec(ev, lipschitz_y=math.nan, name=f"grad[{j}]")

        try:
            for j in range(pcount):
                v = vstat_answer(oracle, coord_query(j), truth,
                                 derive_seed(seed, f"sq/{step}/{j}"))
                grad[j] = v * 2.0 * B - B
        except QueryBudgetError:
            truncated = True
            step -= 1
            break
        vec = mlp.flatten_params(params) - lr * grad
        mlp.set_flat(params, vec)
    rng_eval = np.random.default_rng(derive_seed(seed, "sq/eval"))
    Xtr, ytr = truth.draw(rng_eval, eval_count)
    Xte, yte = truth.draw(rng_eval, eval_count)
    return SQTrainReport(
        steps_done=step,
        queries_used=oracle.queries_used,
        truncated=truncated,
        train_mse=mlp.mse(params, Xtr, ytr),
        test_mse=mlp.mse(params, Xte, yte),
        baseline_mse=float(np.var(yte, ddof=1)),
        config={"mode": oracle.mode, "t": oracle.t, "grad_bound": B,
                "steps": steps, "lr": lr, "seed": seed},
    )
