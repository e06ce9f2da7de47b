"""Experiment harness: hyperparameter sweeps over hard-family regression
tasks, the sharpness-vs-dimension phase report, scaling reports, and the
oracle-separation demonstration.

Every task derives its seed from (master seed, task descriptor string), so
rows are reproducible individually and insertion order never matters.  The
sweep journal is JSON-lines, one completed task per line; interrupted runs
resume by skipping journaled task ids.  CSV outputs are byte-deterministic
for a fixed config and seed (wall times stay in the journal only).
"""
from __future__ import annotations

import csv
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import mlp, sqoracle, statdim
from .activation import ActivationKind, make_bump
from .dist import InputDist1D, L1BallDist, ProductDist, make_dataset
from .errors import ConfigError, InvalidParameterError
from .hardfam import HardFunction, build_subset_family
from .seeding import derive_seed
from .wave import choose_truncation, lattice_theta, make_wave


@dataclass(frozen=True)
class SweepConfig:
    n_list: Tuple[int, ...] = (16, 64)
    s_list: Tuple[float, ...] = (0.05, 0.2, 1.0, 4.0)
    variant: str = "sigmoid"
    dist_family: str = "gaussian"  # gaussian | laplace | uniform | l1ball
    train_count: int = 20_000
    test_count: int = 2_000
    depths: Tuple[int, ...] = (1, 2)
    width_factors: Tuple[int, ...] = (4, 8)
    lrs: Tuple[float, ...] = (0.1, 0.03, 0.01)
    batches: Tuple[int, ...] = (128,)
    epochs: int = 60
    momentum: float = 0.9
    restarts: int = 1
    hidden_activation: str = "relu"
    master_seed: int = 0
    out_dir: str = "sweep-out"

    def __post_init__(self):
        for name in ("n_list", "s_list", "depths", "width_factors", "lrs", "batches"):
            if len(getattr(self, name)) == 0:
                raise ConfigError(f"{name} must be nonempty")
        if self.train_count < max(self.batches) or self.test_count < 2:
            raise ConfigError("dataset counts too small for the batch grid")
        if self.restarts < 1:
            raise ConfigError("restarts must be >= 1")

    @classmethod
    def paper_scale(cls, **overrides) -> "SweepConfig":
        """The full-size grid; hours to days of compute, not for CI."""
        base = dict(
            n_list=(50, 100, 200),
            s_list=(0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0),
            train_count=50_000,
            test_count=1_000,
            depths=(1, 2, 4),
            width_factors=(4, 8),
            lrs=(0.1, 0.01, 0.001),
            batches=(64, 128, 256),
        )
        base.update(overrides)
        return cls(**base)


@dataclass(frozen=True)
class SweepRow:
    task_id: str
    n: int
    s: float
    s_sqrt_n: float
    arch: str
    lr: float
    batch: int
    train_mse: float
    test_mse: float
    baseline_mse: float
    seed: int
    wall_time: float


@dataclass(frozen=True)
class SweepResult:
    rows: Tuple[SweepRow, ...]
    config: SweepConfig

    def best_rows(self) -> Dict[Tuple[int, float], SweepRow]:
        """Per (n, s): minimal test MSE, ties to the smaller architecture
        then the smaller learning rate."""
        best: Dict[Tuple[int, float], SweepRow] = {}
        for row in self.rows:
            key = (row.n, row.s)
            cur = best.get(key)
            if cur is None or _best_order(row) < _best_order(cur):
                best[key] = row
        return best


def _best_order(row: SweepRow):
    depth, width = _parse_arch(row.arch)
    return (row.test_mse, depth, width, row.lr)


def _parse_arch(arch: str) -> Tuple[int, int]:
    d, w = arch.split("w")
    return int(d[1:]), int(w)


def _input_dist(family: str, n: int):
    if family == "l1ball":
        return L1BallDist(n)
    return ProductDist(InputDist1D(family), n)


def make_task_function(cfg: SweepConfig, n: int, s: float) -> HardFunction:
    kind = ActivationKind(cfg.variant, s)
    psi = make_bump(kind)
    theta = lattice_theta(kind)
    M = 8.0 * math.sqrt(n / 2.0)
    m = choose_truncation(psi, M, 1e-6, theta=theta)
    w = make_wave(psi, theta, m)
    fam = build_subset_family(
        n, 1, seed=derive_seed(cfg.master_seed, f"subset/n{n}/s{s:.17g}"))
    return HardFunction(w, fam.sets[0], n)


def _cell_dataset(cfg: SweepConfig, n: int, s: float):
    f = make_task_function(cfg, n, s)
    dist = _input_dist(cfg.dist_family, n)
    dseed = derive_seed(cfg.master_seed, f"data/n{n}/s{s:.17g}")
    total = make_dataset(f, dist, cfg.train_count + cfg.test_count, dseed)
    X, y = total.inputs, total.labels
    return (X[:cfg.train_count], y[:cfg.train_count],
            X[cfg.train_count:], y[cfg.train_count:])

def _task_list(cfg: SweepConfig) -> List[dict]:
    tasks = []
    for n in cfg.n_list:
        for s in cfg.s_list:
            for depth in cfg.depths:
                for wf in cfg.width_factors:
                    for lr in cfg.lrs:
                        for batch in cfg.batches:
                            for restart in range(cfg.restarts):
                                tid = (f"n{n}-s{s:.17g}-d{depth}-w{wf}"
                                       f"-lr{lr:.17g}-b{batch}-r{restart}")
                                tasks.append(dict(task_id=tid, n=n, s=s,
                                                  depth=depth, wf=wf, lr=lr,
                                                  batch=batch, restart=restart))
    return tasks


def run_task(cfg: SweepConfig, task: dict) -> SweepRow:
    t0 = time.time()
    n, s = task["n"], task["s"]
    Xtr, ytr, Xte, yte = _cell_dataset(cfg, n, s)
    width = task["wf"] * n
    sizes = (n,) + (width,) * task["depth"] + (1,)
    spec = mlp.MLPSpec(sizes, hidden_activation=cfg.hidden_activation)
    seed = derive_seed(cfg.master_seed, "train/" + task["task_id"])
    params = mlp.init_params(spec, seed)
    tc = mlp.TrainConfig(lr=task["lr"], momentum=cfg.momentum,
                         batch_size=task["batch"], epochs=cfg.epochs, seed=seed)
    # Train on standardized labels so one lr grid serves cells whose label
    # variance spans several decades; MSEs are reported in original units.
    mu, sd = float(np.mean(ytr)), float(np.std(ytr))
    if sd < 1e-12:
        mu, sd = 0.0, 1.0
    data = mlp.TrainData(Xtr, (ytr - mu) / sd, Xte, (yte - mu) / sd)
    report = mlp.sgd_train(params, data, tc)
    train_mse = report.epoch_train_mse[-1] if report.epoch_train_mse else float("inf")
    return SweepRow(
        task_id=task["task_id"], n=n, s=s, s_sqrt_n=s * math.sqrt(n),
        arch=f"d{task['depth']}w{width}", lr=task["lr"], batch=task["batch"],
        train_mse=train_mse * sd * sd, test_mse=report.final_test_mse * sd * sd,
        baseline_mse=float(np.var(yte, ddof=1)), seed=seed,
        wall_time=time.time() - t0)


def _journal_path(cfg: SweepConfig) -> str:
    return os.path.join(cfg.out_dir, "journal.jsonl")


def _read_journal(path: str) -> Dict[str, SweepRow]:
    rows: Dict[str, SweepRow] = {}
    if not os.path.exists(path):
        return rows
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            d = json.loads(line)
            row = SweepRow(**d)
            rows[row.task_id] = row
    return rows


def write_rows_csv(rows: Sequence[SweepRow], path: str) -> None:
    # wall_time deliberately omitted: CSV bytes must not depend on timing
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["task_id", "n", "s", "s_sqrt_n", "arch", "lr", "batch",
                    "train_mse", "test_mse", "baseline_mse", "seed"])
        for r in sorted(rows, key=lambda r: r.task_id):
            w.writerow([r.task_id, r.n, f"{r.s:.17g}", f"{r.s_sqrt_n:.17g}",
                        r.arch, f"{r.lr:.17g}", r.batch, f"{r.train_mse:.17g}",
                        f"{r.test_mse:.17g}", f"{r.baseline_mse:.17g}", r.seed])


def run_sweep(cfg: SweepConfig, threads: int = 1) -> SweepResult:
    os.makedirs(cfg.out_dir, exist_ok=True)
    jpath = _journal_path(cfg)
    done = _read_journal(jpath)
    tasks = _task_list(cfg)
    pending = [t for t in tasks if t["task_id"] not in done]
    with open(jpath, "a") as journal:
        def record(row: SweepRow) -> None:
            journal.write(json.dumps(asdict(row)))
            journal.write("\n")
            journal.flush()
            done[row.task_id] = row

        if threads <= 1:
            for t in pending:
                record(run_task(cfg, t))
        else:
            with ProcessPoolExecutor(max_workers=threads) as pool:
                for row in pool.map(_run_task_star, [(cfg, t) for t in pending]):
                    record(row)
    rows = tuple(done[t["task_id"]] for t in tasks)
    write_rows_csv(rows, os.path.join(cfg.out_dir, "sweep.csv"))
    return SweepResult(rows=rows, config=cfg)


def _run_task_star(args):
    return run_task(*args)


@dataclass(frozen=True)
class PhaseRow:
    n: int
    s: float
    s_sqrt_n: float
    arch: str
    lr: float
    best_test_mse: float
    baseline_mse: float
    ratio: float


def spearman(a: Sequence[float], b: Sequence[float]) -> float:
    """Spearman rank correlation with average ranks on ties."""
    ra = _ranks(a)
    rb = _ranks(b)
    ra = ra - ra.mean()
    rb = rb - rb.mean()
    denom = math.sqrt(float(ra @ ra) * float(rb @ rb))
    if denom == 0.0:
        return 0.0
    return float(ra @ rb) / denom


def _ranks(vals: Sequence[float]) -> np.ndarray:
    arr = np.asarray(vals, dtype=np.float64)
    order = np.argsort(arr, kind="stable")
    ranks = np.empty(len(arr))
    i = 0
    while i < len(arr):
        j = i
        while j + 1 < len(arr) and arr[order[j + 1]] == arr[order[i]]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def phase_report(result: SweepResult):
    """Best ratio-to-baseline per (n, s) cell, sorted by s*sqrt(n)."""
    best = result.best_rows()
    svals = {row.s_sqrt_n for row in best.values()}
    if len(svals) < 2:
        raise InvalidParameterError("phase report needs >= 2 distinct s*sqrt(n) values")
    rows = []
    for (n, s), row in best.items():
        rows.append(PhaseRow(n=n, s=s, s_sqrt_n=row.s_sqrt_n, arch=row.arch,
                             lr=row.lr, best_test_mse=row.test_mse,
                             baseline_mse=row.baseline_mse,
                             ratio=row.test_mse / row.baseline_mse))
    rows.sort(key=lambda r: (r.s_sqrt_n, r.n))
    corr = spearman([r.s_sqrt_n for r in rows], [r.ratio for r in rows])
    return rows, corr


def write_phase_csv(rows: Sequence[PhaseRow], corr: float, out_dir: str) -> None:
    path = os.path.join(out_dir, "phase.csv")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        # baseline_ratio reference line is identically 1 in ratio units
        w.writerow(["n", "s", "s_sqrt_n", "arch", "lr", "best_test_mse",
                    "baseline_mse", "ratio", "baseline_ratio"])
        for r in rows:
            w.writerow([r.n, f"{r.s:.17g}", f"{r.s_sqrt_n:.17g}", r.arch,
                        f"{r.lr:.17g}", f"{r.best_test_mse:.17g}",
                        f"{r.baseline_mse:.17g}", f"{r.ratio:.17g}", 1.0])
    with open(os.path.join(out_dir, "phase.json"), "w") as fh:
        json.dump({"spearman_ratio_vs_s_sqrt_n": corr,
                   "cells": [asdict(r) for r in rows]}, fh, indent=2)


def statdim_report(cfg: statdim.ScalingConfig, seed: int, out_dir: str) -> dict:
    os.makedirs(out_dir, exist_ok=True)
    table = statdim.scaling_report(cfg, seed)
    table.write_csv(os.path.join(out_dir, "statdim.csv"))
    summary = table.summary()
    summary["seed"] = seed
    with open(os.path.join(out_dir, "statdim.json"), "w") as fh:
        json.dump(summary, fh, indent=2)
    return summary


@dataclass(frozen=True)
class OracleDemoConfig:
    hard_n: int = 24
    hard_s: float = 4.0
    easy_n: int = 12
    easy_s: float = 0.25
    hidden: int = 8
    t: int = 50
    steps: int = 250
    lr: float = 0.05
    grad_bound: float = 8.0
    eval_count: int = 4000

    def __post_init__(self):
        if self.steps < 0 or self.t < 1:
            raise ConfigError("steps must be >= 0 and t >= 1")


class _StandardizedSource:
    """Label-affine view of an example source: y -> (y - mu) / sd."""

    def __init__(self, base, mu: float, sd: float):
        self.base, self.mu, self.sd = base, mu, sd

    def draw(self, rng, count):
        X, y = self.base.draw(rng, count)
        return X, (y - self.mu) / self.sd

    def draw_inputs(self, rng, count):
        return self.base.draw_inputs(rng, count)

    def label_marginal(self, rng, count):
        return (self.base.label_marginal(rng, count) - self.mu) / self.sd

    def describe(self) -> dict:
        d = self.base.describe()
        d["label_affine"] = {"mu": self.mu, "sd": self.sd}
        return d


def _demo_instance(n: int, s: float, master: int, label: str):
    kind = ActivationKind("sigmoid", s)
    psi = make_bump(kind)
    theta = lattice_theta(kind)
    m = choose_truncation(psi, 8.0 * math.sqrt(n / 2.0), 1e-6, theta=theta)
    w = make_wave(psi, theta, m)
    fam = build_subset_family(n, 1, seed=derive_seed(master, f"demo/{label}/subset"))
    f = HardFunction(w, fam.sets[0], n)
    dist = ProductDist(InputDist1D("gaussian"), n)
    base = sqoracle.HardExampleSource(f, dist)
    # standardize labels from a calibration draw so one lr works for both
    # instances; ratios to baseline are unchanged by the affine map
    rng = np.random.default_rng(derive_seed(master, f"demo/{label}/calib"))
    _, y = base.draw(rng, 4000)
    sd = float(np.std(y))
    return _StandardizedSource(base, float(np.mean(y)), sd if sd > 1e-12 else 1.0)


def oracle_demo(cfg: OracleDemoConfig, seed: int, out_dir: str) -> dict:
    """SQ-SGD under the empirical and the decoy oracle, on one hard and one
    easy instance each; transcripts and a final-MSE comparison on disk."""
    os.makedirs(out_dir, exist_ok=True)
    summary = {"seed": seed, "t": cfg.t, "steps": cfg.steps, "lr": cfg.lr,
               "grad_bound": cfg.grad_bound, "runs": []}
    for label, n, s in (("hard", cfg.hard_n, cfg.hard_s),
                        ("easy", cfg.easy_n, cfg.easy_s)):
        truth = _demo_instance(n, s, seed, label)
        spec = mlp.MLPSpec((n, cfg.hidden, 1))
        init = mlp.init_params(spec, derive_seed(seed, f"demo/{label}/init"))
        for mode in ("empirical", "decoy"):
            params = init.copy()
            tpath = os.path.join(out_dir, f"transcript-{label}-{mode}.jsonl")
            with sqoracle.JsonlTranscript(tpath) as transcript:
                oracle = sqoracle.OracleConfig(t=cfg.t, mode=mode,
                                               transcript=transcript)
                rep = sqoracle.sq_sgd_train(
                    spec, params, oracle, truth, grad_bound=cfg.grad_bound,
                    steps=cfg.steps, lr=cfg.lr,
                    seed=derive_seed(seed, f"demo/{label}/{mode}"),
                    eval_count=cfg.eval_count)
            summary["runs"].append({
                "instance": label, "n": n, "s": s, "mode": mode,
                "steps_done": rep.steps_done, "queries": rep.queries_used,
                "param_count": params.count, "truncated": rep.truncated,
                "train_mse": rep.train_mse, "test_mse": rep.test_mse,
                "baseline_mse": rep.baseline_mse,
                "ratio_to_baseline": rep.test_mse / rep.baseline_mse,
                "transcript": os.path.basename(tpath)})
    with open(os.path.join(out_dir, "oracle-demo.json"), "w") as fh:
        json.dump(summary, fh, indent=2)
    return summary
