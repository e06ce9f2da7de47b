"""Command-line interface.

Subcommands: gen (write a labeled dataset), sweep (hyperparameter grid),
phase (summarize a sweep into the transition table), statdim (scaling
report), oracle-demo (empirical vs decoy SQ-SGD), grad-check (backprop vs
finite differences).

Exit codes: 0 success, 2 configuration error, 3 resource limit exhausted,
4 numeric failure.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys

from . import bench, mlp, statdim
from .activation import ActivationKind, make_bump
from .dist import make_dataset, save_binary, save_csv
from .errors import (ConfigError, InvalidParameterError, NumericFailureError,
                     ResourceLimitError)
from .hardfam import build_subset_family, HardFunction
from .seeding import derive_seed
from .wave import choose_truncation, lattice_theta, make_wave


def _load_config(path):
    if path is None:
        return {}
    try:
        with open(path) as fh:
            loaded = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(loaded, dict):
        raise ConfigError("config file must hold a JSON object")
    return loaded


def _tupled(d: dict) -> dict:
    return {k: tuple(v) if isinstance(v, list) else v for k, v in d.items()}


def _reject_unknown(given, allowed) -> None:
    # a typo'd key must not fall back to a default silently
    bad = sorted(set(given) - set(allowed))
    if bad:
        raise ConfigError("unknown config keys: " + ", ".join(bad))


def _field_names(cls):
    return {f.name for f in dataclasses.fields(cls)}


def cmd_gen(args) -> int:
    cfg = {
        "n": 16, "s": 1.0, "variant": "sigmoid", "dist": "gaussian",
        "count": 1000, "rounding": None, "format": "csv",
    }
    over = _load_config(args.config)
    _reject_unknown(over, set(cfg) | {"theta", "m"})
    cfg.update(over)
    kind = ActivationKind(cfg["variant"], cfg["s"])
    psi = make_bump(kind)
    theta = cfg.get("theta") or lattice_theta(kind)
    n = cfg["n"]
    m = cfg.get("m") or choose_truncation(
        psi, 8.0 * math.sqrt(n / 2.0), 1e-6, theta=theta)
    w = make_wave(psi, theta, m)
    fam = build_subset_family(n, 1, seed=derive_seed(args.seed, "gen/subset"))
    f = HardFunction(w, fam.sets[0], n)
    dist = bench._input_dist(cfg["dist"], n)
    ds = make_dataset(f, dist, cfg["count"], derive_seed(args.seed, "gen/data"),
                      rounding=cfg["rounding"])
    out = args.out or ("dataset.csv" if cfg["format"] == "csv" else "dataset.bin")
    if cfg["format"] == "csv":
        save_csv(ds, out)
    elif cfg["format"] == "binary":
        save_binary(ds, out)
    else:
        raise ConfigError(f"unknown dataset format {cfg['format']!r}")
    print(f"wrote {ds.count} examples (n={ds.n}) to {out}")
    return 0


def cmd_sweep(args) -> int:
    over = _tupled(_load_config(args.config))
    over.setdefault("master_seed", args.seed)
    if args.out:
        over["out_dir"] = args.out
    if args.paper_scale:
        cfg = bench.SweepConfig.paper_scale(**over)
    else:
        cfg = bench.SweepConfig(**over)
    result = bench.run_sweep(cfg, threads=args.threads)
    print(f"{len(result.rows)} rows -> {os.path.join(cfg.out_dir, 'sweep.csv')}")
    return 0


def cmd_phase(args) -> int:
    out_dir = args.out or "sweep-out"
    jpath = os.path.join(out_dir, "journal.jsonl")
    done = bench._read_journal(jpath)
    if not done:
        raise ConfigError(f"no sweep journal found at {jpath}")
    rows = tuple(done.values())
    # config irrelevant for summarizing; rows carry everything needed
    result = bench.SweepResult(rows=rows, config=bench.SweepConfig())
    prows, corr = bench.phase_report(result)
    bench.write_phase_csv(prows, corr, out_dir)
    for r in prows:
        print(f"n={r.n} s={r.s:g} s_sqrt_n={r.s_sqrt_n:.3f} ratio={r.ratio:.4f}")
    print(f"spearman(ratio, s_sqrt_n) = {corr:.4f}")
    return 0


def cmd_statdim(args) -> int:
    cfg = statdim.ScalingConfig(**_tupled(_load_config(args.config)))
    summary = bench.statdim_report(cfg, args.seed, args.out or "statdim-out")
    print(json.dumps(summary, indent=2))
    return 0


def cmd_oracle_demo(args) -> int:
    cfg = bench.OracleDemoConfig(**_load_config(args.config))
    summary = bench.oracle_demo(cfg, args.seed, args.out or "oracle-demo-out")
    for run in summary["runs"]:
        print(f"{run['instance']:<5} {run['mode']:<10} queries={run['queries']:<8} "
              f"ratio={run['ratio_to_baseline']:.4f}")
    return 0


def cmd_grad_check(args) -> int:
    cfg = {"layer_sizes": [8, 16, 1], "hidden_activation": "sigmoid",
           "n_coords": 200, "h": 1e-5, "tol": 1e-4}
    cfg.update(_load_config(args.config))
    spec = mlp.MLPSpec(tuple(cfg["layer_sizes"]), cfg["hidden_activation"])
    err = mlp.grad_check(spec, seed=args.seed, n_coords=cfg["n_coords"], h=cfg["h"])
    print(f"max relative gradient error: {err:.3e}")
    if not (err <= cfg["tol"]):
        raise NumericFailureError(
            f"gradient error {err:.3e} exceeds tolerance {cfg['tol']:.1e}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="swave",
                                description="hard-to-learn wave function workbench")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", default=None, help="JSON config file")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", default=None)
        sp.add_argument("--threads", type=int, default=1)

    sp = sub.add_parser("gen", help="generate a labeled dataset")
    common(sp)
    sp.set_defaults(func=cmd_gen)

    sp = sub.add_parser("sweep", help="run the hyperparameter sweep")
    common(sp)
    sp.add_argument("--paper-scale", action="store_true",
                    help="full-size grid (hours to days)")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("phase", help="phase table from a finished sweep")
    common(sp)
    sp.set_defaults(func=cmd_phase)

    sp = sub.add_parser("statdim", help="correlation scaling report")
    common(sp)
    sp.set_defaults(func=cmd_statdim)

    sp = sub.add_parser("oracle-demo", help="empirical vs decoy SQ-SGD")
    common(sp)
    sp.set_defaults(func=cmd_oracle_demo)

    sp = sub.add_parser("grad-check", help="backprop vs finite differences")
    common(sp)
    sp.set_defaults(func=cmd_grad_check)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, InvalidParameterError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except ResourceLimitError as e:
        print(f"resource limit: {e}", file=sys.stderr)
        return 3
    except NumericFailureError as e:
        print(f"numeric failure: {e}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
