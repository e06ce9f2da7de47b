"""CLI subcommands, exit codes, and file outputs, driven via main()."""
import json
import subprocess
import sys

import numpy as np

from swave.cli import main
from swave.dist import load_binary, load_csv


def test_gen_csv(tmp_path, capsys):
    cfg = tmp_path / "gen.json"
    cfg.write_text(json.dumps({"n": 6, "s": 1.0, "count": 50}))
    out = tmp_path / "data.csv"
    rc = main(["gen", "--config", str(cfg), "--seed", "3", "--out", str(out)])
    assert rc == 0
    assert "wrote 50 examples (n=6)" in capsys.readouterr().out
    ds = load_csv(out)
    assert ds.inputs.shape == (50, 6)
    assert ds.labels.shape == (50,)


def test_gen_binary_rounding(tmp_path):
    cfg = tmp_path / "gen.json"
    cfg.write_text(json.dumps({"n": 4, "s": 0.5, "count": 30,
                               "format": "binary", "rounding": 9}))
    out = tmp_path / "data.bin"
    assert main(["gen", "--config", str(cfg), "--out", str(out)]) == 0
    ds = load_binary(out)
    grid = np.linspace(-1.0, 1.0, 9)
    assert np.all(np.min(np.abs(ds.labels[:, None] - grid[None, :]), axis=1) < 1e-12)


def test_gen_deterministic(tmp_path):
    cfg = tmp_path / "gen.json"
    cfg.write_text(json.dumps({"n": 4, "s": 1.0, "count": 20}))
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    main(["gen", "--config", str(cfg), "--seed", "7", "--out", str(a)])
    main(["gen", "--config", str(cfg), "--seed", "7", "--out", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_bad_config_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["gen", "--config", str(bad)]) == 2
    assert "config error" in capsys.readouterr().err
    assert main(["gen", "--config", str(tmp_path / "missing.json")]) == 2


def test_unknown_format_exits_2(tmp_path, capsys):
    cfg = tmp_path / "gen.json"
    cfg.write_text(json.dumps({"format": "parquet"}))
    assert main(["gen", "--config", str(cfg)]) == 2
    assert "parquet" in capsys.readouterr().err


def test_sweep_then_phase(tmp_path, capsys):
    cfg = tmp_path / "sweep.json"
    cfg.write_text(json.dumps({
        "n_list": [6], "s_list": [0.5, 2.0], "depths": [1],
        "width_factors": [2], "lrs": [0.01], "batches": [128],
        "epochs": 2, "train_count": 512, "test_count": 128}))
    out = str(tmp_path / "sweep-out")
    assert main(["sweep", "--config", str(cfg), "--out", out]) == 0
    assert "2 rows" in capsys.readouterr().out
    assert main(["phase", "--out", out]) == 0
    stdout = capsys.readouterr().out
    assert "spearman(ratio, s_sqrt_n)" in stdout
    assert (tmp_path / "sweep-out" / "phase.csv").exists()
    assert (tmp_path / "sweep-out" / "phase.json").exists()


def test_phase_without_sweep_exits_2(tmp_path, capsys):
    assert main(["phase", "--out", str(tmp_path / "nothing")]) == 2
    assert "no sweep journal" in capsys.readouterr().err


def test_statdim_command(tmp_path, capsys):
    cfg = tmp_path / "sd.json"
    cfg.write_text(json.dumps({"n_values": [8, 12, 16], "family_count": 2,
                               "n_pairs": 1, "n_mc": 20000}))
    out = str(tmp_path / "sd-out")
    assert main(["statdim", "--config", str(cfg), "--seed", "5",
                 "--out", out]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["seed"] == 5
    assert (tmp_path / "sd-out" / "statdim.csv").exists()


def test_oracle_demo_command(tmp_path, capsys):
    cfg = tmp_path / "demo.json"
    cfg.write_text(json.dumps({"hard_n": 6, "hard_s": 2.0, "easy_n": 4,
                               "easy_s": 0.25, "hidden": 2, "t": 4,
                               "steps": 1, "eval_count": 100}))
    out = str(tmp_path / "demo-out")
    assert main(["oracle-demo", "--config", str(cfg), "--out", out]) == 0
    stdout = capsys.readouterr().out
    assert "empirical" in stdout and "decoy" in stdout
    assert (tmp_path / "demo-out" / "oracle-demo.json").exists()


def test_grad_check_command(capsys):
    assert main(["grad-check", "--seed", "1"]) == 0
    assert "max relative gradient error" in capsys.readouterr().out


def test_grad_check_failure_exits_4(tmp_path, capsys):
    cfg = tmp_path / "gc.json"
    cfg.write_text(json.dumps({"tol": 1e-16}))
    assert main(["grad-check", "--config", str(cfg)]) == 4
    assert "numeric failure" in capsys.readouterr().err


def test_console_entry_point():
    # the installed script must resolve and print usage
    proc = subprocess.run([sys.executable, "-m", "swave.cli", "--help"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "gen" in proc.stdout and "oracle-demo" in proc.stdout
