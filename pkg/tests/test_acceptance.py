"""Acceptance suite: one test per shipped guarantee, at stated tolerances.

Each test prints a single pass/fail line (visible with -s or on failure) and
asserts both the quantitative claim and its runtime budget.  Numbers quoted
in comments are the frozen calibration values for the pinned seeds.
"""
import math
import time

import numpy as np
import pytest

from swave.activation import ActivationKind, make_bump
from swave.bench import (OracleDemoConfig, SweepConfig, oracle_demo,
                         phase_report, run_sweep)
from swave.dist import InputDist1D, ProductDist, sample_input
from swave.hardfam import (HardFunction, build_subset_family, condition_number,
                           eval_hard_batch, network_forward_batch,
                           perturb_network, to_network)
from swave.mlp import MLPSpec, grad_check
from swave.seeding import derive_seed
from swave.sqoracle import (HardExampleSource, OracleConfig, QuerySpec,
                            indicator_decomposition_defect, tolerance,
                            vstat_answer)
from swave.statdim import (ScalingConfig, family_for_n, indicator_covariance,
                           median_label, scaling_report)
from swave.wave import (choose_truncation, default_theta, lattice_theta,
                        make_wave, shift_effect)

SIGMOID_RS = 2.5330587583254527


def _line(num: int, ok: bool, detail: str) -> None:
    print(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, detail


def _elapsed(num: int, t0: float, limit: float) -> None:
    wall = time.time() - t0
    assert wall < limit, f"criterion {num} took {wall:.1f}s, budget {limit}s"


def test_criterion_01_l1_norms():
    t0 = time.time()
    worst_sig = worst_relu = 0.0
    for s in (0.5, 1.0, 2.0, 8.0):
        sig = make_bump(ActivationKind("sigmoid", s))
        worst_sig = max(worst_sig, abs(sig.l1_norm - 2.0 / s) / (2.0 / s))
        tent = make_bump(ActivationKind("relu", s))
        worst_relu = max(worst_relu, abs(tent.l1_norm - 1.0 / s) / (1.0 / s))
    ok = worst_sig <= 1e-5 and worst_relu <= 1e-9
    _line(1, ok, f"L1 rel err sigmoid {worst_sig:.2e} (<=1e-5), "
                 f"relu {worst_relu:.2e} (<=1e-9)")
    _elapsed(1, t0, 1.0)


def test_criterion_02_essential_radius():
    t0 = time.time()
    worst_relu = 0.0
    rs = []
    for s in (0.5, 1.0, 2.0, 8.0):
        want = (1.0 - math.sqrt(1.0 / 6.0)) / s
        got = make_bump(ActivationKind("relu", s)).essential_radius
        worst_relu = max(worst_relu, abs(got - want) / want)
        rs.append(make_bump(ActivationKind("sigmoid", s)).essential_radius * s)
    spread = (max(rs) - min(rs)) / min(rs)
    drift = max(abs(v - SIGMOID_RS) / SIGMOID_RS for v in rs)
    ok = worst_relu <= 1e-6 and spread <= 0.01 and drift <= 0.01
    _line(2, ok, f"relu radius rel err {worst_relu:.2e} (<=1e-6), "
                 f"sigmoid r*s spread {spread:.2e} (<=1e-2)")
    _elapsed(2, t0, 1.0)


def test_criterion_03_representation_identity():
    t0 = time.time()
    rng = np.random.default_rng(2026)
    variants = ("sigmoid", "relu", "softplus", "softsign")
    worst = 0.0
    for k in range(10):
        n = int(rng.integers(4, 33))
        m = int(rng.integers(2, 13))
        s = float(rng.uniform(0.3, 4.0))
        psi = make_bump(ActivationKind(variants[k % 4], s))
        w = make_wave(psi, default_theta(psi), m)
        f = HardFunction(w, build_subset_family(n, 1, seed=k).sets[0], n)
        X = sample_input(ProductDist(InputDist1D("gaussian"), n), 1000,
                         derive_seed(2026, f"c3/{k}"))
        gap = float(np.max(np.abs(network_forward_batch(to_network(f), X)
                                  - eval_hard_batch(f, X))))
        worst = max(worst, gap)
    ok = worst <= 1e-9
    _line(3, ok, f"max |network - direct| {worst:.2e} over 10 configs (<=1e-9)")
    _elapsed(3, t0, 10.0)


def test_criterion_04_gradient_checks():
    t0 = time.time()
    worst_sig = max(grad_check(MLPSpec((8, 16, 1), hidden_activation="sigmoid"), 1),
                    grad_check(MLPSpec((6, 12, 12, 1), hidden_activation="sigmoid"), 2))
    worst_relu = max(grad_check(MLPSpec((8, 16, 1), hidden_activation="relu"), 3),
                     grad_check(MLPSpec((6, 12, 12, 1), hidden_activation="relu"), 4))
    ok = worst_sig <= 1e-5 and worst_relu <= 1e-4
    _line(4, ok, f"grad rel err sigmoid {worst_sig:.2e} (<=1e-5), "
                 f"relu {worst_relu:.2e} (<=1e-4)")
    _elapsed(4, t0, 30.0)


def test_criterion_05_correlation_decay():
    # frozen seed 2026: medians 0.1675 / 0.0395, interval [3.47, 5.32]
    t0 = time.time()
    table = scaling_report(ScalingConfig(), seed=2026)

    def med_rho_se(n):
        vals = [r.std_err * abs(r.rho / r.cov)
                for r in table.rows if r.n == n and r.cov != 0.0]
        return float(np.median(vals))

    m64, m256 = table.median_abs_rho[64], table.median_abs_rho[256]
    se64, se256 = med_rho_se(64), med_rho_se(256)
    lo = (m64 - 3 * se64) / (m256 + 3 * se256)
    hi = (m64 + 3 * se64) / (m256 - 3 * se256)
    ok = 2.0 <= lo and hi <= 8.0
    _line(5, ok, f"median |rho| ratio 64/256 = {m64 / m256:.3f}, "
                 f"3-se interval [{lo:.3f}, {hi:.3f}] within [2, 8]")
    _elapsed(5, t0, 600.0)


def test_criterion_06_indicator_covariance_scaling():
    # frozen seed 2026: bound ratios 0.0416 / 0.0114, interval [3.29, 4.13]
    t0 = time.time()
    cfg = ScalingConfig(sharpness=0.25, eps=0.4, n_mc=500_000)
    out = {}
    for n in (64, 256):
        funcs, _ = family_for_n(cfg, n, 2026)
        dist = ProductDist(InputDist1D("gaussian"), n)
        y_med = median_label(funcs, dist, cfg.n_mc, 2026)
        out[n] = indicator_covariance(funcs, y_med, cfg.eps, dist, cfg.n_mc,
                                      derive_seed(2026, f"c6/{n}"))

    def band(o):
        den = max(cfg.eps, o.mu) ** 2
        return (o.cov - 3 * o.std_error) / den, (o.cov + 3 * o.std_error) / den

    lo64, hi64 = band(out[64])
    lo256, hi256 = band(out[256])
    lo, hi = lo64 / hi256, hi64 / lo256
    ratio = out[64].bound_ratio / out[256].bound_ratio
    ok = 2.0 <= lo and hi <= 8.0
    _line(6, ok, f"bound_ratio 64/256 = {ratio:.3f}, "
                 f"3-se interval [{lo:.3f}, {hi:.3f}] within [2, 8]")
    _elapsed(6, t0, 600.0)


def test_criterion_07_shift_robustness():
    t0 = time.time()
    kind = ActivationKind("sigmoid", 16.0)
    psi = make_bump(kind)
    theta = lattice_theta(kind)
    assert theta == 0.25
    m = choose_truncation(psi, 12.0, 1e-6, theta=theta)
    w = make_wave(psi, theta, m)
    dist = InputDist1D("gaussian")
    worst = 0.0
    for z in (0.5, -0.5, 1.0, -1.0, 2.0, -2.0, 3.0, -3.0):
        effect, bound = shift_effect(w, dist, z, 10 ** 6,
                                     derive_seed(2026, f"c7/{z:.17g}"))
        assert effect <= bound, f"z={z}: effect {effect} > bound {bound}"
        worst = max(worst, effect / bound)
    _line(7, True, f"shift effect <= bound for all 8 shifts "
                   f"(worst effect/bound {worst:.2e})")
    _elapsed(7, t0, 300.0)


def _probe_source():
    psi = make_bump(ActivationKind("sigmoid", 1.0))
    w = make_wave(psi, default_theta(psi), 4)
    f = HardFunction(w, build_subset_family(6, 1, seed=2026).sets[0], 6)
    return HardExampleSource(f, ProductDist(InputDist1D("gaussian"), 6))


class _LastEntry:
    def record(self, entry):
        self.last = entry


def test_criterion_08_vstat_contract():
    t0 = time.time()
    truth = _probe_source()
    rng = np.random.default_rng(derive_seed(2026, "c8/coef"))
    in_band = 0
    for k in range(1000):
        a, b, c = rng.normal(size=3)

        def ev(X, y, a=a, b=b, c=c):
            return np.clip(0.5 + 0.2 * (a * X[:, 0] + b * y + c), 0.0, 1.0)

        rec = _LastEntry()
        oracle = OracleConfig(t=50, mode="decoy", transcript=rec)
        v = vstat_answer(oracle, QuerySpec(ev), truth,
                         seed=derive_seed(2026, f"c8/d/{k}"))
        in_band += abs(v - rec.last["p_est"]) <= rec.last["tolerance"] + 1e-12
    tol = tolerance(0.5, 100)
    close = 0
    for k in range(1000):
        q = QuerySpec(lambda X, y: (X[:, 0] > 0).astype(float))
        oracle = OracleConfig(t=100, mode="empirical")
        v = vstat_answer(oracle, q, truth, seed=derive_seed(2026, f"c8/e/{k}"))
        close += abs(v - 0.5) <= 3 * tol
    ok = in_band == 1000 and close >= 990
    _line(8, ok, f"decoy in band {in_band}/1000 (need 1000), "
                 f"empirical within 3 tol {close}/1000 (need >=990)")
    _elapsed(8, t0, 60.0)


def test_criterion_09_phase_transition(tmp_path):
    # frozen master_seed 0: easy ratios <= 0.0061, hard >= 1.0002, rank 0.95
    t0 = time.time()
    cfg = SweepConfig(master_seed=0, out_dir=str(tmp_path / "sweep"))
    result = run_sweep(cfg, threads=1)
    rows, corr = phase_report(result)
    easy_bad = [(r.n, r.s, r.ratio) for r in rows
                if r.s_sqrt_n <= 1.0 and not r.ratio <= 0.6]
    hard_bad = [(r.n, r.s, r.ratio) for r in rows
                if r.s_sqrt_n >= 15.0 and not r.ratio >= 0.9]
    ok = not easy_bad and not hard_bad and corr >= 0.8
    detail = (f"easy cells (s sqrt(n) <= 1) all <= 0.6: {not easy_bad}; "
              f"hard cells (>= 15) all >= 0.9: {not hard_bad}; "
              f"spearman {corr:.3f} (>=0.8)")
    if easy_bad or hard_bad:
        detail += f"; offenders easy={easy_bad} hard={hard_bad}"
    _line(9, ok, detail)
    _elapsed(9, t0, 7200.0)


def test_criterion_10_oracle_demonstration(tmp_path):
    # frozen seed 0: decoy-hard 1.0001, empirical-easy 0.0637
    t0 = time.time()
    summary = oracle_demo(OracleDemoConfig(), seed=0, out_dir=str(tmp_path))
    runs = {(r["instance"], r["mode"]): r for r in summary["runs"]}
    decoy_hard = runs[("hard", "decoy")]["ratio_to_baseline"]
    emp_easy = runs[("easy", "empirical")]["ratio_to_baseline"]
    accounting = all(r["queries"] == r["param_count"] * OracleDemoConfig().steps
                     and not r["truncated"] for r in summary["runs"])
    ok = 0.98 <= decoy_hard <= 1.02 and emp_easy <= 0.6 and accounting
    _line(10, ok, f"decoy-hard ratio {decoy_hard:.4f} (in [0.98, 1.02]), "
                  f"empirical-easy ratio {emp_easy:.4f} (<=0.6), "
                  f"query accounting exact: {accounting}")
    _elapsed(10, t0, 900.0)


def test_criterion_11_perturbation_condition():
    # frozen: 100/100 finite at delta 1e-6, drift slope 0.4995
    t0 = time.time()
    psi = make_bump(ActivationKind("sigmoid", 1.0))
    w = make_wave(psi, default_theta(psi), 8)
    f = HardFunction(w, build_subset_family(16, 1, seed=2026).sets[0], 16)
    net = to_network(f)
    finite = sum(
        math.isfinite(condition_number(perturb_network(net, 1e-6, seed=s).hidden_weights))
        for s in range(100))
    deltas = (1e-8, 1e-7, 1e-6, 1e-5, 1e-4)
    med = [float(np.median([perturb_network(net, d, seed=s).drift
                            for s in range(20)])) for d in deltas]
    slope = float(np.polyfit(np.log(deltas), np.log(med), 1)[0])
    ok = finite >= 99 and 0.35 <= slope <= 0.65
    _line(11, ok, f"finite condition {finite}/100 (>=99), "
                  f"drift log-log slope {slope:.4f} (0.5 +- 0.15)")
    _elapsed(11, t0, 120.0)


def test_criterion_12_indicator_decomposition():
    t0 = time.time()
    psi = make_bump(ActivationKind("sigmoid", 1.0))
    w = make_wave(psi, default_theta(psi), 6)
    f = HardFunction(w, build_subset_family(8, 1, seed=2026).sets[0], 8)
    dist = ProductDist(InputDist1D("gaussian"), 8)
    probes = [
        ("affine", QuerySpec(lambda X, y: (y + 2.0) / 4.0, lipschitz_y=0.25)),
        ("sine", QuerySpec(lambda X, y: 0.5 + 0.4 * np.sin(y) * np.exp(-X[:, 0] ** 2),
                           lipschitz_y=0.4)),
        ("coupled", QuerySpec(lambda X, y: np.clip(0.3 + 0.2 * y * np.tanh(X[:, 1]),
                                                   0.0, 1.0), lipschitz_y=0.2)),
        ("steep", QuerySpec(lambda X, y: np.clip(2.0 * (y - 0.5), 0.0, 1.0),
                            lipschitz_y=2.0)),
    ]
    details = []
    ok = True
    for name, q in probes:
        defect, bound, se = indicator_decomposition_defect(
            q, f, dist, eps=0.25, n_mc=200_000, seed=derive_seed(2026, f"c12/{name}"))
        good = defect <= bound + 3 * se
        ok = ok and good
        details.append(f"{name} {defect:.1e}<={bound:.1e}+3se:{good}")
    _line(12, ok, "; ".join(details))
    _elapsed(12, t0, 120.0)
