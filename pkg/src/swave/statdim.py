"""Monte Carlo evidence for the statistical-dimension scaling.

Estimates pairwise covariances and correlations of hard-family functions,
the covariances of their soft-indicator compositions, and how the medians
of those quantities shrink as the input dimension n grows at fixed wave
scale.  All estimates carry standard errors; downstream assertions use
3*std_error margins.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .activation import ActivationKind, make_bump
from .dist import InputDist1D, InputDistN, ProductDist, sample_input
from .errors import InvalidParameterError
from .hardfam import HardFunction, build_subset_family, subset_indices
from .seeding import derive_seed
from .sqoracle import SoftIndicator, soft_indicator_eval
from .wave import choose_truncation, eval_wave_batch, make_wave

_MC_CHUNK = 1 << 14
_VAR_FLOOR = 1e-10


@dataclass(frozen=True)
class CovEstimate:
    """Unbiased covariance of two functions over a shared sample stream.

    rho is the derived correlation (0 when either variance is degenerate,
    following the zero-variance convention); rho_std_error is a first-order
    propagation of std_error through the normalization.
    """

    value: float
    rho: float
    std_error: float
    rho_std_error: float
    n_samples: int
    pair: Tuple[str, str]


def _two_pass_cov(a: np.ndarray, b: np.ndarray):
    prod = (a - a.mean()) * (b - b.mean())
    n = len(a)
    cov = prod.sum() / (n - 1)
    se = prod.std(ddof=1) / math.sqrt(n)
    return cov, se


def _estimate(a: np.ndarray, b: np.ndarray, pair) -> CovEstimate:
    cov, se = _two_pass_cov(a, b)
    var_a, _ = _two_pass_cov(a, a)
    var_b, _ = _two_pass_cov(b, b)
    if var_a > _VAR_FLOOR and var_b > _VAR_FLOOR:
        norm = math.sqrt(var_a * var_b)
        rho = cov / norm
        rho_se = se / norm
    else:
        rho = 0.0
        rho_se = 0.0
    return CovEstimate(value=float(cov), rho=float(rho), std_error=float(se),
                       rho_std_error=float(rho_se), n_samples=len(a), pair=pair)


def mc_covariance(f: HardFunction, g: HardFunction, dist: InputDistN,
                  n_mc: int, seed: int) -> CovEstimate:
    if f.n != g.n:
        raise InvalidParameterError("functions must share the input dimension")
    if n_mc < 10_000:
        raise InvalidParameterError("n_mc must be at least 10^4")
    X = sample_input(dist, n_mc, seed)
    a = f.eval_batch(X)
    b = g.eval_batch(X)
    return _estimate(a, b, (hex(f.subset), hex(g.subset)))


def avg_correlation(fam: Sequence[HardFunction], dist: InputDistN,
                    n_pairs: int, n_mc: int, seed: int) -> float:
    """Family-average correlation over ordered pairs including the diagonal.

    The diagonal contributes exactly 1/|C|; the off-diagonal part is the
    mean sampled-pair correlation weighted by (1 - 1/|C|).  Families of at
    most 50 functions use every unordered pair; larger ones sample n_pairs
    index pairs.  All pairs share one sample stream.
    """
    size = len(fam)
    if size < 1:
        raise InvalidParameterError("family must be nonempty")
    if size == 1:
        return 1.0
    vals = _label_matrix(fam, dist, n_mc, seed)
    if size <= 50:
        pairs = [(i, j) for i in range(size) for j in range(i + 1, size)]
    else:
        rng = np.random.default_rng(derive_seed(seed, "statdim/pairs"))
        pairs = []
        while len(pairs) < n_pairs:
            i, j = rng.integers(0, size, size=2)
            if i != j:
                pairs.append((int(i), int(j)))
    rhos = [_estimate(vals[i], vals[j], (hex(fam[i].subset), hex(fam[j].subset))).rho
            for i, j in pairs]
    return 1.0 / size + (1.0 - 1.0 / size) * float(np.mean(rhos))


class IndicatorCovariance(NamedTuple):
    cov: float
    mu: float
    bound_ratio: float
    std_error: float
    n_pairs: int


def indicator_covariance(fam: Sequence[HardFunction], y: float, eps: float,
                         dist: InputDistN, n_mc: int, seed: int) -> IndicatorCovariance:
    """Average pairwise covariance of {chi_y o f} plus the level mass mu(y).

    Averages over distinct pairs only: the diagonal variances carry no
    dimension dependence and would mask the decay this estimate exists to
    expose.  bound_ratio = cov / max{eps, mu}^2.  std_error comes from the
    per-sample spread of the pair-averaged centered products, which stays
    honest under the shared sample stream.
    """
    if not (eps > 0):
        raise InvalidParameterError("eps must be positive")
    if len(fam) < 2:
        raise InvalidParameterError("need at least two functions")
    chi = SoftIndicator(y=y, eps=eps)
    vals = _label_matrix(fam, dist, n_mc, seed)
    u = soft_indicator_eval(chi, vals)  # (size, n_mc)
    mu = float(np.mean(u))
    centered = u - u.mean(axis=1, keepdims=True)
    size = len(fam)
    pairs = [(i, j) for i in range(size) for j in range(i + 1, size)]
    per_sample = np.zeros(n_mc)
    for i, j in pairs:
        per_sample += centered[i] * centered[j]
    per_sample /= len(pairs)
    cov = float(per_sample.sum() / (n_mc - 1))
    se = float(per_sample.std(ddof=1)) / math.sqrt(n_mc)
    denom = max(eps, mu) ** 2
    return IndicatorCovariance(cov=cov, mu=mu, bound_ratio=cov / denom,
                               std_error=se, n_pairs=len(pairs))


def _label_matrix(fam: Sequence[HardFunction], dist: InputDistN, n_mc: int,
                  seed: int) -> np.ndarray:
    """Labels of every family member on one shared stream, chunked to keep
    the input matrix out of memory at large n."""
    rng = np.random.default_rng(seed)
    out = np.empty((len(fam), n_mc))
    idx = [subset_indices(f.subset) for f in fam]
    done = 0
    while done < n_mc:
        take = min(_MC_CHUNK, n_mc - done)
        X = dist.sample(rng, take)
        for i, f in enumerate(fam):
            z = np.sum(X[:, idx[i]], axis=1)
            out[i, done:done + take] = eval_wave_batch(f.wave, z)
        done += take
    return out


@dataclass(frozen=True)
class ScalingConfig:
    """Grid for the correlation-decay report.

    theta is held fixed across n; the truncation order m grows with n so
    the wave covers 8 standard deviations of the subset sum.  eps is the
    soft-indicator width on the [0,1] label scale.
    """

    n_values: Tuple[int, ...] = (64, 128, 256)
    variant: str = "sigmoid"
    sharpness: float = 0.35
    theta: Optional[float] = None  # None: 4x the bump's essential radius
    family_count: int = 7
    n_pairs: int = 20
    n_mc: int = 200_000
    eps: float = 0.4
    dist_family: str = "gaussian"
    overlap_margin: float = 0.1

    def __post_init__(self):
        if len(self.n_values) < 3:
            raise InvalidParameterError("need at least 3 values of n for a slope fit")
        if self.family_count < 2:
            raise InvalidParameterError("family_count must be at least 2")


@dataclass(frozen=True)
class PairRow:
    n: int
    theta: float
    s: float
    pair_id: str
    cov: float
    rho: float
    std_err: float
    mu_y: float
    bound_ratio: float


@dataclass(frozen=True)
class ScalingTable:
    rows: Tuple[PairRow, ...]
    median_abs_rho: dict
    bound_ratios: dict
    slope: float
    config: ScalingConfig

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["n", "theta", "s", "pair_id", "cov", "rho",
                        "std_err", "mu_y", "bound_ratio"])
            for r in self.rows:
                w.writerow([r.n, f"{r.theta:.17g}", f"{r.s:.17g}", r.pair_id,
                            f"{r.cov:.17g}", f"{r.rho:.17g}", f"{r.std_err:.17g}",
                            f"{r.mu_y:.17g}", f"{r.bound_ratio:.17g}"])

    def summary(self) -> dict:
        return {
            "median_abs_rho": {str(k): v for k, v in self.median_abs_rho.items()},
            "bound_ratios": {str(k): v for k, v in self.bound_ratios.items()},
            "slope": self.slope,
            "n_values": list(self.config.n_values),
            "theta": self.rows[0].theta if self.rows else None,
        }


def family_for_n(cfg: ScalingConfig, n: int, seed: int):
    """The n-dimensional member family of the fixed-theta scaling ladder."""
    kind = ActivationKind(cfg.variant, cfg.sharpness)
    psi = make_bump(kind)
    theta = cfg.theta if cfg.theta is not None else 4.0 * psi.essential_radius
    M = 8.0 * math.sqrt(n / 2.0)
    m = choose_truncation(psi, M, 1e-6, theta=theta)
    w = make_wave(psi, theta, m)
    sets = build_subset_family(n, cfg.family_count, c=cfg.overlap_margin,
                               seed=derive_seed(seed, f"statdim/fam/{n}"))
    funcs = [HardFunction(w, s, n) for s in sets.sets]
    return funcs, theta


def _pair_list(size: int, n_pairs: int, seed: int):
    pairs = [(i, j) for i in range(size) for j in range(i + 1, size)]
    if len(pairs) <= n_pairs:
        return pairs
    rng = np.random.default_rng(derive_seed(seed, "statdim/rows"))
    keep = rng.choice(len(pairs), size=n_pairs, replace=False)
    return [pairs[k] for k in sorted(keep)]


def median_label(funcs, dist, n_mc: int, seed: int) -> float:
    probe = min(n_mc, 50_000)
    vals = _label_matrix(funcs[:1], dist, probe, derive_seed(seed, "statdim/med"))
    return float(np.median(vals))


def scaling_report(cfg: ScalingConfig, seed: int) -> ScalingTable:
    """Per-n pair correlations, indicator bound ratios, and the log-log
    slope of median |rho| against n."""
    dist1 = InputDist1D(cfg.dist_family)
    rows: List[PairRow] = []
    med_rho = {}
    bratios = {}
    for n in cfg.n_values:
        funcs, theta = family_for_n(cfg, n, seed)
        dist = ProductDist(dist1, n)
        stream_seed = derive_seed(seed, f"statdim/mc/{n}")
        vals = _label_matrix(funcs, dist, cfg.n_mc, stream_seed)
        y_med = median_label(funcs, dist, cfg.n_mc, seed)
        chi = SoftIndicator(y=y_med, eps=cfg.eps)
        u = soft_indicator_eval(chi, vals)
        mu = float(np.mean(u))
        denom = max(cfg.eps, mu) ** 2
        centered = u - u.mean(axis=1, keepdims=True)
        pairs = _pair_list(len(funcs), cfg.n_pairs, seed)
        abs_rhos = []
        pair_bratios = []
        for i, j in pairs:
            est = _estimate(vals[i], vals[j],
                            (hex(funcs[i].subset), hex(funcs[j].subset)))
            prod = centered[i] * centered[j]
            cov_chi = float(prod.sum() / (cfg.n_mc - 1))
            br = cov_chi / denom
            abs_rhos.append(abs(est.rho))
            pair_bratios.append(br)
            rows.append(PairRow(n=n, theta=theta, s=cfg.sharpness,
                                pair_id=f"{i}-{j}", cov=est.value, rho=est.rho,
                                std_err=est.std_error, mu_y=mu, bound_ratio=br))
        med_rho[n] = float(np.median(abs_rhos))
        bratios[n] = float(np.mean(pair_bratios))  # signed family-level mean
    ns = np.array([float(n) for n in cfg.n_values])
    meds = np.array([med_rho[n] for n in cfg.n_values])
    slope = float(np.polyfit(np.log(ns), np.log(np.maximum(meds, 1e-300)), 1)[0])
    return ScalingTable(rows=tuple(rows), median_abs_rho=med_rho,
                        bound_ratios=bratios, slope=slope, config=cfg)
