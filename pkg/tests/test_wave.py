"""Truncated periodic waves: emission range, truncation choice, defect,
variance, shift effect."""
import math

import numpy as np
import pytest

from swave.activation import ActivationKind, make_bump
from swave.dist import InputDist1D
from swave.errors import InvalidParameterError, ResourceLimitError
from swave.wave import (WaveSpec, choose_truncation, default_theta,
                        eval_wave, eval_wave_batch, lattice_theta, make_wave,
                        quasiperiodicity_defect, shift_effect, wave_variance)


@pytest.fixture(scope="module")
def psi():
    return make_bump(ActivationKind("sigmoid", 1.0))


def test_default_theta_is_four_radii(psi):
    assert default_theta(psi) == pytest.approx(4.0 * psi.essential_radius)


def test_lattice_theta():
    assert lattice_theta(ActivationKind("sigmoid", 0.5)) == pytest.approx(8.0)
    assert lattice_theta(ActivationKind("relu", 4.0)) == pytest.approx(1.0)


def test_emitted_range_in_unit_interval(psi):
    w = make_wave(psi, default_theta(psi), 6)
    x = np.linspace(-3.5 * w.theta, 3.5 * w.theta, 40001)
    v = eval_wave_batch(w, x)
    assert np.min(v) >= -1e-12
    assert np.max(v) <= 1.0 + 1e-12
    # sup over one period is pinned to 1 by the rescale
    period = x[(x >= 0.0) & (x <= w.theta)]
    assert np.max(eval_wave_batch(w, period)) == pytest.approx(1.0, abs=1e-9)


def test_scalar_matches_batch(psi):
    w = make_wave(psi, 9.0, 4)
    xs = [-7.3, 0.0, 2.2, 15.9]
    batch = eval_wave_batch(w, np.array(xs))
    for x, v in zip(xs, batch):
        assert eval_wave(w, x) == v


def test_raw_wave_option(psi):
    w = make_wave(psi, 9.0, 4, rescale=False)
    assert w.scale == 1.0 and w.offset == 0.0
    expected = sum(psi(k * 9.0) for k in range(-4, 5))
    assert eval_wave(w, 0.0) == pytest.approx(expected, abs=1e-12)


def test_choose_truncation_postconditions(psi):
    M, delta, theta = 12.0, 1e-6, 6.0
    m = choose_truncation(psi, M, delta, theta=theta)
    assert m * theta / 2.0 >= M
    from swave.activation import tail_integral
    assert tail_integral(psi, m * theta / 2.0) < 4.0 * delta * psi.essential_radius
    if m > math.ceil(2.0 * M / theta):
        assert tail_integral(psi, (m - 1) * theta / 2.0) >= \
            4.0 * delta * psi.essential_radius


def test_choose_truncation_cap(psi):
    with pytest.raises(ResourceLimitError):
        choose_truncation(psi, 5.0, 1e-300, theta=4.0, m_cap=64)


def test_choose_truncation_rejects_bad_args(psi):
    with pytest.raises(InvalidParameterError):
        choose_truncation(psi, -1.0, 1e-6)
    with pytest.raises(InvalidParameterError):
        choose_truncation(psi, 1.0, 0.0)


def test_defect_shrinks_with_m(psi):
    # narrow theta so the tail condition, not coverage, decides m
    theta, M = 2.0, 6.0
    m_small = choose_truncation(psi, M, 1e-3, theta=theta)
    m_big = choose_truncation(psi, M, 1e-9, theta=theta)
    assert m_big > m_small
    d_small = quasiperiodicity_defect(make_wave(psi, theta, m_small), M)
    d_big = quasiperiodicity_defect(make_wave(psi, theta, m_big), M)
    assert d_big < d_small
    assert d_big < 1e-7


def test_defect_bounded_by_tail_budget(psi):
    # the m chosen for (M, delta) keeps the raw defect within a few tail units
    theta = default_theta(psi)
    for delta in (1e-4, 1e-6):
        m = choose_truncation(psi, 2.0 * theta, delta, theta=theta)
        w = make_wave(psi, theta, m)
        defect = quasiperiodicity_defect(w, 2.0 * theta)
        assert defect <= 8.0 * delta * psi.essential_radius


def test_variance_positive_and_stable(psi):
    w = make_wave(psi, default_theta(psi), 8)
    v = wave_variance(w)
    assert v > 0.0
    # grid reference on one period
    x = np.linspace(0.0, w.theta, 200001, endpoint=False)
    ref = float(np.var(eval_wave_batch(w, x)))
    assert v == pytest.approx(ref, rel=1e-4)


def test_variance_relu_breakpoints():
    psi = make_bump(ActivationKind("relu", 1.0))
    w = make_wave(psi, default_theta(psi), 8)
    v = wave_variance(w)
    x = np.linspace(0.0, w.theta, 200001, endpoint=False)
    ref = float(np.var(eval_wave_batch(w, x)))
    assert v == pytest.approx(ref, rel=1e-4)


def test_shift_effect_within_bound(psi):
    w = make_wave(psi, default_theta(psi), 8)
    dist = InputDist1D("gaussian")
    effect, bound = shift_effect(w, dist, z=1.0, n_mc=20_000, seed=3)
    assert 0.0 <= effect <= bound


def test_shift_effect_deterministic(psi):
    w = make_wave(psi, default_theta(psi), 6)
    dist = InputDist1D("laplace")
    a = shift_effect(w, dist, z=0.5, n_mc=20_000, seed=11)
    b = shift_effect(w, dist, z=0.5, n_mc=20_000, seed=11)
    assert a == b


def test_shift_effect_rejects_small_sample(psi):
    w = make_wave(psi, default_theta(psi), 6)
    with pytest.raises(InvalidParameterError):
        shift_effect(w, InputDist1D("gaussian"), z=1.0, n_mc=100, seed=0)


def test_wavespec_validation(psi):
    with pytest.raises(InvalidParameterError):
        WaveSpec(psi=psi, theta=0.0, m=4, scale=1.0, offset=0.0)
    with pytest.raises(InvalidParameterError):
        WaveSpec(psi=psi, theta=5.0, m=-1, scale=1.0, offset=0.0)
