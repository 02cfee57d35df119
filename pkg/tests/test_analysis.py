import math

import numpy as np
import pytest

from dopo import SimParams, Simulation, TrajectoryRecorder
from dopo.analysis import (accumulate_wigner, angle_scan, block_bootstrap,
                           correlation_time, demodulate, far_field,
                           intensity_difference, kurtosis, mode_pair,
                           principal_axis_angle, shot_level_analytic,
                           shot_noise_level, squeezing_ratio,
                           superposition_quadrature, vacuum_mode_variance)
from dopo.dynamics import ModeSeries
from dopo.spectral import Grid

RNG = np.random.default_rng(1234)
KC = math.sqrt(0.125)


def make_series(k, values, dt=0.25, k_index=0):
    times = dt * np.arange(1, len(values) + 1)
    return ModeSeries(k_index, k, times, np.asarray(values, dtype=complex))


def gaussian_pair(n, var_a=1.0, var_b=1.0, seed=0):
    rng = np.random.default_rng(seed)
    a = math.sqrt(var_a / 2) * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    b = math.sqrt(var_b / 2) * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    return make_series(KC, a), make_series(-KC, b)


def test_demodulate_removes_rotation():
    v = 0.42
    times = 0.25 * np.arange(1, 101)
    amp = 2.0 * np.exp(1j * v * KC * times)
    series = ModeSeries(51, KC, times, amp)
    out = demodulate(series, v)
    assert np.allclose(out.values(), 2.0, atol=1e-12)
    # original amplitudes preserved alongside
    assert np.array_equal(out.amplitudes, amp)


def test_superposition_quadrature_identities():
    a = make_series(KC, [1.0 + 0j])
    b = make_series(-KC, [1j])
    xp, xm = superposition_quadrature(a, b, 0.0)
    assert xp[0] == pytest.approx(1.0)
    assert xm[0] == pytest.approx(1.0)
    xp, _ = superposition_quadrature(a, b, math.pi / 2)
    assert xp[0] == pytest.approx(-1.0)


def test_superposition_quadrature_rejects_mismatch():
    a = make_series(KC, [1.0, 2.0])
    b = make_series(-KC, [1.0])
    with pytest.raises(ValueError):
        superposition_quadrature(a, b, 0.0)
    c = make_series(-0.9 * KC, [1.0, 2.0])
    with pytest.raises(ValueError):
        superposition_quadrature(a, c, 0.0)


def test_correlation_time_white_and_ar1():
    rng = np.random.default_rng(2)
    white = rng.standard_normal(40000)
    assert correlation_time(white, 0.25) < 0.4
    rho = 0.9
    x = np.empty(200000)
    x[0] = 0.0
    eta = rng.standard_normal(x.size)
    for i in range(1, x.size):
        x[i] = rho * x[i - 1] + eta[i]
    tau = correlation_time(x, 1.0)
    # integrated time ~ (1+rho)/(1-rho) = 19, truncated at rho<0.05
    assert 10.0 < tau < 26.0


def test_block_bootstrap_covers_truth():
    rng = np.random.default_rng(3)
    x = rng.standard_normal(20000)
    est, lo, hi = block_bootstrap(x, lambda v: np.var(v), block=10)
    assert est == pytest.approx(np.var(x), rel=1e-12)
    assert lo < 1.0 < hi
    assert hi - lo < 0.1


def test_shot_noise_level_matches_construction():
    a, b = gaussian_pair(200000, var_a=0.7, var_b=0.7, seed=4)
    # Var Re(a - b) = (0.7 + 0.7)/2
    assert shot_noise_level(a, b) == pytest.approx(0.7, rel=0.02)
    short = make_series(KC, np.ones(10))
    with pytest.raises(ValueError):
        shot_noise_level(short, make_series(-KC, np.ones(10)))


def test_shot_level_analytic_formula():
    p = SimParams(epsilon=2e-3, dx=0.5)
    assert shot_level_analytic(p) == pytest.approx((2e-3) ** 2 / 1.0, rel=1e-15)


def test_squeezing_ratio_on_synthetic_data():
    rng = np.random.default_rng(5)
    x = math.sqrt(0.5) * rng.standard_normal(50000)
    stats = squeezing_ratio(x, shot_level=1.0, dt_sample=0.25)
    assert stats.ratio == pytest.approx(0.5, rel=0.05)
    assert stats.ci_low < stats.ratio < stats.ci_high
    assert stats.var_normal_normalized == pytest.approx(stats.ratio - 1.0)
    assert not stats.nonstationary
    with pytest.raises(ValueError):
        squeezing_ratio(x, shot_level=0.0, dt_sample=0.25)


def test_squeezing_ratio_flags_nonstationary():
    rng = np.random.default_rng(6)
    x = rng.standard_normal(40000)
    x[20000:] *= 4.0
    with pytest.warns(UserWarning):
        stats = squeezing_ratio(x, shot_level=1.0, dt_sample=0.25)
    assert stats.nonstationary


def test_angle_scan_finds_squeezed_angle():
    rng = np.random.default_rng(7)
    n = 100000
    phi = -math.pi / 8
    # a - b squeezed along angle phi, a + b independent and loud
    d = (0.1 * rng.standard_normal(n) + 1j * rng.standard_normal(n)) * np.exp(-1j * phi)
    s = 3.0 * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    a = make_series(KC, (s + d) / 2)
    b = make_series(-KC, (s - d) / 2)
    scan = angle_scan(a, b, shot_level=1.0)
    assert scan.theta_min == pytest.approx(phi, abs=math.pi / 64 + 1e-12)
    assert scan.ratios.min() < scan.ratios.max()


def test_vacuum_mode_variance():
    a, b = gaussian_pair(100000, var_a=0.3, var_b=0.3, seed=8)
    assert vacuum_mode_variance([a, b]) == pytest.approx(0.3, rel=0.02)
    assert vacuum_mode_variance(a) == pytest.approx(0.3, rel=0.03)


def test_intensity_difference_vacuum_is_zero():
    a, b = gaussian_pair(100000, var_a=0.5, var_b=0.5, seed=9)
    out = intensity_difference(a, b, vacuum_variance=0.5, dt_sample=0.25)
    assert out.ci_low < 0.0 < out.ci_high
    assert abs(out.value) < 0.05


def test_intensity_difference_independent_coherent_is_zero():
    rng = np.random.default_rng(10)
    n = 200000
    alpha = 2.0
    vac = 0.5
    a = alpha + math.sqrt(vac / 2) * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    b = alpha + math.sqrt(vac / 2) * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    out = intensity_difference(make_series(KC, a), make_series(-KC, b),
                               vacuum_variance=vac, dt_sample=0.25)
    assert out.ci_low < 0.0 < out.ci_high


def test_intensity_difference_detects_twin_beams():
    rng = np.random.default_rng(11)
    n = 100000
    a = math.sqrt(0.25) * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    twin_a = make_series(KC, a)
    twin_b = make_series(-KC, a.copy())  # perfectly correlated intensities
    out = intensity_difference(twin_a, twin_b, vacuum_variance=0.5, dt_sample=0.25)
    assert out.value == pytest.approx(-0.5, abs=0.05)
    assert out.ci_high < 0.0


def test_wigner_histogram_properties():
    rng = np.random.default_rng(12)
    c = 1.5 + 0.5j + 0.3 * (rng.standard_normal(60000) + 1j * rng.standard_normal(60000))
    hist = accumulate_wigner(c, n_bins=64)
    assert hist.probability().sum() == pytest.approx(1.0)
    mode = hist.mode()
    assert mode[0] == pytest.approx(1.5, abs=0.1)
    assert mode[1] == pytest.approx(0.5, abs=0.1)
    # marginal agrees with a direct histogram of the real parts
    direct, _ = np.histogram(c.real, bins=hist.re_edges)
    assert np.allclose(hist.marginal_re(), direct / direct.sum(), atol=1e-12)
    merged = hist.merge(hist)
    assert merged.n_samples == 2 * hist.n_samples
    assert np.array_equal(merged.counts, 2 * hist.counts)
    with pytest.raises(ValueError):
        accumulate_wigner(np.array([]))


def test_wigner_cuts():
    rng = np.random.default_rng(13)
    c = rng.standard_normal(50000) + 0.1j * rng.standard_normal(50000)
    hist = accumulate_wigner(c, n_bins=64)
    xs, cut = hist.cut_re()
    assert xs.shape == cut.shape
    assert cut[len(cut) // 2] >= cut[0]


def test_principal_axis_angle():
    rng = np.random.default_rng(14)
    c = 3.0 * rng.standard_normal(50000) + 0.2j * rng.standard_normal(50000)
    assert principal_axis_angle(c) == pytest.approx(0.0, abs=0.02)
    rot = c * np.exp(1j * math.pi / 3)
    assert principal_axis_angle(rot) == pytest.approx(math.pi / 3, abs=0.02)


def test_kurtosis():
    rng = np.random.default_rng(15)
    assert kurtosis(rng.standard_normal(400000)) == pytest.approx(3.0, abs=0.1)
    assert kurtosis(np.array([1.0, -1.0] * 100)) == pytest.approx(1.0)


def test_far_field_peak():
    grid = Grid(64, 1.0)
    b = 6
    field = np.exp(1j * grid.k[b] * grid.x)
    k_sorted, mag = far_field(field, grid)
    assert k_sorted[np.argmax(mag)] == pytest.approx(grid.k[b])
    assert np.all(np.diff(k_sorted) > 0)


def test_mode_pair_from_run():
    p = SimParams(n_points=64, dx=1.0, t_transient=0.0, seed=44)
    grid = Grid.from_params(p)
    idx = grid.mode_index(KC)
    rec = TrajectoryRecorder(mode_indices=(idx, grid.conjugate_index(idx)))
    res = Simulation(p).run(50.0, rec)
    sp, sm = mode_pair(res, KC)
    assert sp.k == pytest.approx(-sm.k)
    assert sp.demodulated is not None
    with pytest.raises(KeyError):
        mode_pair(res, 3 * KC)
