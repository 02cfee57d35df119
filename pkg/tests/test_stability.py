import math

import numpy as np
import pytest

from dopo.stability import (ABSOLUTELY_UNSTABLE, BELOW_THRESHOLD, CONVECTIVE,
                            absolute_threshold, classify, critical_wavenumber,
                            dispersion, instability_phase, stability_diagram,
                            steady_state)

KC = math.sqrt(0.125)


def test_steady_state_oracle():
    # E0/(1 + i delta0) for E0=1, delta0=1
    assert steady_state(1.0, 1.0) == pytest.approx(0.5 - 0.5j, rel=1e-15)
    assert steady_state(2.0, 0.0) == pytest.approx(2.0)


def test_critical_wavenumber():
    assert critical_wavenumber(-0.25) == pytest.approx(KC, rel=1e-15)
    assert critical_wavenumber(0.1) == 0.0
    assert critical_wavenumber(0.0) == 0.0


def test_dispersion_at_kc():
    br = dispersion(KC, 1.025, -0.25, 0.42)
    # detuning term vanishes at k_c, so lambda+- = -1 + i v k_c +- F
    assert br.lambda_plus == pytest.approx(0.025 + 1j * 0.42 * KC, rel=1e-12)
    assert br.lambda_minus == pytest.approx(-2.025 + 1j * 0.42 * KC, rel=1e-12)


def test_dispersion_peak_below_threshold():
    k = np.linspace(-1.5, 1.5, 4001)
    br = dispersion(k, 0.9, -0.25, 0.42)
    growth = br.lambda_plus.real
    assert growth.max() == pytest.approx(-0.1, abs=1e-6)
    assert abs(abs(k[np.argmax(growth)]) - KC) < 1e-3


def test_threshold_exactness_at_f_one():
    # fine grid that contains k_c itself, so the q = 0 point is sampled
    k = np.unique(np.concatenate([np.linspace(0.0, 1.5, 200001), [KC]]))
    growth = dispersion(k, 1.0, -0.25, 0.42).lambda_plus.real
    assert abs(growth.max()) < 1e-12
    assert abs(k[np.argmax(growth)] - KC) < 1.5 / 200000


def test_instability_phase_properties():
    e_plus, e_minus = instability_phase(KC, 1.025, -0.25, 1.025)
    # the q = delta1 + 2k^2 term vanishes at k_c
    assert e_plus == pytest.approx(1.0, rel=1e-12)
    assert e_minus == pytest.approx(1.0, rel=1e-12)
    # unimodular wherever the root is real (|q| < F)
    k = np.linspace(0.0, 0.6, 50)
    e_plus, e_minus = instability_phase(k, 1.025, -0.25, 1.025)
    assert np.allclose(np.abs(e_plus), 1.0, atol=1e-12)
    assert np.allclose(np.abs(e_minus), 1.0, atol=1e-12)
    with pytest.raises(ValueError):
        instability_phase(KC, 1.025, -0.25, 0.0)


def test_absolute_threshold_anchor():
    fc = absolute_threshold(0.42, -0.25)
    assert fc == pytest.approx(1.0340641015321559, abs=1e-9)


def test_absolute_threshold_monotone_in_walkoff():
    f02 = absolute_threshold(0.2, -0.25)
    f042 = absolute_threshold(0.42, -0.25)
    f06 = absolute_threshold(0.6, -0.25)
    assert 1.0 < f02 < f042 < f06
    assert f02 == pytest.approx(1.0090425729791435, abs=1e-9)
    assert f06 == pytest.approx(1.0624086239016557, abs=1e-9)


def test_absolute_threshold_limits_and_errors():
    assert absolute_threshold(0.0, -0.25) == 1.0
    assert absolute_threshold(1e-3, -0.25) == pytest.approx(1.0, abs=1e-6)
    with pytest.raises(ValueError):
        absolute_threshold(0.42, 0.1)
    with pytest.raises(ValueError):
        absolute_threshold(-0.1, -0.25)


def test_classify_regimes():
    assert classify(0.9, 0.42, -0.25).regime == BELOW_THRESHOLD
    assert classify(1.01, 0.42, -0.25).regime == CONVECTIVE
    assert classify(1.05, 0.42, -0.25).regime == ABSOLUTELY_UNSTABLE
    on = classify(1.0, 0.42, -0.25)
    assert on.regime == CONVECTIVE
    assert on.boundary
    assert classify(1.01, 0.42, -0.25).f_abs == pytest.approx(1.03406, abs=1e-4)


def test_stability_diagram_rows():
    rows = stability_diagram(np.linspace(-1.0, -0.1, 4), [0.2, 0.42])
    assert len(rows) == 8
    assert all(r["converged"] for r in rows)
    # F_c grows with v at fixed delta1
    by_d1 = {}
    for r in rows:
        by_d1.setdefault(r["delta1"], {})[r["v"]] = r["f_c"]
    for d1, curve in by_d1.items():
        assert curve[0.2] < curve[0.42]
    with pytest.raises(ValueError):
        stability_diagram([0.1], [0.42])
