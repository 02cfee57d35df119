import json
import math

import numpy as np
import pytest

import dopo
from dopo import SimParams, Simulation, TrajectoryRecorder
from dopo.analysis import accumulate_wigner
from dopo.io import (ConfigError, RunManifest, build_params, check_compatible,
                     default_mode_targets, load_checkpoint, params_from_dict,
                     parse_config, read_mode_series_csv, read_spacetime,
                     save_checkpoint, write_histogram, write_mode_series_csv,
                     write_spacetime)
from dopo.spectral import CONVENTION, Grid

KC = math.sqrt(0.125)


def small_run(tmp_path, **kw):
    defaults = dict(n_points=64, dx=1.0, t_transient=0.0, seed=17)
    defaults.update(kw)
    p = SimParams(**defaults)
    grid = Grid.from_params(p)
    idx = grid.mode_index(KC)
    rec = TrajectoryRecorder(mode_indices=(idx, grid.conjugate_index(idx)),
                             store_field=True, space_stride=2)
    res = Simulation(p).run(20.0, rec)
    manifest = RunManifest(command="simulate", params=p.as_dict())
    return p, res, manifest


def test_parse_config(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\nf = 1.01\nseed=9   # inline comment\n\nepsilon=1e-3\n")
    values = parse_config(cfg)
    assert values == {"f": "1.01", "seed": "9", "epsilon": "1e-3"}


def test_parse_config_unknown_key_suggests(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("epsilonn = 1e-3\n")
    with pytest.raises(ConfigError, match="epsilon"):
        parse_config(cfg)


def test_parse_config_syntax_error(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("just words\n")
    with pytest.raises(ConfigError, match="key=value"):
        parse_config(cfg)


def test_build_params_overrides_win():
    params, options = build_params({"f": "1.01", "duration": "100"},
                                   {"f": 1.05, "store_field": "yes"})
    assert params.f == 1.05
    assert options.duration == 100.0
    assert options.store_field


def test_build_params_supergaussian_and_targets():
    params, options = build_params(
        {"pump": "supergaussian", "pump_width_fraction": "0.25",
         "pump_order": "8", "k_targets": "0.35,0.37"})
    assert params.pump_profile.kind == "supergaussian"
    assert params.pump_profile.order == 8
    assert options.k_targets == [0.35, 0.37]


def test_build_params_rejects_bad_values():
    with pytest.raises(ConfigError):
        build_params({"f": "fast"})
    with pytest.raises(ConfigError):
        build_params({"pump": "triangle"})
    with pytest.raises(ConfigError):
        build_params({"frequency": "2"})


def test_mode_series_csv_round_trip(tmp_path):
    p, res, manifest = small_run(tmp_path)
    path = tmp_path / "modes.csv"
    write_mode_series_csv(path, res, manifest)
    header, params, modes = read_mode_series_csv(path)
    assert header["convention"] == CONVENTION
    assert header["manifest"] == manifest.hash
    assert float(params["f"]) == p.f
    assert int(params["n_points"]) == p.n_points
    for idx, series in res.modes.items():
        assert np.array_equal(modes[idx].amplitudes, series.amplitudes)
        assert np.array_equal(modes[idx].times, series.times)
        assert modes[idx].k == pytest.approx(series.k, rel=1e-15)


def test_check_compatible(tmp_path):
    p, res, manifest = small_run(tmp_path)
    path = tmp_path / "a.csv"
    write_mode_series_csv(path, res, manifest)
    header, params, _ = read_mode_series_csv(path)
    check_compatible(params, dict(params), header, dict(header))
    wrong = dict(params)
    wrong["epsilon"] = "0.999"
    with pytest.raises(ConfigError, match="epsilon"):
        check_compatible(params, wrong, header, header)
    bad_header = dict(header)
    bad_header["convention"] = "other"
    with pytest.raises(ConfigError, match="convention"):
        check_compatible(params, params, header, bad_header)


def test_spacetime_round_trip(tmp_path):
    p, res, manifest = small_run(tmp_path)
    path = tmp_path / "field.dopo"
    write_spacetime(path, res, manifest)
    assert path.read_bytes()[:4] == b"DOPO"
    header, times, frames = read_spacetime(path)
    assert np.array_equal(times, res.times)
    assert np.array_equal(frames, res.field_frames)
    assert header["manifest"] == manifest.hash


def test_histogram_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    hist = accumulate_wigner(rng.standard_normal(5000)
                             + 1j * rng.standard_normal(5000), n_bins=32)
    manifest = RunManifest(command="analyze", params={})
    path = tmp_path / "wigner.doph"
    write_histogram(path, hist, manifest, label="test")
    assert path.read_bytes()[:4] == b"DOPH"
    from dopo.io import read_histogram
    header, loaded = read_histogram(path)
    assert np.array_equal(loaded.counts, hist.counts)
    assert np.allclose(loaded.re_edges, hist.re_edges)
    assert loaded.n_samples == hist.n_samples
    assert header["label"] == "test"


def test_checkpoint_resume_is_bit_exact(tmp_path):
    p = SimParams(n_points=64, dx=1.0, seed=23)
    straight = Simulation(p)
    straight.step(640)

    first = Simulation(p)
    first.step(320)
    path = tmp_path / "chk.npz"
    save_checkpoint(path, first)
    resumed = load_checkpoint(path)
    resumed.step(320)

    assert resumed.state.t == pytest.approx(straight.state.t)
    assert np.array_equal(resumed.state.signal, straight.state.signal)
    assert np.array_equal(resumed.state.pump, straight.state.pump)
    assert resumed.steps_taken == 640


def test_manifest_round_trip_and_tamper(tmp_path):
    manifest = RunManifest(command="simulate", params=SimParams().as_dict(),
                           steps=10)
    path = tmp_path / "manifest.json"
    manifest.save(path)
    loaded = RunManifest.load(path)
    assert loaded.hash == manifest.hash
    assert loaded.steps == 10
    blob = json.loads(path.read_text())
    blob["params"]["f"] = 9.9
    path.write_text(json.dumps(blob))
    with pytest.raises(ConfigError):
        RunManifest.load(path)


def test_params_from_dict_round_trip():
    p = SimParams(f=1.01, delta0=0.3).with_supergaussian(width_fraction=0.2, order=6)
    q = params_from_dict(p.as_dict())
    assert q == p


def test_default_mode_targets():
    p = SimParams()
    grid = Grid.from_params(p)
    targets = default_mode_targets(grid, p.delta1)
    assert len(targets) == len(set(targets)) == 6
    assert grid.mode_index(KC) in targets
    assert grid.conjugate_index(grid.mode_index(KC)) in targets
    for idx in targets:
        assert grid.conjugate_index(idx) in targets
