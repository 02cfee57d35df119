"""Command-line entry point: simulate / reference / stability / analyze / sweep."""
from __future__ import annotations

import argparse
import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import analysis, io, plots
from .dynamics import (Simulation, TrajectoryRecorder, TrajectoryResult,
                       run_reference)
from .params import validate
from .spectral import Grid
from .stability import critical_wavenumber, stability_diagram


def _fmt(x) -> str:
    """Full-precision decimal form, always a plain Python float repr."""
    return repr(float(x))


def _add_param_flags(p: argparse.ArgumentParser):
    p.add_argument("--config", help="key=value configuration file")
    p.add_argument("--f", type=float, help="scaled pump amplitude")
    p.add_argument("--epsilon", type=float, help="signal noise amplitude")
    p.add_argument("--seed", type=int)
    p.add_argument("--duration", type=float)
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override any configuration key (repeatable)")


def _collect_overrides(args) -> dict:
    overrides: dict = {}
    for item in args.set:
        if "=" not in item:
            raise io.ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        key, value = item.split("=", 1)
        overrides[key.strip()] = value.strip()
    for key in ("f", "epsilon", "seed", "duration"):
        value = getattr(args, key, None)
        if value is not None:
            overrides[key] = value
    return overrides


def _resolve(args):
    file_values = io.parse_config(args.config) if args.config else {}
    params, options = io.build_params(file_values, _collect_overrides(args))
    report = validate(params)
    if not report.ok:
        raise io.ConfigError("invalid parameters: " + "; ".join(report.violations))
    for w in report.warnings:
        print(f"warning: {w}", file=sys.stderr)
    return params, options


def _recorder_for(params, options, grid: Grid) -> TrajectoryRecorder:
    targets = io.default_mode_targets(grid, params.delta1)
    for k in options.k_targets:
        idx = grid.mode_index(k)
        for j in (idx, grid.conjugate_index(idx)):
            if j not in targets:
                targets.append(j)
    return TrajectoryRecorder(
        mode_indices=tuple(targets),
        store_field=options.store_field,
        space_stride=options.space_stride,
        accumulate_far_field=True,
    )


def _merge_results(first: TrajectoryResult, second: TrajectoryResult) -> TrajectoryResult:
    modes = {}
    for idx, series in first.modes.items():
        tail = second.modes[idx]
        modes[idx] = type(series)(
            idx, series.k,
            np.concatenate([series.times, tail.times]),
            np.concatenate([series.amplitudes, tail.amplitudes]),
        )
    frames = None
    if first.field_frames is not None:
        frames = np.concatenate([first.field_frames, second.field_frames])
    far = None
    if first.far_mean_sq is not None:
        n1 = np.sum(first.times >= first.params.t_transient)
        n2 = np.sum(second.times >= second.params.t_transient)
        tot = max(1, n1 + n2)
        far = (first.far_mean_sq * n1 + second.far_mean_sq * n2) / tot
    return TrajectoryResult(
        params=first.params, grid=first.grid,
        times=np.concatenate([first.times, second.times]),
        modes=modes, field_frames=frames, far_mean_sq=far,
        final_state=second.final_state, steps=first.steps + second.steps,
    )


def cmd_simulate(args) -> int:
    params, options = _resolve(args)
    out = plots.ensure_dir(args.out)

    t0 = time.time()
    if args.resume:
        sim = io.load_checkpoint(args.resume)
        params = sim.params
    else:
        sim = Simulation(params)
    grid = sim.grid
    recorder = _recorder_for(params, options, grid)

    remaining = options.duration - sim.state.t
    if remaining <= 0:
        raise io.ConfigError("resumed run already covers the requested duration")
    result = None
    checkpoint_path = out / "checkpoint.npz"
    sample_t = params.sample_interval
    segment = options.duration if not args.checkpoint_every else max(
        sample_t, round(args.checkpoint_every / sample_t) * sample_t)
    while remaining > 1e-9:
        chunk = min(segment, remaining)
        part = sim.run(chunk, recorder)
        result = part if result is None else _merge_results(result, part)
        remaining -= chunk
        if args.checkpoint_every:
            io.save_checkpoint(checkpoint_path, sim)

    manifest = io.RunManifest(command="simulate", params=params.as_dict(),
                              wall_seconds=time.time() - t0, steps=result.steps)
    io.write_mode_series_csv(out / "modes.csv", result, manifest)
    manifest.outputs.append(str(out / "modes.csv"))

    if result.far_mean_sq is not None:
        k_m = result.dominant_mode(k_min=0.0)
        (out / "far_field_mean.csv").write_text(
            "\n".join(["# dopo-far-field-mean v1"]
                      + [f"# manifest={manifest.hash}"]
                      + [f"# k_M_index={k_m} k_M={_fmt(grid.k[k_m])}"]
                      + ["k,mean_sq"]
                      + [f"{_fmt(grid.k[i])},{_fmt(result.far_mean_sq[i])}"
                         for i in np.fft.fftshift(np.arange(grid.n_points))]) + "\n")
        manifest.outputs.append(str(out / "far_field_mean.csv"))

    if result.field_frames is not None:
        io.write_spacetime(out / "spacetime.dopo", result, manifest)
        x = grid.x[:: recorder.space_stride]
        plots.spacetime_plot(out / "near_field.svg", result.times, x, result.field_frames)
        stride_t = max(1, result.times.size // 500)
        rows = ["# dopo-near-field-plot-data v1", f"# manifest={manifest.hash}",
                "t," + ",".join(_fmt(v) for v in x)]
        for j in range(0, result.times.size, stride_t):
            rows.append(_fmt(result.times[j]) + "," +
                        ",".join(_fmt(v) for v in result.field_frames[j].real))
        (out / "near_field.csv").write_text("\n".join(rows) + "\n")
        spec_frames = np.fft.fft(result.field_frames, axis=-1) / math.sqrt(
            result.field_frames.shape[1])
        plots.far_field_plot(out / "far_field.svg", result.times,
                             2 * np.pi * np.fft.fftfreq(result.field_frames.shape[1],
                                                        d=params.dx * recorder.space_stride),
                             spec_frames)
        manifest.outputs += [str(out / "spacetime.dopo"), str(out / "near_field.svg"),
                             str(out / "near_field.csv"), str(out / "far_field.svg")]

    manifest.wall_seconds = time.time() - t0
    manifest.save(out / "manifest.json")
    print(f"simulate: {result.steps} steps in {manifest.wall_seconds:.1f}s -> {out}")
    return 0


def cmd_reference(args) -> int:
    params, options = _resolve(args)
    out = plots.ensure_dir(args.out)
    grid = Grid.from_params(params)
    recorder = _recorder_for(params, options, grid)
    t0 = time.time()
    result = run_reference(params, options.duration, recorder)
    manifest = io.RunManifest(command="reference", params=params.as_dict(),
                              wall_seconds=time.time() - t0, steps=result.steps)
    io.write_mode_series_csv(out / "modes.csv", result, manifest)
    manifest.outputs.append(str(out / "modes.csv"))
    manifest.save(out / "manifest.json")
    print(f"reference: {result.steps} steps in {manifest.wall_seconds:.1f}s -> {out}")
    return 0


def cmd_stability(args) -> int:
    out = plots.ensure_dir(args.out)
    delta1_values = np.linspace(args.delta1_min, args.delta1_max, args.n_delta1)
    v_values = [float(tok) for tok in args.v.split(",")]
    rows = stability_diagram(delta1_values, v_values)
    manifest = io.RunManifest(
        command="stability",
        params={"delta1_min": args.delta1_min, "delta1_max": args.delta1_max,
                "n_delta1": args.n_delta1, "v": v_values},
    )
    lines = ["# dopo-stability-diagram v1", f"# manifest={manifest.hash}",
             "delta1,v,f_c,converged"]
    for row in rows:
        lines.append(f"{_fmt(row['delta1'])},{_fmt(row['v'])},"
                     f"{_fmt(row['f_c'])},{row['converged']}")
    (out / "stability.csv").write_text("\n".join(lines) + "\n")
    plots.stability_plot(out / "stability.svg", [r for r in rows if r["converged"]])
    manifest.outputs += [str(out / "stability.csv"), str(out / "stability.svg")]
    manifest.save(out / "manifest.json")
    print(f"stability: {len(rows)} points -> {out}")
    return 0


def _series_pair(modes: dict, params: dict, k_target: float):
    grid = Grid(int(params["n_points"]), float(params["dx"]))
    idx = grid.mode_index(abs(k_target))
    jdx = grid.conjugate_index(idx)
    if idx not in modes or jdx not in modes:
        raise io.ConfigError(f"trajectory file does not record modes {idx}/{jdx}")
    v = float(params["v"])
    return (analysis.demodulate(modes[idx], v), analysis.demodulate(modes[jdx], v))


def cmd_analyze(args) -> int:
    out = plots.ensure_dir(args.out)
    traj_header, traj_params, traj_modes = io.read_mode_series_csv(args.trajectory)
    ref_header, ref_params, ref_modes = io.read_mode_series_csv(args.reference)
    io.check_compatible(traj_params, ref_params, traj_header, ref_header)

    t_transient = float(traj_params["t_transient"])
    traj_modes = {i: s.after(t_transient) for i, s in traj_modes.items()}
    ref_modes = {i: s.after(float(ref_params["t_transient"])) for i, s in ref_modes.items()}

    k_target = args.k if args.k is not None else critical_wavenumber(
        float(traj_params["delta1"]))
    sp, sm = _series_pair(traj_modes, traj_params, k_target)
    rp, rm = _series_pair(ref_modes, ref_params, k_target)
    dt_sample = float(traj_params["sample_interval"])

    shot = analysis.shot_noise_level(rp, rm, theta=0.0, sign=-1)
    manifest = io.RunManifest(
        command="analyze",
        params={"trajectory": dict(traj_params), "k_target": k_target},
        inputs=[str(args.trajectory), str(args.reference)],
    )

    rows = ["# dopo-quadrature-variances v1", f"# manifest={manifest.hash}",
            f"# shot_level={_fmt(shot)}",
            "quadrature,theta,var_symmetric,ratio,ci_low,ci_high"]
    verdicts = {}
    for name, sign in (("X+", +1), ("X-", -1)):
        xp, xm = analysis.superposition_quadrature(sp, sm, 0.0)
        x = xp if sign > 0 else xm
        stats = analysis.squeezing_ratio(x, shot, dt_sample)
        rows.append(f"{name},0.0,{_fmt(stats.var_symmetric)},{_fmt(stats.ratio)},"
                    f"{_fmt(stats.ci_low)},{_fmt(stats.ci_high)}")
        if sign < 0:
            verdicts["x_minus_ratio"] = stats.ratio
            verdicts["x_minus_ci"] = [stats.ci_low, stats.ci_high]
            verdicts["squeezed"] = bool(stats.ci_high < 1.0)
    (out / "variances.csv").write_text("\n".join(rows) + "\n")

    scan = analysis.angle_scan(sp, sm, shot)
    scan_lines = ["# dopo-angle-scan v1", f"# manifest={manifest.hash}",
                  "theta,ratio"]
    for th, r in zip(scan.thetas, scan.ratios):
        scan_lines.append(f"{_fmt(th)},{_fmt(r)}")
    (out / "angle_scan.csv").write_text("\n".join(scan_lines) + "\n")
    plots.angle_scan_plot(out / "angle_scan.svg", scan.thetas, scan.ratios)
    verdicts["theta_min"] = scan.theta_min

    vac = analysis.vacuum_mode_variance([rp, rm])
    idiff = analysis.intensity_difference(sp, sm, vac, dt_sample=dt_sample)
    verdicts["intensity_difference"] = idiff.value
    verdicts["intensity_difference_ci"] = [idiff.ci_low, idiff.ci_high]
    verdicts["twin_beams"] = bool(idiff.ci_high < 0.0)

    hist = analysis.accumulate_wigner((sp.values() + sm.values()) / math.sqrt(2))
    io.write_histogram(out / "wigner.doph", hist, manifest,
                       label=f"superposition k={_fmt(k_target)}")
    plots.histogram_plot(out / "wigner.svg", hist,
                         title=f"W(a(k)+a(-k)), k={k_target:.4f}")

    verdicts["shot_level"] = shot
    verdicts["manifest"] = manifest.hash
    (out / "summary.json").write_text(json.dumps(verdicts, indent=2) + "\n")
    manifest.outputs += [str(out / p) for p in
                         ("variances.csv", "angle_scan.csv", "angle_scan.svg",
                          "wigner.doph", "wigner.svg", "summary.json")]
    manifest.save(out / "manifest.json")
    print(f"analyze: ratio(X-(0))={verdicts['x_minus_ratio']:.3f}, "
          f"theta_min={verdicts['theta_min']:.3f} -> {out}")
    return 0


def _sweep_point(payload):
    params_dict, duration, k_target = payload
    params = io.params_from_dict(params_dict)
    grid = Grid.from_params(params)
    idx = grid.mode_index(k_target)
    jdx = grid.conjugate_index(idx)
    rec = TrajectoryRecorder(mode_indices=(idx, jdx))
    traj = Simulation(params).run(duration, rec)
    ref_rng = np.random.default_rng(params.seed + 101)
    ref = run_reference(params, min(duration, 2e4), rec, rng=ref_rng)
    sp, sm = analysis.mode_pair(traj, k_target)
    sp, sm = sp.after(params.t_transient), sm.after(params.t_transient)
    rp, rm = analysis.mode_pair(ref, k_target)
    rp, rm = rp.after(params.t_transient), rm.after(params.t_transient)
    shot = analysis.shot_noise_level(rp, rm, theta=0.0, sign=-1)
    _, xm = analysis.superposition_quadrature(sp, sm, 0.0)
    stats = analysis.squeezing_ratio(xm, shot, params.sample_interval, n_boot=100)
    return {"f": params.f, "epsilon": params.epsilon, "ratio": stats.ratio,
            "ci_low": stats.ci_low, "ci_high": stats.ci_high, "shot": shot}


def cmd_sweep(args) -> int:
    params, options = _resolve(args)
    out = plots.ensure_dir(args.out)
    f_values = [float(t) for t in args.f_values.split(",")] if args.f_values else [params.f]
    eps_values = ([float(t) for t in args.epsilon_values.split(",")]
                  if args.epsilon_values else [params.epsilon])
    k_target = critical_wavenumber(params.delta1)
    jobs = []
    for f in f_values:
        for eps in eps_values:
            p = params.with_f(f)
            p = io.params_from_dict({**p.as_dict(), "epsilon": eps})
            jobs.append((p.as_dict(), options.duration, k_target))

    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            results = list(pool.map(_sweep_point, jobs))
    else:
        results = [_sweep_point(j) for j in jobs]

    manifest = io.RunManifest(command="sweep", params=params.as_dict())
    lines = ["# dopo-squeezing-sweep v1", f"# manifest={manifest.hash}",
             "f,epsilon,ratio,ci_low,ci_high,shot"]
    for r in results:
        lines.append(f"{_fmt(r['f'])},{_fmt(r['epsilon'])},{_fmt(r['ratio'])},"
                     f"{_fmt(r['ci_low'])},{_fmt(r['ci_high'])},{_fmt(r['shot'])}")
    (out / "sweep.csv").write_text("\n".join(lines) + "\n")
    manifest.outputs.append(str(out / "sweep.csv"))
    manifest.save(out / "manifest.json")
    print(f"sweep: {len(results)} points -> {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dopo",
        description="Stochastic simulator for the degenerate OPO with walk-off",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="integrate one stochastic trajectory")
    _add_param_flags(p)
    p.add_argument("--out", required=True)
    p.add_argument("--store-field", action="store_true", dest="store_field_flag")
    p.add_argument("--checkpoint-every", type=float, default=0.0,
                   help="checkpoint cadence in time units (0 = off)")
    p.add_argument("--resume", help="checkpoint file to continue from")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("reference", help="empty-cavity shot-noise calibration run")
    _add_param_flags(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_reference)

    p = sub.add_parser("stability", help="absolute-instability threshold diagram")
    p.add_argument("--delta1-min", type=float, default=-1.0)
    p.add_argument("--delta1-max", type=float, default=-0.05)
    p.add_argument("--n-delta1", type=int, default=20)
    p.add_argument("--v", default="0.2,0.42,0.6")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_stability)

    p = sub.add_parser("analyze", help="squeezing statistics from recorded runs")
    p.add_argument("--trajectory", required=True, help="trajectory modes.csv")
    p.add_argument("--reference", required=True, help="reference modes.csv")
    p.add_argument("--k", type=float, help="target wavenumber (default k_c)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("sweep", help="squeezing-ratio sweep over f and/or epsilon")
    _add_param_flags(p)
    p.add_argument("--f-values", help="comma-separated pump values")
    p.add_argument("--epsilon-values", help="comma-separated noise amplitudes")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "store_field_flag", False):
        args.set = list(args.set) + ["store_field=true"]
    try:
        return args.func(args)
    except (io.ConfigError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
