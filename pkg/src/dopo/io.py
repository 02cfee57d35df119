"""Configuration parsing, run manifests and self-describing file formats.

Formats:
  config        plain-text key=value, '#' comments; unknown keys are errors.
  mode CSV      '#'-prefixed provenance header (manifest hash, convention,
                full parameter set), then t plus re/im columns per mode.
  spacetime     little-endian binary: magic "DOPO", version u32,
                header-length u32, JSON header, f64 times, complex frames.
  histogram     little-endian binary: magic "DOPH", version u32,
                header-length u32, JSON header, f64 bin counts.
  checkpoint    npz with full FieldState plus RNG state for bit-exact resume.
"""
from __future__ import annotations

import difflib
import hashlib
import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import WignerHistogram
from .dynamics import ModeSeries, Simulation, TrajectoryResult
from .params import FieldState, PumpProfile, SimParams, SUPERGAUSSIAN, effective_drive
from .spectral import CONVENTION, Grid

SPACETIME_MAGIC = b"DOPO"
HISTOGRAM_MAGIC = b"DOPH"
FORMAT_VERSION = 1

_PARAM_KEYS = {
    "delta0": float, "delta1": float, "v": float, "f": float,
    "epsilon": float, "n_points": int, "dx": float, "dt": float,
    "seed": int, "t_transient": float, "sample_interval": float,
    "pump": str, "pump_width_fraction": float, "pump_order": int,
}
_OPTION_KEYS = {
    "duration": float, "k_targets": str, "store_field": bool,
    "space_stride": int,
}
_ALL_KEYS = {**_PARAM_KEYS, **_OPTION_KEYS}


class ConfigError(ValueError):
    pass


def parse_config(path: str | Path) -> dict[str, str]:
    """Read a key=value file; raises on unknown keys with a suggestion."""
    values: dict[str, str] = {}
    text = Path(path).read_text()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _ALL_KEYS:
            hint = difflib.get_close_matches(key, _ALL_KEYS, n=1)
            extra = f" (did you mean {hint[0]!r}?)" if hint else ""
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}{extra}")
        values[key] = value
    return values


@dataclass
class RunOptions:
    duration: float = 2500.0
    k_targets: list[float] = field(default_factory=list)
    store_field: bool = False
    space_stride: int = 1


def _convert(key: str, value):
    typ = _ALL_KEYS[key]
    try:
        if typ is bool:
            if isinstance(value, bool):
                return value
            return value.strip().lower() in ("1", "true", "yes", "on")
        return typ(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for {key!r}: {value!r}") from exc


def build_params(file_values: dict | None = None,
                 overrides: dict | None = None) -> tuple[SimParams, RunOptions]:
    """Merge config-file values and flag overrides (flags win)."""
    merged: dict = {}
    for source in (file_values or {}, overrides or {}):
        for key, value in source.items():
            if value is None:
                continue
            if key not in _ALL_KEYS:
                hint = difflib.get_close_matches(key, _ALL_KEYS, n=1)
                extra = f" (did you mean {hint[0]!r}?)" if hint else ""
                raise ConfigError(f"unknown key {key!r}{extra}")
            merged[key] = _convert(key, value)

    pump = merged.pop("pump", "flat")
    width_fraction = merged.pop("pump_width_fraction", 0.3)
    order = merged.pop("pump_order", 10)
    options = RunOptions()
    if "duration" in merged:
        options.duration = merged.pop("duration")
    if "k_targets" in merged:
        raw = merged.pop("k_targets")
        options.k_targets = [float(tok) for tok in str(raw).split(",") if tok.strip()]
    if "store_field" in merged:
        options.store_field = merged.pop("store_field")
    if "space_stride" in merged:
        options.space_stride = merged.pop("space_stride")

    params = SimParams(**merged)
    if pump == SUPERGAUSSIAN:
        params = params.with_supergaussian(width_fraction=width_fraction, order=order)
    elif pump != "flat":
        raise ConfigError(f"unknown pump kind {pump!r}")
    return params, options


# ---------------------------------------------------------------------------
# manifest

@dataclass
class RunManifest:
    """Provenance record every output file points back to."""

    command: str
    params: dict
    inputs: list[str] = field(default_factory=list)
    outputs: list[str] = field(default_factory=list)
    wall_seconds: float = 0.0
    steps: int = 0
    version: str = __version__
    convention: str = CONVENTION

    @property
    def hash(self) -> str:
        payload = json.dumps(
            {"command": self.command, "params": self.params,
             "version": self.version, "convention": self.convention},
            sort_keys=True,
        )
        return hashlib.sha256(payload.encode()).hexdigest()[:16]

    def to_dict(self) -> dict:
        return {
            "command": self.command, "params": self.params,
            "inputs": self.inputs, "outputs": self.outputs,
            "wall_seconds": self.wall_seconds, "steps": self.steps,
            "version": self.version, "convention": self.convention,
            "hash": self.hash,
        }

    def save(self, path: str | Path):
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "RunManifest":
        d = json.loads(Path(path).read_text())
        m = cls(command=d["command"], params=d["params"], inputs=d["inputs"],
                outputs=d["outputs"], wall_seconds=d["wall_seconds"],
                steps=d["steps"], version=d["version"], convention=d["convention"])
        if m.hash != d["hash"]:
            raise ConfigError(f"manifest hash mismatch in {path}")
        return m


def _header_lines(manifest: RunManifest) -> list[str]:
    lines = [f"# manifest={manifest.hash}", f"# convention={manifest.convention}",
             f"# version={manifest.version}"]
    for key in sorted(manifest.params):
        lines.append(f"# param:{key}={manifest.params[key]}")
    return lines


# ---------------------------------------------------------------------------
# mode-series CSV

def write_mode_series_csv(path: str | Path, result: TrajectoryResult,
                          manifest: RunManifest):
    """t plus re/im columns for every recorded far-field mode."""
    indices = sorted(result.modes)
    lines = ["# dopo-mode-series v1"] + _header_lines(manifest)
    for idx in indices:
        lines.append(f"# mode:index={idx} k={result.modes[idx].k!r}")
    cols = ["t"] + [f"{part}_{idx}" for idx in indices for part in ("re", "im")]
    lines.append(",".join(cols))
    data = np.empty((result.times.size, 1 + 2 * len(indices)))
    data[:, 0] = result.times
    for col, idx in enumerate(indices):
        amp = result.modes[idx].amplitudes
        data[:, 1 + 2 * col] = amp.real
        data[:, 2 + 2 * col] = amp.imag
    body = "\n".join(",".join(repr(float(x)) for x in row) for row in data)
    Path(path).write_text("\n".join(lines) + "\n" + body + "\n")


def read_mode_series_csv(path: str | Path):
    """Returns (header dict, params dict, {index: ModeSeries})."""
    header: dict[str, str] = {}
    params: dict[str, str] = {}
    mode_meta: list[tuple[int, float]] = []
    rows = []
    for raw in Path(path).read_text().splitlines():
        if raw.startswith("#"):
            body = raw[1:].strip()
            if body.startswith("param:"):
                key, value = body[len("param:"):].split("=", 1)
                params[key] = value
            elif body.startswith("mode:"):
                fields = dict(tok.split("=") for tok in body[len("mode:"):].split())
                mode_meta.append((int(fields["index"]), float(fields["k"])))
            elif "=" in body:
                key, value = body.split("=", 1)
                header[key] = value
            continue
        if raw and not raw[0].isalpha():
            rows.append([float(tok) for tok in raw.split(",")])
    data = np.asarray(rows)
    times = data[:, 0]
    modes = {}
    for col, (idx, k) in enumerate(mode_meta):
        amp = data[:, 1 + 2 * col] + 1j * data[:, 2 + 2 * col]
        modes[idx] = ModeSeries(idx, k, times, amp)
    return header, params, modes


def check_compatible(traj_params: dict, ref_params: dict,
                     traj_header: dict, ref_header: dict):
    """Trajectory and reference must share calibration-relevant settings."""
    if traj_header.get("convention") != ref_header.get("convention"):
        raise ConfigError("transform convention mismatch between trajectory and reference")
    for key in ("epsilon", "dx", "n_points", "dt", "delta1"):
        if traj_params.get(key) != ref_params.get(key):
            raise ConfigError(
                f"parameter mismatch between trajectory and reference: {key} "
                f"({traj_params.get(key)} vs {ref_params.get(key)})"
            )


# ---------------------------------------------------------------------------
# spacetime binary

def write_spacetime(path: str | Path, result: TrajectoryResult,
                    manifest: RunManifest):
    if result.field_frames is None:
        raise ValueError("trajectory has no stored field frames")
    frames = np.ascontiguousarray(result.field_frames, dtype=np.complex128)
    header = {
        "manifest": manifest.hash, "convention": manifest.convention,
        "params": manifest.params, "dtype": "complex128",
        "n_frames": int(frames.shape[0]), "n_x": int(frames.shape[1]),
        "content": "signal near field, row-major frames",
    }
    blob = json.dumps(header, sort_keys=True).encode()
    with open(path, "wb") as fh:
        fh.write(SPACETIME_MAGIC)
        fh.write(struct.pack("<I", FORMAT_VERSION))
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        fh.write(np.ascontiguousarray(result.times, dtype="<f8").tobytes())
        fh.write(frames.astype("<c16").tobytes())


def read_spacetime(path: str | Path):
    """Returns (header dict, times, frames)."""
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != SPACETIME_MAGIC:
            raise ValueError(f"not a spacetime file: bad magic {magic!r}")
        version, = struct.unpack("<I", fh.read(4))
        if version != FORMAT_VERSION:
            raise ValueError(f"unsupported spacetime version {version}")
        hlen, = struct.unpack("<I", fh.read(4))
        header = json.loads(fh.read(hlen).decode())
        n_frames, n_x = header["n_frames"], header["n_x"]
        times = np.frombuffer(fh.read(8 * n_frames), dtype="<f8")
        frames = np.frombuffer(fh.read(16 * n_frames * n_x), dtype="<c16")
    return header, times, frames.reshape(n_frames, n_x)


# ---------------------------------------------------------------------------
# histogram binary

def write_histogram(path: str | Path, hist: WignerHistogram, manifest: RunManifest,
                    label: str = ""):
    header = {
        "manifest": manifest.hash, "convention": manifest.convention,
        "params": manifest.params, "label": label,
        "n_re": int(hist.counts.shape[0]), "n_im": int(hist.counts.shape[1]),
        "re_min": float(hist.re_edges[0]), "re_max": float(hist.re_edges[-1]),
        "im_min": float(hist.im_edges[0]), "im_max": float(hist.im_edges[-1]),
        "n_samples": int(hist.n_samples),
    }
    blob = json.dumps(header, sort_keys=True).encode()
    with open(path, "wb") as fh:
        fh.write(HISTOGRAM_MAGIC)
        fh.write(struct.pack("<I", FORMAT_VERSION))
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        fh.write(np.ascontiguousarray(hist.counts, dtype="<f8").tobytes())


def read_histogram(path: str | Path):
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != HISTOGRAM_MAGIC:
            raise ValueError(f"not a histogram file: bad magic {magic!r}")
        version, = struct.unpack("<I", fh.read(4))
        if version != FORMAT_VERSION:
            raise ValueError(f"unsupported histogram version {version}")
        hlen, = struct.unpack("<I", fh.read(4))
        header = json.loads(fh.read(hlen).decode())
        counts = np.frombuffer(
            fh.read(8 * header["n_re"] * header["n_im"]), dtype="<f8"
        ).reshape(header["n_re"], header["n_im"]).copy()
    hist = WignerHistogram(
        counts=counts,
        re_edges=np.linspace(header["re_min"], header["re_max"], header["n_re"] + 1),
        im_edges=np.linspace(header["im_min"], header["im_max"], header["n_im"] + 1),
        n_samples=header["n_samples"],
    )
    return header, hist


# ---------------------------------------------------------------------------
# checkpoints

def save_checkpoint(path: str | Path, sim: Simulation):
    """Full field state plus RNG state; resume is bit-exact."""
    np.savez(
        path,
        t=sim.state.t,
        pump=sim.state.pump,
        signal=sim.state.signal,
        steps_taken=sim.steps_taken,
        params_json=json.dumps(sim.params.as_dict(), sort_keys=True),
        rng_state_json=json.dumps(_jsonify(sim.rng.bit_generator.state)),
    )


def load_checkpoint(path: str | Path) -> Simulation:
    with np.load(path, allow_pickle=False) as data:
        saved = json.loads(str(data["params_json"]))
        params = params_from_dict(saved)
        state = FieldState(float(data["t"]), data["pump"], data["signal"])
        rng = np.random.default_rng()
        rng.bit_generator.state = json.loads(str(data["rng_state_json"]))
        sim = Simulation(params, state=state, rng=rng)
        sim.steps_taken = int(data["steps_taken"])
    return sim


def params_from_dict(saved: dict) -> SimParams:
    """Rebuild SimParams from the as_dict() representation."""
    kwargs = {k: saved[k] for k in
              ("delta0", "delta1", "v", "f", "epsilon", "n_points", "dx", "dt",
               "seed", "t_transient", "sample_interval")}
    kwargs["n_points"] = int(kwargs["n_points"])
    kwargs["seed"] = int(kwargs["seed"])
    params = SimParams(**kwargs)
    if saved.get("pump") == SUPERGAUSSIAN:
        profile = PumpProfile(SUPERGAUSSIAN, effective_drive(params),
                              float(saved["pump_width"]), int(saved["pump_order"]))
        params = SimParams(**kwargs, pump_profile=profile)
    return params


def _jsonify(obj):
    if isinstance(obj, dict):
        return {k: _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, np.ndarray):
        return {"__ndarray_u64__": [int(x) for x in obj.ravel()]}
    if isinstance(obj, (np.integer,)):
        return int(obj)
    return obj


def default_mode_targets(grid: Grid, delta1: float) -> list[int]:
    """Default recorded bins: +-k_c, +-1.04 k_c, +-1.06 k_c (distinct bins)."""
    from .stability import critical_wavenumber

    kc = critical_wavenumber(delta1)
    targets = []
    for factor in (1.0, 1.04, 1.06):
        idx = grid.mode_index(factor * kc)
        for j in (idx, grid.conjugate_index(idx)):
            if j not in targets:
                targets.append(j)
    return targets
