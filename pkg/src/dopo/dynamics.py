"""Stochastic split-step integration of the coupled pump-signal system.

One step of size dt:
  (a) exact linear substep in Fourier space for both fields, with the
      pump drive folded into the same integrating factor so the
      homogeneous pump fixed point is exact;
  (b) coupling + noise substep in real space: the parametric gain
      d signal/dt = pump * conj(signal) is integrated exactly pointwise
      with the pump frozen over the step (cosh/sinh rotation), so the
      homogeneous oscillation threshold sits at F = 1 for any dt; pump
      depletion is a plain Euler-Maruyama update
      pump += dt * (-signal^2 / 2), and additive noise follows.
The additive signal noise uses the exact one-step Ornstein-Uhlenbeck
variance for the uniform cavity damping, so the empty-cavity steady
state is dt-independent. No noise enters the pump.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .params import FieldState, SimParams, validate
from .spectral import Grid, linear_propagator, linear_symbols, reference_symbol

BLOWUP_LIMIT = 1e6
_NOISE_CHUNK = 1024


class BlowUpError(RuntimeError):
    """Raised when a field becomes non-finite or exceeds BLOWUP_LIMIT."""

    def __init__(self, t: float, max_modulus: float):
        super().__init__(
            f"integrator blow-up at t={t:.3f}: max field modulus {max_modulus:.3e}"
        )
        self.t = t
        self.max_modulus = max_modulus


@dataclass(frozen=True)
class NoiseSettings:
    """Noise amplitude plus the per-step scale factors actually applied."""

    epsilon: float
    dx: float
    dt: float

    @property
    def per_component_std(self) -> float:
        # exact one-step OU variance for unit damping:
        # <|increment|^2> = eps^2 (1 - exp(-2 dt)) / (2 dx)
        return self.epsilon * math.sqrt((1.0 - math.exp(-2.0 * self.dt)) / (4.0 * self.dx))


def sample_noise(grid: Grid, dt: float, rng: np.random.Generator) -> np.ndarray:
    """Draw one grid of delta-correlated complex white noise.

    Entries are (u + i w)/sqrt(2 dx dt) with u, w independent standard
    normals, so <xi_j conj(xi_m)> = delta_jm / (dx dt) and <xi_j xi_m> = 0.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    n = grid.n_points
    u = rng.standard_normal(n)
    w = rng.standard_normal(n)
    return (u + 1j * w) / math.sqrt(2.0 * grid.dx * dt)


@dataclass
class ModeSeries:
    """Time series of one far-field mode amplitude."""

    k_index: int
    k: float
    times: np.ndarray
    amplitudes: np.ndarray
    demodulated: np.ndarray | None = None

    def after(self, t0: float) -> "ModeSeries":
        """Samples with t >= t0 (used to drop the transient)."""
        sel = self.times >= t0
        demod = self.demodulated[sel] if self.demodulated is not None else None
        return ModeSeries(self.k_index, self.k, self.times[sel],
                          self.amplitudes[sel], demod)

    def values(self) -> np.ndarray:
        return self.demodulated if self.demodulated is not None else self.amplitudes


@dataclass
class TrajectoryRecorder:
    """What to keep while a trajectory advances.

    mode_indices: far-field bins recorded every sample interval.
    store_field: keep real-space signal frames (downsampled by
    ``space_stride``) for space-time plots and binary output.
    """

    mode_indices: tuple[int, ...] = ()
    store_field: bool = False
    space_stride: int = 1
    store_far_field: bool = False
    accumulate_far_field: bool = False


@dataclass
class TrajectoryResult:
    params: SimParams
    grid: Grid
    times: np.ndarray
    modes: dict[int, ModeSeries] = field(default_factory=dict)
    field_frames: np.ndarray | None = None
    far_frames: np.ndarray | None = None
    far_mean_sq: np.ndarray | None = None
    final_state: FieldState | None = None
    steps: int = 0

    def dominant_mode(self, k_min: float = 0.0) -> int:
        """Bin of the most intense time-averaged far-field mode with k > k_min."""
        if self.far_mean_sq is None:
            raise ValueError("far-field average was not accumulated")
        k = self.grid.k
        masked = np.where(k > k_min, self.far_mean_sq, -np.inf)
        masked[self.grid.n_points // 2] = -np.inf  # Nyquist has no partner
        return int(np.argmax(masked))


def initial_state(params: SimParams, grid: Grid, rng: np.random.Generator) -> FieldState:
    """Pump at its homogeneous fixed point, signal at a microscopic noise draw."""
    e0 = params.pump_profile.amplitude(grid.x)
    pump = e0 / (1.0 + 1j * params.delta0)
    if params.epsilon > 0:
        signal = params.epsilon * math.sqrt(params.dt) * sample_noise(grid, params.dt, rng)
    else:
        signal = np.zeros(grid.n_points, dtype=complex)
    return FieldState(0.0, pump.astype(complex), signal)


class Simulation:
    """Advances one coupled pump-signal trajectory.

    Strictly sequential; independent trajectories should use independent
    seeds (e.g. via numpy SeedSequence spawning).
    """

    def __init__(self, params: SimParams, state: FieldState | None = None,
                 rng: np.random.Generator | None = None):
        report = validate(params)
        if not report.ok:
            raise ValueError("invalid parameters: " + "; ".join(report.violations))
        self.params = params
        self.grid = Grid.from_params(params)
        self.rng = rng if rng is not None else np.random.default_rng(params.seed)
        self.state = state if state is not None else initial_state(params, self.grid, self.rng)
        if self.state.pump.shape[0] != params.n_points:
            raise ValueError("state length does not match n_points")

        dt = params.dt
        symbols = linear_symbols(self.grid, params)
        self._props = np.stack([
            linear_propagator(symbols.pump_symbol, dt),
            linear_propagator(symbols.signal_symbol, dt),
        ])
        # drive folded into the linear substep: exact solution of
        # d pump/dt = L0 pump + E0 over one step
        e0_hat = self.grid.forward(params.pump_profile.amplitude(self.grid.x).astype(complex))
        self._drive = e0_hat * (self._props[0] - 1.0) / symbols.pump_symbol
        self._noise = NoiseSettings(params.epsilon, params.dx, dt)
        self._fields = np.stack([self.state.pump, self.state.signal])
        self.steps_taken = 0

    def _sync_state(self):
        self.state = FieldState(self.state.t, self._fields[0].copy(), self._fields[1].copy())

    def _check_blowup(self):
        m = max(np.max(np.abs(self._fields[0])), np.max(np.abs(self._fields[1])))
        if not np.isfinite(m) or m > BLOWUP_LIMIT:
            raise BlowUpError(self.state.t, float(m))

    def step(self, n_steps: int = 1):
        """Advance by n_steps; state is refreshed on return."""
        self._run_steps(n_steps)
        self._check_blowup()
        self._sync_state()

    def _run_steps(self, n_steps: int, on_sample=None, sample_every: int = 0):
        a = self._fields
        props = self._props
        drive = self._drive
        dt = self.params.dt
        sigma = self._noise.per_component_std
        n = self.grid.n_points
        fft, ifft = np.fft.fft, np.fft.ifft
        sqrt_n = math.sqrt(n)
        done = 0
        while done < n_steps:
            m = min(_NOISE_CHUNK, n_steps - done)
            if sigma > 0:
                draws = self.rng.standard_normal((m, 2, n))
                cnoise = sigma * (draws[:, 0] + 1j * draws[:, 1])
            for i in range(m):
                spec = fft(a, axis=-1)
                spec *= props
                spec[0] += drive * sqrt_n  # unitary convention: fft = sqrt(n)*forward
                a[:] = ifft(spec, axis=-1)
                a0, a1 = a[0], a[1]
                # parametric gain d a1/dt = a0 conj(a1) integrated exactly
                # pointwise (pump frozen over the step); a first-order Euler
                # update here would shift the oscillation threshold by dt/2
                r = np.abs(a0)
                gain = a0 * (np.sinh(r * dt) / np.where(r == 0.0, 1.0, r))
                new_a1 = np.cosh(r * dt) * a1 + gain * np.conj(a1)
                a0 += dt * (-0.5) * (a1 * a1)
                a1[:] = new_a1
                if sigma > 0:
                    a1 += cnoise[i]
                done += 1
                self.steps_taken += 1
                self.state.t += dt
                if sample_every and self.steps_taken % sample_every == 0:
                    self._check_blowup()
                    on_sample(self.state.t, a0, a1)

    def run(self, duration: float, recorder: TrajectoryRecorder | None = None) -> TrajectoryResult:
        """Advance ``duration`` time units, recording at the sample cadence."""
        params = self.params
        recorder = recorder or TrajectoryRecorder()
        n_steps = int(round(duration / params.dt))
        sample_every = max(1, int(round(params.sample_interval / params.dt)))
        n_samples = n_steps // sample_every

        times = np.empty(n_samples)
        mode_idx = tuple(recorder.mode_indices)
        mode_buf = np.empty((len(mode_idx), n_samples), dtype=complex) if mode_idx else None
        field_buf = None
        far_buf = None
        if recorder.store_field:
            nx = len(range(0, params.n_points, recorder.space_stride))
            field_buf = np.empty((n_samples, nx), dtype=complex)
        if recorder.store_far_field:
            far_buf = np.empty((n_samples, params.n_points), dtype=complex)
        far_acc = np.zeros(params.n_points) if recorder.accumulate_far_field else None

        counter = [0]
        need_spectrum = bool(mode_idx) or recorder.store_far_field or recorder.accumulate_far_field
        inv_sqrt_n = 1.0 / math.sqrt(params.n_points)

        def on_sample(t, a0, a1):
            j = counter[0]
            times[j] = t
            if need_spectrum:
                spec = np.fft.fft(a1) * inv_sqrt_n
                if mode_buf is not None:
                    mode_buf[:, j] = spec[list(mode_idx)]
                if far_buf is not None:
                    far_buf[j] = spec
                if far_acc is not None and t >= params.t_transient:
                    far_acc[:] += np.abs(spec) ** 2
            if field_buf is not None:
                field_buf[j] = a1[:: recorder.space_stride]
            counter[0] += 1

        self._run_steps(n_steps, on_sample=on_sample, sample_every=sample_every)
        self._check_blowup()
        self._sync_state()

        modes = {}
        for row, idx in enumerate(mode_idx):
            modes[idx] = ModeSeries(idx, float(self.grid.k[idx]), times.copy(),
                                    mode_buf[row].copy())
        n_kept = int(np.sum(times >= params.t_transient)) if far_acc is not None else 0
        return TrajectoryResult(
            params=params, grid=self.grid, times=times, modes=modes,
            field_frames=field_buf, far_frames=far_buf,
            far_mean_sq=(far_acc / max(1, n_kept)) if far_acc is not None else None,
            final_state=self.state.copy(), steps=n_steps,
        )


def run_trajectory(params: SimParams, duration: float,
                   recorder: TrajectoryRecorder | None = None,
                   state: FieldState | None = None,
                   rng: np.random.Generator | None = None) -> TrajectoryResult:
    """One full trajectory from the default initial condition."""
    return Simulation(params, state=state, rng=rng).run(duration, recorder)


def run_reference(params: SimParams, duration: float,
                  recorder: TrajectoryRecorder | None = None,
                  rng: np.random.Generator | None = None) -> TrajectoryResult:
    """Empty-cavity linear process used to calibrate the shot-noise level.

    Integrates ds/dt = -[(1+i delta1) - 2i lap] s + eps*xi with the same
    noise normalization as the full model: no walk-off, no pump coupling.
    """
    report = validate(params)
    if not report.ok:
        raise ValueError("invalid parameters: " + "; ".join(report.violations))
    grid = Grid.from_params(params)
    rng = rng if rng is not None else np.random.default_rng(params.seed)
    recorder = recorder or TrajectoryRecorder()
    dt = params.dt
    prop = linear_propagator(reference_symbol(grid, params.delta1), dt)
    noise = NoiseSettings(params.epsilon, params.dx, dt)
    sigma = noise.per_component_std
    n = grid.n_points

    s = params.epsilon / math.sqrt(2.0 * grid.dx) * (
        rng.standard_normal(n) + 1j * rng.standard_normal(n)
    ) if params.epsilon > 0 else np.zeros(n, dtype=complex)

    n_steps = int(round(duration / dt))
    sample_every = max(1, int(round(params.sample_interval / dt)))
    n_samples = n_steps // sample_every
    times = np.empty(n_samples)
    mode_idx = tuple(recorder.mode_indices)
    mode_buf = np.empty((len(mode_idx), n_samples), dtype=complex) if mode_idx else None
    far_buf = np.empty((n_samples, n), dtype=complex) if recorder.store_far_field else None
    inv_sqrt_n = 1.0 / math.sqrt(n)

    t = 0.0
    j = 0
    done = 0
    while done < n_steps:
        m = min(_NOISE_CHUNK, n_steps - done)
        draws = rng.standard_normal((m, 2, n)) if sigma > 0 else None
        for i in range(m):
            spec = np.fft.fft(s)
            spec *= prop
            s = np.fft.ifft(spec)
            if sigma > 0:
                s += sigma * (draws[i, 0] + 1j * draws[i, 1])
            done += 1
            t += dt
            if done % sample_every == 0:
                if not np.all(np.isfinite(s)):
                    raise BlowUpError(t, float(np.max(np.abs(s))))
                times[j] = t
                spec_s = np.fft.fft(s) * inv_sqrt_n
                if mode_buf is not None:
                    mode_buf[:, j] = spec_s[list(mode_idx)]
                if far_buf is not None:
                    far_buf[j] = spec_s
                j += 1

    modes = {}
    for row, idx in enumerate(mode_idx):
        modes[idx] = ModeSeries(idx, float(grid.k[idx]), times.copy(), mode_buf[row].copy())
    return TrajectoryResult(
        params=params, grid=grid, times=times, modes=modes, far_frames=far_buf,
        final_state=FieldState(t, np.zeros(n, dtype=complex), s), steps=n_steps,
    )
