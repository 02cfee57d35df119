"""Scaled model parameters, pump profiles and field-state containers.

All quantities are dimensionless: time in cavity lifetimes, space in
diffraction lengths, fields scaled so the plane-wave oscillation
threshold sits at f = 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

FLAT = "flat"
SUPERGAUSSIAN = "supergaussian"

#: default grid spacing: 51 critical wavelengths over 512 points for
#: delta1 = -0.25, which puts +/-k_c exactly on the wavenumber grid.
DEFAULT_DX = 51 * (2.0 * math.pi / math.sqrt(0.125)) / 512


@dataclass(frozen=True)
class PumpProfile:
    """Transverse drive profile E0(x).

    ``flat`` drives every point at ``e_max``; ``supergaussian`` has a
    plateau of half-width ``width`` with smooth even-order decay, so the
    off-plateau region stays below threshold.
    """

    kind: str
    e_max: float
    width: float | None = None
    order: int | None = None

    def __post_init__(self):
        if self.kind not in (FLAT, SUPERGAUSSIAN):
            raise ValueError(f"unknown pump profile kind {self.kind!r}")
        if self.kind == SUPERGAUSSIAN:
            if self.width is None or self.width <= 0:
                raise ValueError("supergaussian profile needs width > 0")
            if self.order is None or self.order < 2 or self.order % 2:
                raise ValueError("supergaussian order must be even and >= 2")

    def amplitude(self, x: np.ndarray) -> np.ndarray:
        """Evaluate E0 on the grid positions ``x``, centered mid-domain."""
        x = np.asarray(x, dtype=float)
        if self.kind == FLAT:
            return np.full_like(x, self.e_max)
        center = 0.5 * (x[0] + x[-1])
        return self.e_max * np.exp(-(((x - center) / self.width) ** self.order))


@dataclass(frozen=True)
class SimParams:
    """Complete scaled parameter set for a run.

    ``pump_profile`` defaults to a flat profile at the effective drive
    amplitude f*sqrt(1 + delta0^2) implied by the scaled pump ``f``.
    """

    delta0: float = 0.0
    delta1: float = -0.25
    v: float = 0.42
    f: float = 1.025
    epsilon: float = 3e-5
    n_points: int = 512
    dx: float = DEFAULT_DX
    dt: float = 0.025
    pump_profile: PumpProfile | None = None
    seed: int = 2002
    t_transient: float = 500.0
    sample_interval: float = 0.25

    def __post_init__(self):
        if self.pump_profile is None:
            object.__setattr__(
                self, "pump_profile", PumpProfile(FLAT, effective_drive(self))
            )

    def with_supergaussian(self, width_fraction: float = 0.3, order: int = 10) -> "SimParams":
        """Return a copy driven by a centered supergaussian plateau.

        ``width_fraction`` is the profile half-width as a fraction of the
        system size n_points*dx.
        """
        width = width_fraction * self.n_points * self.dx
        profile = PumpProfile(SUPERGAUSSIAN, effective_drive(self), width, order)
        return replace(self, pump_profile=profile)

    def with_f(self, f: float) -> "SimParams":
        """Return a copy at a different scaled pump, rescaling the profile."""
        new = replace(self, f=f, pump_profile=None)
        if self.pump_profile.kind == SUPERGAUSSIAN:
            profile = PumpProfile(
                SUPERGAUSSIAN,
                effective_drive(new),
                self.pump_profile.width,
                self.pump_profile.order,
            )
            new = replace(new, pump_profile=profile)
        return new

    def system_size(self) -> float:
        return self.n_points * self.dx

    def as_dict(self) -> dict:
        d = {
            "delta0": self.delta0,
            "delta1": self.delta1,
            "v": self.v,
            "f": self.f,
            "epsilon": self.epsilon,
            "n_points": self.n_points,
            "dx": self.dx,
            "dt": self.dt,
            "seed": self.seed,
            "t_transient": self.t_transient,
            "sample_interval": self.sample_interval,
            "pump": self.pump_profile.kind,
            "pump_e_max": self.pump_profile.e_max,
        }
        if self.pump_profile.kind == SUPERGAUSSIAN:
            d["pump_width"] = self.pump_profile.width
            d["pump_order"] = self.pump_profile.order
        return d


def effective_drive(params: SimParams) -> float:
    """Plateau drive amplitude E0 implied by the scaled pump: f*sqrt(1+delta0^2)."""
    return params.f * math.sqrt(1.0 + params.delta0**2)


@dataclass
class ValidationReport:
    violations: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def validate(params: SimParams) -> ValidationReport:
    """Check a parameter set; violations make it non-runnable, warnings don't."""
    report = ValidationReport()
    n = params.n_points
    if n < 8 or (n & (n - 1)) != 0:
        report.violations.append(f"grid size not power of two (>= 8): n_points={n}")
    if params.dx <= 0:
        report.violations.append(f"nonpositive grid spacing: dx={params.dx}")
    if params.dt <= 0:
        report.violations.append(f"nonpositive time step: dt={params.dt}")
    if params.epsilon < 0:
        report.violations.append(f"negative noise amplitude: epsilon={params.epsilon}")
    if params.f < 0:
        report.violations.append(f"negative scaled pump: f={params.f}")
    if params.sample_interval <= 0:
        report.violations.append(
            f"nonpositive sample interval: {params.sample_interval}"
        )
    if params.t_transient < 0:
        report.violations.append(f"negative transient horizon: {params.t_transient}")

    profile = params.pump_profile
    expected = effective_drive(params)
    if profile is not None and abs(profile.e_max - expected) > 1e-9 * max(1.0, expected):
        report.violations.append(
            f"pump profile amplitude {profile.e_max} inconsistent with "
            f"f*sqrt(1+delta0^2) = {expected}"
        )

    if params.delta1 >= 0:
        report.warnings.append(
            "delta1 >= 0: no finite-wavenumber pattern (outside the regime "
            "this package targets)"
        )
    if report.ok and params.dx > 0 and params.dt > 0:
        k = 2.0 * math.pi * np.fft.fftfreq(n, d=params.dx)
        l1_max = np.max(
            np.abs(-(1.0 + 1j * params.delta1) - 2j * k**2 + 1j * params.v * k)
        )
        if params.dt * l1_max > 1.0:
            report.warnings.append(
                f"dt*max|L1(k)| = {params.dt * l1_max:.2f} > 1: step may be too "
                "coarse for the nonlinear substep"
            )
    return report


@dataclass
class FieldState:
    """Time stamp plus pump and signal fields on the transverse grid."""

    t: float
    pump: np.ndarray
    signal: np.ndarray

    def __post_init__(self):
        self.pump = np.asarray(self.pump, dtype=complex)
        self.signal = np.asarray(self.signal, dtype=complex)
        if self.pump.shape != self.signal.shape:
            raise ValueError("pump and signal shapes differ")

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.pump)) and np.all(np.isfinite(self.signal)))

    def copy(self) -> "FieldState":
        return FieldState(self.t, self.pump.copy(), self.signal.copy())
