"""Transverse grid, unitary Fourier transforms and exact linear propagators.

The transform convention is fixed once and for all ("unitary-dft-v1"):
forward = fft/sqrt(n), inverse = sqrt(n)*ifft, so Parseval holds exactly
and per-mode noise power equals per-point noise power.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

CONVENTION = "unitary-dft-v1"


class Grid:
    """Uniform periodic 1D grid with standard-order wavenumbers."""

    def __init__(self, n_points: int, dx: float):
        if n_points < 2:
            raise ValueError("n_points must be >= 2")
        if dx <= 0:
            raise ValueError("dx must be positive")
        self.n_points = int(n_points)
        self.dx = float(dx)
        self.x = np.arange(self.n_points) * self.dx
        self.k = 2.0 * np.pi * np.fft.fftfreq(self.n_points, d=self.dx)
        self.x.setflags(write=False)
        self.k.setflags(write=False)

    @classmethod
    def from_params(cls, params) -> "Grid":
        return cls(params.n_points, params.dx)

    @property
    def length(self) -> float:
        return self.n_points * self.dx

    def mode_index(self, k_target: float) -> int:
        """Index of the grid wavenumber nearest k_target, Nyquist excluded."""
        idx = int(np.argmin(np.abs(self.k - k_target)))
        if idx == self.n_points // 2:  # Nyquist bin has no -k partner
            idx = idx - 1 if k_target > 0 else idx + 1
        return idx % self.n_points

    def conjugate_index(self, idx: int) -> int:
        """Index of the -k partner of bin ``idx`` (not defined at Nyquist)."""
        if idx == self.n_points // 2:
            raise ValueError("Nyquist mode has no -k partner")
        return (-idx) % self.n_points

    def _check(self, arr: np.ndarray):
        if arr.shape[-1] != self.n_points:
            raise ValueError(
                f"length mismatch: expected {self.n_points}, got {arr.shape[-1]}"
            )

    def forward(self, field: np.ndarray) -> np.ndarray:
        """Unitary DFT: spectrum = fft(field)/sqrt(n)."""
        self._check(field)
        return np.fft.fft(field, axis=-1, norm="ortho")

    def inverse(self, spectrum: np.ndarray) -> np.ndarray:
        """Unitary inverse DFT; exact inverse of :meth:`forward`."""
        self._check(spectrum)
        return np.fft.ifft(spectrum, axis=-1, norm="ortho")


@dataclass(frozen=True)
class LinearSymbols:
    """Fourier symbols of the linear parts of the pump and signal equations.

    pump_symbol   L0(k) = -(1 + i*delta0) - i k^2
    signal_symbol L1(k) = -(1 + i*delta1) - 2i k^2 + i v k
    """

    pump_symbol: np.ndarray
    signal_symbol: np.ndarray


def linear_symbols(grid: Grid, params) -> LinearSymbols:
    k = grid.k
    l0 = -(1.0 + 1j * params.delta0) - 1j * k**2
    l1 = -(1.0 + 1j * params.delta1) - 2j * k**2 + 1j * params.v * k
    return LinearSymbols(pump_symbol=l0, signal_symbol=l1)


def reference_symbol(grid: Grid, delta1: float) -> np.ndarray:
    """Symbol of the empty-cavity signal equation (no walk-off, no pump)."""
    return -(1.0 + 1j * delta1) - 2j * grid.k**2


def linear_propagator(symbol: np.ndarray, dt: float) -> np.ndarray:
    """Diagonal propagator exp(L(k)*dt) for one exact linear substep."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    return np.exp(np.asarray(symbol) * dt)
