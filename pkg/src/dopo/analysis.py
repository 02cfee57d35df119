"""Observables: far fields, demodulated modes, Wigner histograms and squeezing.

All variances computed from trajectories are symmetrically ordered (the
Wigner identification). Non-classical verdicts are always made relative
to the shot-noise level of the co-run empty-cavity reference process, so
they are immune to transform-convention factors.

Ordering conversions use the mode normalization in which the vacuum has
symmetric variance 1/2; the calibration factor comes from the reference
process itself.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .dynamics import ModeSeries, TrajectoryResult
from .spectral import Grid


# ---------------------------------------------------------------------------
# fields and modes

def far_field(result_or_signal, grid: Grid | None = None):
    """Modulus of the signal far field with a monotone k axis.

    Accepts a FieldState-like object (has .signal) or a plain array.
    Returns (k_sorted, |spectrum| sorted by k).
    """
    signal = getattr(result_or_signal, "signal", result_or_signal)
    signal = np.asarray(signal)
    if grid is None:
        raise ValueError("grid is required")
    spec = grid.forward(signal)
    order = np.fft.fftshift(np.arange(grid.n_points))
    return grid.k[order], np.abs(spec)[order]


def demodulate(series: ModeSeries, v: float) -> ModeSeries:
    """Remove the walk-off rotation exp(i v k t) from a mode series."""
    demod = series.amplitudes * np.exp(-1j * v * series.k * series.times)
    return ModeSeries(series.k_index, series.k, series.times,
                      series.amplitudes, demodulated=demod)


def superposition_quadrature(series_plus: ModeSeries, series_minus: ModeSeries,
                             theta: float):
    """Quadratures X+-(theta) = Re{[a'(k) +- a'(-k)] e^(i theta)}.

    Uses demodulated amplitudes when present. Returns (x_plus, x_minus).
    """
    if series_plus.times.shape != series_minus.times.shape or not np.array_equal(
        series_plus.times, series_minus.times
    ):
        raise ValueError("mode series do not share a time axis")
    if abs(series_plus.k + series_minus.k) > 1e-12 * max(1.0, abs(series_plus.k)):
        raise ValueError("mode series are not an exact +-k pair")
    a = series_plus.values()
    b = series_minus.values()
    phase = np.exp(1j * theta)
    x_plus = np.real((a + b) * phase)
    x_minus = np.real((a - b) * phase)
    return x_plus, x_minus


def mode_pair(result: TrajectoryResult, k_target: float, v: float | None = None):
    """The recorded (+k, -k) series pair nearest ``k_target``, demodulated."""
    grid = result.grid
    idx = grid.mode_index(abs(k_target))
    jdx = grid.conjugate_index(idx)
    if idx not in result.modes or jdx not in result.modes:
        raise KeyError(f"modes {idx}/{jdx} were not recorded")
    v = result.params.v if v is None else v
    return demodulate(result.modes[idx], v), demodulate(result.modes[jdx], v)


# ---------------------------------------------------------------------------
# statistics helpers

def correlation_time(x: np.ndarray, dt_sample: float) -> float:
    """Integrated autocorrelation time, in time units of the series."""
    x = np.asarray(x, dtype=float)
    n = x.size
    if n < 8:
        return dt_sample
    y = x - x.mean()
    var = np.dot(y, y) / n
    if var == 0:
        return dt_sample
    m = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(y, m)
    acf = np.fft.irfft(f * np.conj(f), m)[: n // 2].real / (n * var)
    total = 0.5
    for rho in acf[1:]:
        if rho < 0.05:
            break
        total += rho
    return max(dt_sample, 2.0 * total * dt_sample)


def block_bootstrap(values: np.ndarray, statistic, block: int,
                    n_boot: int = 200, rng=None):
    """Circular block bootstrap percentile CI for ``statistic(values)``.

    values may be 1D or 2D (samples along the last axis).
    """
    rng = rng if rng is not None else np.random.default_rng(12345)
    values = np.atleast_2d(np.asarray(values))
    n = values.shape[-1]
    block = max(1, min(block, n))
    n_blocks = int(math.ceil(n / block))
    est = statistic(*values)
    boots = np.empty(n_boot)
    offsets = np.arange(block)
    for b in range(n_boot):
        starts = rng.integers(0, n, size=n_blocks)
        idx = ((starts[:, None] + offsets[None, :]) % n).ravel()[:n]
        boots[b] = statistic(*values[:, idx])
    lo, hi = np.percentile(boots, [2.5, 97.5])
    return est, float(lo), float(hi)


@dataclass(frozen=True)
class QuadratureStats:
    """Symmetric-ordering variance of one quadrature against shot noise."""

    theta: float
    var_symmetric: float
    shot_level: float
    ci_low: float
    ci_high: float
    nonstationary: bool = False

    @property
    def ratio(self) -> float:
        return self.var_symmetric / self.shot_level

    @property
    def var_normal_normalized(self) -> float:
        """(Var_S - shot)/shot; negative means squeezing."""
        return self.ratio - 1.0


def shot_noise_level(ref_plus: ModeSeries, ref_minus: ModeSeries,
                     theta: float = 0.0, sign: int = -1,
                     min_samples: int = 100) -> float:
    """Shot-noise variance of the same superposition quadrature structure.

    Var of Re{[s(k) sign s(-k)] e^(i theta)} over the reference process;
    theta-independent up to statistics.
    """
    a = ref_plus.values()
    b = ref_minus.values()
    if a.size < min_samples:
        raise ValueError(f"insufficient reference samples: {a.size} < {min_samples}")
    z = a + b if sign > 0 else a - b
    return float(np.var(np.real(z * np.exp(1j * theta))))


def shot_level_analytic(params) -> float:
    """Closed-form OU value eps^2/(2 dx) for the pair quadrature variance."""
    return params.epsilon**2 / (2.0 * params.dx)


def vacuum_mode_variance(ref_series: list[ModeSeries] | ModeSeries) -> float:
    """Per-mode symmetric vacuum variance <|s_k|^2> from the reference run."""
    if isinstance(ref_series, ModeSeries):
        ref_series = [ref_series]
    vals = np.concatenate([np.abs(s.values()) ** 2 for s in ref_series])
    return float(np.mean(vals))


def squeezing_ratio(quadrature: np.ndarray, shot_level: float,
                    dt_sample: float, theta: float = 0.0,
                    n_boot: int = 200) -> QuadratureStats:
    """Var_S/shot with a block-bootstrap confidence interval.

    Blocks span ten correlation times; a nonstationarity flag is set when
    the two halves of the series disagree by more than three sigma.
    """
    if shot_level <= 0:
        raise ValueError("shot level must be positive")
    x = np.asarray(quadrature, dtype=float)
    tau = correlation_time(x, dt_sample)
    block = max(1, int(round(10.0 * tau / dt_sample)))
    var, lo, hi = block_bootstrap(x, lambda v: np.var(v), block, n_boot=n_boot)

    half = x.size // 2
    v1, v2 = np.var(x[:half]), np.var(x[half:])
    n_eff = max(4.0, x.size * dt_sample / tau)
    se = math.sqrt(2.0 / (n_eff / 2.0)) * max(v1, v2)
    nonstat = abs(v1 - v2) > 3.0 * se
    if nonstat:
        warnings.warn("quadrature series looks nonstationary "
                      f"(half variances {v1:.3e} vs {v2:.3e})", stacklevel=2)
    return QuadratureStats(theta=theta, var_symmetric=float(var),
                           shot_level=float(shot_level),
                           ci_low=lo / shot_level, ci_high=hi / shot_level,
                           nonstationary=nonstat)


@dataclass(frozen=True)
class AngleScan:
    thetas: np.ndarray
    ratios: np.ndarray

    @property
    def theta_min(self) -> float:
        return float(self.thetas[int(np.argmin(self.ratios))])


def angle_scan(series_plus: ModeSeries, series_minus: ModeSeries,
               shot_level: float, thetas: np.ndarray | None = None) -> AngleScan:
    """Var(X-(theta))/shot over a theta grid; report the minimizing angle."""
    if thetas is None:
        thetas = np.arange(-32, 32) * (math.pi / 64.0)
    ratios = np.empty(len(thetas))
    for i, th in enumerate(thetas):
        _, x_minus = superposition_quadrature(series_plus, series_minus, th)
        ratios[i] = np.var(x_minus) / shot_level
    return AngleScan(thetas=np.asarray(thetas, dtype=float), ratios=ratios)


@dataclass(frozen=True)
class IntensityDifference:
    """Normally ordered <:(n_k - n_-k)^2:>; negative means twin beams."""

    value: float
    ci_low: float
    ci_high: float


def intensity_difference(series_plus: ModeSeries, series_minus: ModeSeries,
                         vacuum_variance: float, n_boot: int = 200,
                         dt_sample: float | None = None) -> IntensityDifference:
    """Normally ordered intensity-difference moment from Wigner samples.

    Samples are rescaled so the vacuum symmetric variance is 1/2; then
    <:(nA - nB)^2:> = <(xA - xB)^2>_W - <xA>_W - <xB>_W + 1/2
    with x = |c|^2, which is exactly 0 on the vacuum by construction.
    """
    a = series_plus.values()
    b = series_minus.values()
    if a.size < 16:
        raise ValueError("insufficient samples for intensity statistics")
    if vacuum_variance <= 0:
        raise ValueError("vacuum variance must be positive")
    xa = np.abs(a) ** 2 / (2.0 * vacuum_variance)
    xb = np.abs(b) ** 2 / (2.0 * vacuum_variance)

    def stat(pa, pb):
        d = pa - pb
        return np.mean(d * d) - np.mean(pa) - np.mean(pb) + 0.5

    if dt_sample is None:
        dt_sample = float(series_plus.times[1] - series_plus.times[0])
    tau = max(correlation_time(xa, dt_sample), correlation_time(xb, dt_sample))
    block = max(1, int(round(10.0 * tau / dt_sample)))
    val, lo, hi = block_bootstrap(np.stack([xa, xb]), stat, block, n_boot=n_boot)
    return IntensityDifference(value=float(val), ci_low=lo, ci_high=hi)


# ---------------------------------------------------------------------------
# Wigner histograms

@dataclass
class WignerHistogram:
    """2D phase-space bin counts identified with the Wigner distribution."""

    counts: np.ndarray
    re_edges: np.ndarray
    im_edges: np.ndarray
    n_samples: int
    normalized: bool = False

    @property
    def re_centers(self) -> np.ndarray:
        return 0.5 * (self.re_edges[:-1] + self.re_edges[1:])

    @property
    def im_centers(self) -> np.ndarray:
        return 0.5 * (self.im_edges[:-1] + self.im_edges[1:])

    def probability(self) -> np.ndarray:
        """Bin probabilities summing to 1."""
        return self.counts / self.counts.sum()

    def marginal_re(self) -> np.ndarray:
        return self.probability().sum(axis=1)

    def marginal_im(self) -> np.ndarray:
        return self.probability().sum(axis=0)

    def cut_re(self):
        """Central-row cut W(Re, 0): probabilities in the Im ~ 0 bin row."""
        j = int(np.searchsorted(self.im_edges, 0.0)) - 1
        j = min(max(j, 0), self.counts.shape[1] - 1)
        return self.re_centers, self.probability()[:, j]

    def cut_im(self):
        """Central-column cut W(0, Im)."""
        i = int(np.searchsorted(self.re_edges, 0.0)) - 1
        i = min(max(i, 0), self.counts.shape[0] - 1)
        return self.im_centers, self.probability()[i, :]

    def mode(self):
        """(Re, Im) center of the most populated bin."""
        i, j = np.unravel_index(int(np.argmax(self.counts)), self.counts.shape)
        return float(self.re_centers[i]), float(self.im_centers[j])

    def merge(self, other: "WignerHistogram") -> "WignerHistogram":
        if not (np.array_equal(self.re_edges, other.re_edges)
                and np.array_equal(self.im_edges, other.im_edges)):
            raise ValueError("histogram extents differ")
        return WignerHistogram(self.counts + other.counts, self.re_edges,
                               self.im_edges, self.n_samples + other.n_samples)


def accumulate_wigner(samples: np.ndarray, n_bins: int = 256,
                      extents: tuple[float, float, float, float] | None = None
                      ) -> WignerHistogram:
    """Histogram complex samples over (Re, Im).

    Extents default to +-5 sample standard deviations per axis (at least
    a tiny nonzero span so degenerate samples still bin).
    """
    samples = np.asarray(samples)
    if samples.size == 0:
        raise ValueError("empty sample set")
    re, im = samples.real, samples.imag
    if extents is None:
        def span(c):
            s = 5.0 * np.std(c)
            if s == 0:
                s = max(1e-12, abs(np.mean(c)) * 1e-6 + 1e-12)
            m = np.mean(c)
            return m - s, m + s
        extents = (*span(re), *span(im))
    counts, re_edges, im_edges = np.histogram2d(
        re, im, bins=n_bins,
        range=[[extents[0], extents[1]], [extents[2], extents[3]]],
    )
    return WignerHistogram(counts=counts, re_edges=re_edges, im_edges=im_edges,
                           n_samples=int(samples.size))


def principal_axis_angle(samples: np.ndarray) -> float:
    """Angle (radians, in (-pi/2, pi/2]) of the maximum-variance axis."""
    re = samples.real - samples.real.mean()
    im = samples.imag - samples.imag.mean()
    cov = np.cov(np.stack([re, im]))
    evals, evecs = np.linalg.eigh(cov)
    vx, vy = evecs[:, int(np.argmax(evals))]
    ang = math.atan2(vy, vx)
    if ang <= -math.pi / 2:
        ang += math.pi
    elif ang > math.pi / 2:
        ang -= math.pi
    return ang


def kurtosis(x: np.ndarray) -> float:
    """Plain (non-excess) kurtosis; 3 for a Gaussian."""
    x = np.asarray(x, dtype=float)
    y = x - x.mean()
    m2 = np.mean(y * y)
    if m2 == 0:
        return float("nan")
    return float(np.mean(y**4) / m2**2)
