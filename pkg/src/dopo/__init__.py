"""Stochastic pseudo-spectral simulator for the degenerate OPO with walk-off.

Pump and signal fields evolve on a periodic one-dimensional transverse grid
under the time-dependent parametric approximation, driven by quantum noise on
the signal. The package covers the full workflow: trajectory integration,
empty-cavity shot-noise calibration, convective/absolute instability analysis,
and squeezing statistics of far-field mode pairs.
"""

__version__ = "0.1.0"

from .params import (DEFAULT_DX, FLAT, SUPERGAUSSIAN, FieldState, PumpProfile,
                     SimParams, ValidationReport, effective_drive, validate)
from .spectral import (CONVENTION, Grid, LinearSymbols, linear_propagator,
                       linear_symbols, reference_symbol)
from .dynamics import (BlowUpError, ModeSeries, NoiseSettings, Simulation,
                       TrajectoryRecorder, TrajectoryResult, initial_state,
                       run_reference, run_trajectory, sample_noise)
from .stability import (RegimeClassification, ThresholdError,
                        absolute_threshold, classify, critical_wavenumber,
                        dispersion, instability_phase, stability_diagram,
                        steady_state)
from .analysis import (AngleScan, IntensityDifference, QuadratureStats,
                       WignerHistogram, accumulate_wigner, angle_scan,
                       block_bootstrap, correlation_time, demodulate,
                       far_field, intensity_difference, kurtosis, mode_pair,
                       principal_axis_angle, shot_level_analytic,
                       shot_noise_level, squeezing_ratio,
                       superposition_quadrature, vacuum_mode_variance)
from .io import (ConfigError, RunManifest, RunOptions, build_params,
                 load_checkpoint, parse_config, read_mode_series_csv,
                 read_spacetime, save_checkpoint, write_mode_series_csv,
                 write_spacetime)

__all__ = [
    "__version__",
    "DEFAULT_DX", "FLAT", "SUPERGAUSSIAN", "FieldState", "PumpProfile",
    "SimParams", "ValidationReport", "effective_drive", "validate",
    "CONVENTION", "Grid", "LinearSymbols", "linear_propagator",
    "linear_symbols", "reference_symbol",
    "BlowUpError", "ModeSeries", "NoiseSettings", "Simulation",
    "TrajectoryRecorder", "TrajectoryResult", "initial_state",
    "run_reference", "run_trajectory", "sample_noise",
    "RegimeClassification", "ThresholdError", "absolute_threshold",
    "classify", "critical_wavenumber", "dispersion", "instability_phase",
    "stability_diagram", "steady_state",
    "AngleScan", "IntensityDifference", "QuadratureStats", "WignerHistogram",
    "accumulate_wigner", "angle_scan", "block_bootstrap", "correlation_time",
    "demodulate", "far_field", "intensity_difference", "kurtosis",
    "mode_pair", "principal_axis_angle", "shot_level_analytic",
    "shot_noise_level", "squeezing_ratio", "superposition_quadrature",
    "vacuum_mode_variance",
    "ConfigError", "RunManifest", "RunOptions", "build_params",
    "load_checkpoint", "parse_config", "read_mode_series_csv",
    "read_spacetime", "save_checkpoint", "write_mode_series_csv",
    "write_spacetime",
]
