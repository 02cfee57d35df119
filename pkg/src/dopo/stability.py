"""Linear analysis: dispersion relation, thresholds and regime classification.

The convective/absolute boundary is found by the standard pinch-point
(saddle-point) criterion on the analytic continuation of the dispersion
relation: F_c is the smallest F > 1 for which a complex saddle k* with
d(lambda+)/dk = 0 reaches Re(lambda+) = 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

BELOW_THRESHOLD = "below_threshold"
CONVECTIVE = "convective"
ABSOLUTELY_UNSTABLE = "absolutely_unstable"


@dataclass(frozen=True)
class DispersionBranch:
    k: np.ndarray | float
    lambda_plus: np.ndarray | complex
    lambda_minus: np.ndarray | complex


@dataclass(frozen=True)
class RegimeClassification:
    regime: str
    f_conv: float
    f_abs: float
    boundary: bool = False


class ThresholdError(RuntimeError):
    """Pinch-point search failed to converge."""


def steady_state(e0: float, delta0: float) -> complex:
    """Homogeneous pump fixed point E0/(1+i delta0); signal component is 0."""
    return e0 / (1.0 + 1j * delta0)


def dispersion(k, f: float, delta1: float, v: float) -> DispersionBranch:
    """Growth rates lambda+-(k) = -1 + i v k +- sqrt(f^2 - (delta1 + 2k^2)^2)."""
    k = np.asarray(k, dtype=float)
    q = delta1 + 2.0 * k**2
    root = np.sqrt((f**2 - q**2).astype(complex))
    base = -1.0 + 1j * v * k
    return DispersionBranch(k=k, lambda_plus=base + root, lambda_minus=base - root)


def critical_wavenumber(delta1: float) -> float:
    """Most unstable wavenumber sqrt(-delta1/2) for delta1 < 0, else 0."""
    return math.sqrt(-delta1 / 2.0) if delta1 < 0 else 0.0


def instability_phase(k, f: float, delta1: float, pump_ss: complex):
    """Relative phases exp(i Phi+-) of the amplified/damped eigenvectors.

    The eigenvectors are V+- = exp(i Phi+-) dA1(k) +- conj(dA1(-k)); V+ is
    the amplified direction. Independent of walk-off.
    """
    if pump_ss == 0:
        raise ValueError("pump steady state must be nonzero")
    k = np.asarray(k, dtype=float)
    q = delta1 + 2.0 * k**2
    root = np.sqrt((abs(pump_ss) ** 2 - q**2).astype(complex))
    e_plus = -(1j * q - root) / pump_ss
    e_minus = (1j * q + root) / pump_ss
    return e_plus, e_minus


def _branch_sqrt(z: complex, ref: complex) -> complex:
    """Square root of z on the branch continuous with ``ref``."""
    r = complex(np.sqrt(complex(z)))
    return r if abs(r - ref) <= abs(r + ref) else -r


def _lambda_plus(k: complex, f: float, delta1: float, v: float, w_ref: complex):
    q = delta1 + 2.0 * k * k
    w = _branch_sqrt(f * f - q * q, w_ref)
    lam = -1.0 + 1j * v * k + w
    dlam = 1j * v - 4.0 * k * q / w
    return lam, dlam, w


def _find_saddle(f: float, delta1: float, v: float, k0: complex, w0: complex,
                 tol: float = 1e-12, max_iter: int = 60):
    """Complex Newton on d(lambda+)/dk = 0 with branch continuity."""
    k, w = k0, w0
    for _ in range(max_iter):
        lam, dlam, w = _lambda_plus(k, f, delta1, v, w)
        if abs(dlam) < tol:
            return k, w, lam
        h = 1e-7 * (1.0 + abs(k))
        _, dp, _ = _lambda_plus(k + h, f, delta1, v, w)
        _, dm, _ = _lambda_plus(k - h, f, delta1, v, w)
        d2 = (dp - dm) / (2.0 * h)
        if d2 == 0:
            break
        step = dlam / d2
        if abs(step) > 0.5 * (1.0 + abs(k)):
            step *= 0.5 * (1.0 + abs(k)) / abs(step)
        k = k - step
    raise ThresholdError(
        f"saddle search did not converge (f={f}, delta1={delta1}, v={v}, "
        f"last k={k}, |dlam/dk|={abs(dlam):.2e})"
    )


def absolute_threshold(v: float, delta1: float, f_tol: float = 1e-10) -> float:
    """Absolute-instability threshold F_c; exactly 1 for v = 0."""
    if delta1 >= 0:
        raise ValueError("absolute_threshold requires delta1 < 0")
    if v < 0:
        raise ValueError("absolute_threshold requires v >= 0")
    if v == 0:
        return 1.0

    kc = critical_wavenumber(delta1)
    # small-v expansion seeds: saddle near k_c + i v/(16 k_c^2)
    k_seed = complex(kc, v / (16.0 * kc * kc))
    state = {"k": k_seed, "w": complex(1.0)}

    def growth(f: float) -> float:
        k, w, lam = _find_saddle(f, delta1, v, state["k"], state["w"])
        state["k"], state["w"] = k, w
        return lam.real

    f_lo = 1.0 + 1e-9
    g_lo = growth(f_lo)
    if g_lo >= 0:
        return 1.0
    f_hi = f_lo
    span = max(0.05, v * v)
    for _ in range(60):
        f_hi += span
        if growth(f_hi) > 0:
            break
    else:
        raise ThresholdError(
            f"no sign change found for f in [{f_lo}, {f_hi}] "
            f"(v={v}, delta1={delta1}, growth({f_lo})={g_lo:.3e})"
        )
    return float(brentq(growth, f_lo, f_hi, xtol=f_tol))


def classify(f: float, v: float, delta1: float, boundary_tol: float = 1e-9) -> RegimeClassification:
    """Regime of the homogeneous solution at scaled pump f."""
    f_abs = absolute_threshold(v, delta1)
    if f < 1.0 - boundary_tol:
        regime, boundary = BELOW_THRESHOLD, False
    elif f <= 1.0 + boundary_tol:
        regime, boundary = CONVECTIVE, True
    elif f < f_abs - boundary_tol:
        regime, boundary = CONVECTIVE, False
    elif f <= f_abs + boundary_tol:
        regime, boundary = ABSOLUTELY_UNSTABLE, True
    else:
        regime, boundary = ABSOLUTELY_UNSTABLE, False
    return RegimeClassification(regime=regime, f_conv=1.0, f_abs=f_abs, boundary=boundary)


def stability_diagram(delta1_values, v_values) -> list[dict]:
    """Rows (delta1, v, f_c, converged) of the absolute-threshold diagram."""
    rows = []
    for v in v_values:
        for d1 in delta1_values:
            if d1 >= 0:
                raise ValueError("delta1 range must be strictly negative")
            try:
                fc = absolute_threshold(v, d1)
                rows.append({"delta1": float(d1), "v": float(v),
                             "f_c": fc, "converged": True})
            except ThresholdError:
                rows.append({"delta1": float(d1), "v": float(v),
                             "f_c": float("nan"), "converged": False})
    return rows
