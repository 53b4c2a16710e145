"""Short-overlap contact-force asymptotics.

A constant force applied for a short overlap time, chosen so that the tip
returns to the stop exactly at the end of the overlap, approximates the
impact force. Its scaling with the overlap duration separates model
families: exponent 1/alpha - 1 of the frequency-scaling exponent alpha,
so a quadratic family diverges and a linear family stays finite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalError
from .structures import ModalStructure

__all__ = [
    "force_sensitivity",
    "expanded_sensitivity_coefficient",
    "constant_force_bvp",
    "mode_count_estimate",
    "measured_mode_count",
    "reversal_check",
    "AsymptoticsReport",
    "asymptotics_report",
]


def force_sensitivity(omega, damping, delta_t, psi_sq=1.0):
    """Sensitivity of the end-of-overlap modal displacement to the force.

    Exact derivative of the damped-oscillator solution under a constant
    force over `delta_t`, per unit force and scaled by `psi_sq` (the
    square of the mode's contact-point value, so that summing over modes
    gives the constraint denominator directly):

        psi_sq/omega^2 * (1 - e^{-z w dt} (cos(wd dt) + z/sqrt(1-z^2) sin(wd dt)))

    Vanishes like psi_sq * dt^2 / 2 for small overlaps and tends to
    psi_sq/omega^2 for long damped ones.
    """
    omega = np.asarray(omega, dtype=float)
    damping = np.asarray(damping, dtype=float)
    delta_t = np.asarray(delta_t, dtype=float)
    wd = omega * np.sqrt(1.0 - damping**2)
    e = np.exp(-damping * omega * delta_t)
    bracket = (e * np.cos(wd * delta_t)
               + (damping / np.sqrt(1.0 - damping**2)) * e * np.sin(wd * delta_t)
               - 1.0)
    return -(psi_sq / omega**2) * bracket


def expanded_sensitivity_coefficient(omega, damping, delta_t):
    """Leading-order expansion of the normalized sensitivity.

    The series 1 - (2/3) z w dt - (1 - 4 z^2)/12 (w dt)^2 of
    2 * force_sensitivity / (psi_sq * dt^2); dropping below a smallness
    threshold marks a mode as no longer force-responsive.
    """
    omega = np.asarray(omega, dtype=float)
    z = np.asarray(damping, dtype=float)
    wdt = omega * delta_t
    return 1.0 - (2.0 / 3.0) * z * wdt - (1.0 - 4.0 * z**2) / 12.0 * wdt**2


def mode_count_estimate(omega0: float, alpha: float, eta: float,
                        delta_t: float) -> int:
    """Smallest mode count whose expanded sensitivity drops below eta.

    Uses the undamped expansion with the power-law frequencies
    omega_k = omega0 * k^alpha:
        N = ceil((2 sqrt(3 - 3 eta) / omega0)^(1/alpha) * dt^(-1/alpha)).
    Passing the first natural frequency as omega0 underestimates the true
    frequencies of the beam families and therefore overestimates N.
    """
    if not 0 < eta < 1:
        raise ValueError("eta must lie in (0, 1)")
    if omega0 <= 0 or alpha <= 0:
        raise ValueError("omega0 and alpha must be positive")
    n = (2.0 * np.sqrt(3.0 - 3.0 * eta) / omega0) ** (1.0 / alpha) \
        * delta_t ** (-1.0 / alpha)
    return max(1, int(np.ceil(n)))


def measured_mode_count(omegas: np.ndarray, eta: float, delta_t: float,
                        cap: int = 10**6) -> int | None:
    """First mode whose expanded (undamped) coefficient falls below eta."""
    omegas = np.asarray(omegas, dtype=float)[:cap]
    coef = 1.0 - omegas**2 * delta_t**2 / 12.0
    idx = np.flatnonzero(coef < eta)
    return int(idx[0]) + 1 if idx.size else None


def constant_force_bvp(ms: ModalStructure, v_minus: np.ndarray,
                       delta_t: float, x_minus: np.ndarray | None = None,
                       approximate_numerator: bool = False) -> float:
    """Constant force holding the tip on the stop over one overlap time.

    Solves n . x(delta_t) = 0 for the force, starting from contact at the
    stop with incident modal velocities `v_minus` (and optional incident
    modal displacements relative to the contact configuration). The
    force-free numerator uses exact modal propagation; set
    `approximate_numerator` for the first-order shortcut
    delta_t * (n . v_minus), exposed as a comparison diagnostic.
    """
    om = ms.omegas
    dd = ms.dampings
    n = ms.tip_values
    if x_minus is None:
        x_minus = np.zeros(ms.n_modes)
    if approximate_numerator:
        numerator = delta_t * float(n @ v_minus)
    else:
        wd = om * np.sqrt(1.0 - dd**2)
        e = np.exp(-dd * om * delta_t)
        x_free = e * (x_minus * np.cos(wd * delta_t)
                      + (v_minus + dd * om * x_minus) / wd * np.sin(wd * delta_t))
        numerator = float(n @ x_free)
    denominator = float(np.sum(force_sensitivity(om, dd, delta_t, psi_sq=n**2)))
    if denominator == 0.0 or not np.isfinite(denominator):
        raise NumericalError(
            "vanishing force-sensitivity sum: the overlap time is too short "
            "for this truncation; increase the mode count to at least the "
            "estimated active-mode count"
        )
    return -numerator / denominator


def reversal_check(ms: ModalStructure, v_minus: np.ndarray, delta_t: float,
                   x_minus: np.ndarray | None = None):
    """Tip-velocity reversal defect of the constant-force overlap.

    Propagates every mode under the solved constant force and compares the
    outgoing tip velocity against the reflected incident one:
    defect = |n . v_plus + n . v_minus| / |n . v_minus|. Also returns the
    per-mode velocity changes, which vanish individually as the overlap
    shrinks.
    """
    om = ms.omegas
    dd = ms.dampings
    n = ms.tip_values
    if x_minus is None:
        x_minus = np.zeros(ms.n_modes)
    nv_minus = float(n @ v_minus)
    if nv_minus == 0.0:
        raise ValueError("incident tip velocity vanishes")
    fc = constant_force_bvp(ms, v_minus, delta_t, x_minus)
    wd = om * np.sqrt(1.0 - dd**2)
    e = np.exp(-dd * om * delta_t)
    c = np.cos(wd * delta_t)
    s = np.sin(wd * delta_t)
    # forced solution = static offset + homogeneous from the shifted state
    x_st = n * fc / om**2
    a = x_minus - x_st
    v_plus = e * (v_minus * c - (om**2 * a + dd * om * v_minus) / wd * s)
    dv = v_plus - v_minus
    defect = abs(float(n @ v_plus) + nv_minus) / abs(nv_minus)
    return defect, dv, fc


@dataclass(frozen=True)
class AsymptoticsReport:
    """Force-scaling study over a descending grid of overlap times."""

    family: str
    alpha: float
    eta: float
    delta_t: tuple[float, ...]
    fc: tuple[float, ...]
    fitted_exponent: float
    prefactor: float                    # fitted |fc| at unit overlap
    n_estimated: tuple[int, ...]
    n_measured: tuple[int, ...]
    reversal_defect: tuple[float, ...]  # at fixed (largest) mode count
    mode_counts: tuple[int, ...]        # modes used per grid point


def asymptotics_report(builder, omega1: float, alpha: float, *,
                       eta: float = 0.1,
                       delta_t_grid=None,
                       family: str = "custom",
                       margin: float = 1.1) -> AsymptoticsReport:
    """Run the overlap-force study for one model family.

    Parameters
    ----------
    builder : callable
        size -> ModalStructure with that many modes.
    omega1 : float
        First natural frequency, used as the power-law prefactor for the
        active-mode estimate.
    alpha : float
        Frequency-scaling exponent of the family.
    delta_t_grid : sequence, optional
        Descending overlap times; defaults to 7 points in [1e-3, 1e-6].
    margin : float
        Mode-count safety factor above the estimate.

    The incident state is a unit approach velocity through the first mode.
    Reversal defects are evaluated at the largest grid's mode count for
    every overlap, so their decrease with the overlap is meaningful.
    """
    if delta_t_grid is None:
        delta_t_grid = np.geomspace(1e-3, 1e-6, 7)
    dts = np.asarray(sorted(delta_t_grid, reverse=True), dtype=float)
    if np.any(dts <= 0):
        raise ValueError("overlap times must be positive")

    n_est = [mode_count_estimate(omega1, alpha, eta, dt) for dt in dts]
    sizes = [max(8, int(np.ceil(margin * ne))) for ne in n_est]
    m_big = max(sizes)
    ms_big = builder(m_big)
    n_meas = [measured_mode_count(ms_big.omegas, eta, dt) or m_big for dt in dts]

    fcs = []
    defects = []
    for dt, size in zip(dts, sizes):
        ms = builder(size) if size != m_big else ms_big
        v = np.zeros(ms.n_modes)
        v[0] = -1.0 / ms.tip_values[0]  # unit approach speed at the tip
        fcs.append(constant_force_bvp(ms, v, dt))
        v_big = np.zeros(m_big)
        v_big[0] = -1.0 / ms_big.tip_values[0]
        defects.append(reversal_check(ms_big, v_big, dt)[0])

    fcs = np.array(fcs)
    slope, intercept = np.polyfit(np.log(dts), np.log(np.abs(fcs)), 1)
    return AsymptoticsReport(
        family=family,
        alpha=alpha,
        eta=eta,
        delta_t=tuple(float(x) for x in dts),
        fc=tuple(float(x) for x in fcs),
        fitted_exponent=float(slope),
        prefactor=float(np.exp(intercept)),
        n_estimated=tuple(n_est),
        n_measured=tuple(int(x) for x in n_meas),
        reversal_defect=tuple(float(x) for x in defects),
        mode_counts=tuple(sizes),
    )
