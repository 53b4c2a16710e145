"""Shared scenario builders for the unit and acceptance suites."""

import numpy as np

from impactdde import (
    ContactConfig,
    HarmonicForcing,
    assemble_first_order,
    build_projection,
    memory_kernel,
    simulate,
    string_structure,
    timoshenko_collocation,
    tip_normalized_ic,
    to_modal,
)

FORCING_FREQ = 13.0
FORCING_AMP = 30.0
PERIOD = 2 * np.pi / FORCING_FREQ


def beam_scenario_system(n_colloc, damping=0.1, beta=4800.0, gamma=0.25):
    """Forced Timoshenko beam of the headline impact scenario."""
    ms = to_modal(timoshenko_collocation(n_colloc, beta, gamma), damping)
    ic = tip_normalized_ic(ms, 1, 1.056, 1.056)
    return assemble_first_order(
        ms, HarmonicForcing(2, FORCING_AMP, FORCING_FREQ), ic)


def beam_scenario_config(eps=3.5e-5, n_periods=20, stop=-0.05):
    return ContactConfig(stop_position=stop, eps=eps, t_end=n_periods * PERIOD)


def string_drop_system(n_modes=64, amplitude=1.166):
    """Undamped string released from a first-mode shape above a stop at 1."""
    ms = string_structure(n_modes)
    ic = tip_normalized_ic(ms, 1, amplitude, 0.0)
    return assemble_first_order(ms, ic=ic)


def string_jump_measurement(n_modes=64, eps=1e-2):
    """Run the unclamped string drop and measure the wave-return force jump.

    Returns (measured jump, predicted jump -dL2 * f0 / L_plus2).
    """
    sys = string_drop_system(n_modes)
    cfg = ContactConfig(stop_position=1.0, eps=eps, t_end=3.4,
                        plateau_window=(eps, 4 * eps), kernel_horizon=3.4)
    proj = build_projection(sys)
    kern = memory_kernel(sys, proj, eps, 3.4, plateau_window=(eps, 4 * eps))
    res = simulate(sys, cfg, kernel=kern, proj=proj, clamp_force=False)
    onset = next(e for e in res.events if e.kind == "onset")
    jump = kern.jump_table[0]
    q0 = int(round(onset.time / eps))
    qa = q0 + int(round(jump.tau_start / eps))
    qb = q0 + int(round(jump.tau_end / eps))
    measured = res.fc[qb] - res.fc[qa]
    predicted = -jump.dL2 * onset.fc_after / kern.L_plus[1]
    return measured, predicted


def periodicity_defect(res, period, n_periods, t_end):
    """Sup-norm tip difference between the last two orbit periods."""
    grid = np.linspace(t_end - 2 * period, t_end - period, 6000)
    a = np.interp(grid, res.times, res.y[:, 0])
    b = np.interp(grid + period, res.times, res.y[:, 0])
    return np.abs(a - b).max() / np.abs(res.y[:, 0]).max()
