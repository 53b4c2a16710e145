"""Event-driven integration of the reduced nonsmooth delay model.

The run alternates free flight and contact. In free flight the resolved
pair advances by explicit Euler plus a memory sum over past contact-force
increments; contact is entered when the predicted tip position reaches the
stop, pinning the state and jumping the force to (-incident velocity /
short-time kernel level); in contact the force follows the discretized
delay equation, and a negative prediction releases back to free flight.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import ConfigurationError, SingularModelError
from .reduction import (
    ForcingTerm,
    MemoryKernel,
    Projection,
    REGULARITY_FLOOR,
    build_projection,
    forcing_term,
    memory_kernel,
)
from .structures import FirstOrderSystem

__all__ = [
    "ContactConfig",
    "SimEvent",
    "SimulationResult",
    "simulate",
    "free_step",
    "detect_contact",
    "onset_force",
    "contact_step",
    "apply_release",
    "predict_secondary_jump",
    "backend_name",
]

EVENT_KINDS = {0: "onset", 1: "release", 2: "secondary-jump"}


def backend_name() -> str:
    """Which stepping backend is active ('compiled' or 'python')."""
    return _kernels.BACKEND


@dataclass(frozen=True)
class ContactConfig:
    """Scenario parameters shared by the reduced and restitution simulators.

    `stop_position` is the rigid stop in tip-displacement units; None
    disables contact handling entirely. `restitution` is used only by the
    restitution baseline and carried here for scenario parity.
    """

    stop_position: float | None
    eps: float
    t_end: float
    restitution: float = 1.0
    kernel_horizon: float | None = None
    truncation_tol: float = 1e-10
    plateau_window: tuple[float, float] | None = None

    def __post_init__(self):
        if self.eps <= 0:
            raise ConfigurationError("eps must be positive")
        if self.t_end <= 0:
            raise ConfigurationError("t_end must be positive")
        if not 0 <= self.restitution <= 1:
            raise ConfigurationError("restitution must lie in [0, 1]")


@dataclass(frozen=True)
class SimEvent:
    kind: str
    time: float
    fc_before: float
    fc_after: float


@dataclass(frozen=True)
class SimulationResult:
    """Uniform-grid trajectory of the resolved pair with an event log."""

    times: np.ndarray
    y: np.ndarray            # (T, 2)
    fc: np.ndarray
    in_contact: np.ndarray   # uint8
    events: tuple[SimEvent, ...]
    conv_ops: int = field(default=0)

    def onsets(self) -> list[SimEvent]:
        return [e for e in self.events if e.kind == "onset"]

    def event_times(self, kind: str | None = None) -> np.ndarray:
        return np.array([e.time for e in self.events
                         if kind is None or e.kind == kind])


# Reference single-step operations. The backend loops inline the same
# arithmetic; these are the readable contract and are used by the tests.

def free_step(y, q, eps, A, g2_q, memory=(0.0, 0.0)):
    """One explicit-Euler free-flight step with a precomputed memory sum."""
    c1, c2 = memory
    y1 = y[0] + eps * (A[0, 0] * y[0] + A[0, 1] * y[1]) + c1
    y2 = y[1] + eps * (A[1, 0] * y[0] + A[1, 1] * y[1] + g2_q) + c2
    return np.array([y1, y2])


def detect_contact(y_next, stop_position) -> bool:
    """True when the predicted tip position is at or below the stop."""
    return y_next[0] <= stop_position


def onset_force(v_incident: float, l_plus2: float,
                floor: float = REGULARITY_FLOOR) -> float:
    """Contact-force jump at onset: -incident velocity / kernel level.

    Raises for a singular model (vanishing level); a nonnegative incident
    velocity (grazing) gives zero force.
    """
    if abs(l_plus2) < floor:
        raise SingularModelError(
            "singular model: contact force undefined because the short-time "
            "kernel level [L+]_2 vanishes"
        )
    return max(0.0, -v_incident / l_plus2)


def contact_step(f_q, eps, l_plus2, linf2, a_ybar2, g2_q, memory2=0.0):
    """Predicted next contact force from the discretized delay equation."""
    return f_q - (eps / l_plus2) * (linf2 * f_q + a_ybar2 + g2_q) - memory2 / l_plus2


def apply_release(f_pred: float) -> tuple[float, bool]:
    """Release rule: strictly negative predicted force clears contact."""
    if f_pred < 0.0:
        return 0.0, False
    return f_pred, True


def predict_secondary_jump(kernel: MemoryKernel, fc_onset: float) -> list[tuple[float, float]]:
    """Force jumps implied by interior kernel discontinuities.

    For each kernel jump at lag tau_d, a contact that persists tau_d past
    onset develops a force jump dL2(tau_d) * fc_onset / [L+]_2.
    """
    lp = kernel.L_plus[1]
    return [(jp.tau, jp.dL2 * fc_onset / lp) for jp in kernel.jump_table]


def _annotate_secondary_jumps(events, kernel, times, fc, in_contact, eps):
    """Cross-reference kernel jumps with onsets to log delayed force jumps."""
    out = list(events)
    if not kernel.jump_table:
        return tuple(out)
    n = len(times) - 1
    onsets = [e for e in events if e.kind == "onset" and e.fc_after > 0]
    for e in onsets:
        q0 = int(round(e.time / eps))
        for jp in kernel.jump_table:
            qa = q0 + int(round(jp.tau_start / eps))
            qb = q0 + int(round(jp.tau_end / eps))
            qc = q0 + int(round(jp.tau / eps))
            if qb >= n or qc >= n:
                continue
            # only while the same contact episode persists
            if not in_contact[qa:qb + 1].all():
                continue
            out.append(SimEvent(
                kind="secondary-jump",
                time=times[qc],
                fc_before=float(fc[qa]),
                fc_after=float(fc[qb]),
            ))
    out.sort(key=lambda e: e.time)
    return tuple(out)


def simulate(sys: FirstOrderSystem, config: ContactConfig, *,
             kernel: MemoryKernel | None = None,
             proj: Projection | None = None,
             g: ForcingTerm | None = None,
             floor: float = REGULARITY_FLOOR,
             check_regularity: bool = True,
             clamp_force: bool = True) -> SimulationResult:
    """Run the reduced contact model over [0, t_end].

    Deterministic: identical inputs produce identical outputs. The memory
    kernel is tabulated on the step grid (or passed in, precomputed);
    the forcing term is evaluated in closed form at every grid time.
    `clamp_force=False` disables the release rule so the in-contact delay
    equation runs unclamped; this diagnostic mode exposes delayed force
    jumps that would otherwise trigger release.

    Raises
    ------
    SingularModelError
        If contact is enabled and the structure's frequency scaling marks
        it as singular (exponent > 1), or the kernel's short-time level
        vanishes.
    """
    ms = sys.structure
    contact_enabled = config.stop_position is not None
    if contact_enabled and check_regularity and ms.nominal_alpha > 1.0:
        raise SingularModelError(
            f"model family {ms.model_tag!r} has frequency-scaling exponent "
            f"{ms.nominal_alpha:g} > 1: the contact force has no finite limit, "
            f"so contact simulation is refused (the short-time kernel level "
            f"[L+]_2 vanishes under refinement)"
        )

    eps = config.eps
    nsteps = int(round(config.t_end / eps))
    if proj is None:
        proj = build_projection(sys)
    if kernel is None:
        horizon = config.kernel_horizon if config.kernel_horizon is not None \
            else config.t_end
        horizon = max(horizon, 60 * eps)
        kernel = memory_kernel(sys, proj, eps, horizon,
                               truncation_tol=config.truncation_tol,
                               plateau_window=config.plateau_window,
                               floor=floor)
    if g is None:
        g = forcing_term(sys, proj)

    lp2 = kernel.L_plus[1]
    if contact_enabled and abs(lp2) < floor:
        raise SingularModelError(
            "singular model: contact force undefined because the short-time "
            "kernel level [L+]_2 vanishes"
        )

    times = eps * np.arange(nsteps + 1)
    g2 = g.component2(times)
    A = proj.A
    y0 = proj.V() @ sys.initial_state
    inc = kernel.increments
    stop = config.stop_position if contact_enabled else -np.inf
    # an unreachable stop still runs the free-flight branch; lp2 may be 0 then
    lp2_eff = lp2 if abs(lp2) >= floor else 1.0

    y, fc, in_c, (ek, es, efb, efa), conv_ops = _kernels.run_contact(
        inc[:, 0], inc[:, 1], g2, A[0, 0], A[0, 1], A[1, 0], A[1, 1],
        kernel.L_infty[1], lp2_eff, stop, eps, nsteps, y0[0], y0[1],
        kernel.truncation_index, clamp_force,
    )
    events = tuple(
        SimEvent(kind=EVENT_KINDS[int(k)], time=float(times[s]),
                 fc_before=float(fb), fc_after=float(fa))
        for k, s, fb, fa in zip(ek, es, efb, efa)
    )
    events = _annotate_secondary_jumps(events, kernel, times, fc, in_c, eps)
    return SimulationResult(times=times, y=y, fc=fc, in_contact=in_c,
                            events=events, conv_ops=int(conv_ops))
