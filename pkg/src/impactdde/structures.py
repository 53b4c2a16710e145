"""Finite-dimensional models of impacting elastic structures.

Three backends produce the same modal data: an Euler-Bernoulli cantilever
(analytic characteristic roots), a fixed-free string (exact modes, used as
an analytically controlled testbed), and a Timoshenko beam discretized by
Chebyshev collocation and then converted to modal coordinates.

All modal data is mass-normalized, so the same tip-value vector both
extracts the contact-point motion and distributes the contact force.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from ._eig import eig_refined
from .chebyshev import chebyshev_points, clenshaw_curtis_weights, diff_matrices
from .errors import ConfigurationError, DiscretizationError

__all__ = [
    "ModalStructure",
    "FirstOrderSystem",
    "CollocationOperator",
    "HarmonicForcing",
    "eb_frequencies",
    "eb_structure",
    "string_structure",
    "timoshenko_collocation",
    "to_modal",
    "assemble_first_order",
    "tip_normalized_ic",
]

MODEL_TAGS = ("euler-bernoulli", "timoshenko", "string")


def _readonly(a) -> np.ndarray:
    out = np.ascontiguousarray(np.asarray(a, dtype=float))
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class ModalStructure:
    """Mass-normalized modal model: frequencies, damping ratios, tip values.

    Attributes
    ----------
    omegas : ndarray
        Natural frequencies, strictly positive, nondecreasing.
    dampings : ndarray
        Modal damping ratios in [0, 1).
    tip_values : ndarray
        Mode-shape values at the contact point (mass-normalized modes).
    model_tag : str
        One of ``euler-bernoulli``, ``timoshenko``, ``string``.
    nominal_alpha : float
        Asymptotic growth exponent of the natural frequencies with mode
        number; > 1 marks the family as unsuitable for contact forces.
    """

    omegas: np.ndarray
    dampings: np.ndarray
    tip_values: np.ndarray
    model_tag: str
    nominal_alpha: float

    def __post_init__(self):
        object.__setattr__(self, "omegas", _readonly(self.omegas))
        object.__setattr__(self, "dampings", _readonly(self.dampings))
        object.__setattr__(self, "tip_values", _readonly(self.tip_values))
        m = len(self.omegas)
        if m < 1 or len(self.dampings) != m or len(self.tip_values) != m:
            raise ValueError("omegas, dampings, tip_values must have equal length >= 1")
        if not np.all(self.omegas > 0):
            raise ValueError("natural frequencies must be strictly positive")
        if np.any(np.diff(self.omegas) < 0):
            raise ValueError("natural frequencies must be nondecreasing")
        if np.any((self.dampings < 0) | (self.dampings >= 1)):
            raise ValueError("damping ratios must lie in [0, 1)")
        if self.model_tag not in MODEL_TAGS:
            raise ValueError(f"unknown model_tag {self.model_tag!r}")

    @property
    def n_modes(self) -> int:
        return len(self.omegas)


@dataclass(frozen=True)
class HarmonicForcing:
    """Single-mode harmonic drive: amplitude * cos(frequency * t) on `mode`.

    `mode` is 1-based; amplitude 0 means no external forcing.
    """

    mode: int = 1
    amplitude: float = 0.0
    frequency: float = 0.0

    def __post_init__(self):
        if self.mode < 1:
            raise ValueError("forcing mode index is 1-based")
        if self.amplitude != 0.0 and self.frequency < 0:
            raise ValueError("forcing frequency must be nonnegative")


@dataclass(frozen=True)
class FirstOrderSystem:
    """First-order form z' = R z + (0, n f_c) + (0, f_e) of a modal model."""

    structure: ModalStructure
    forcing: HarmonicForcing
    initial_state: np.ndarray  # (x(0), xdot(0)), length 2M

    def __post_init__(self):
        object.__setattr__(self, "initial_state", _readonly(self.initial_state))
        m = self.structure.n_modes
        if len(self.initial_state) != 2 * m:
            raise ValueError("initial_state must have length 2 * n_modes")
        if self.forcing.amplitude != 0.0 and self.forcing.mode > m:
            raise ValueError("forcing mode index exceeds mode count")

    @property
    def n_modes(self) -> int:
        return self.structure.n_modes

    @property
    def R(self) -> np.ndarray:
        """Dense block matrix [[0, I], [-Omega^2, -2 D Omega]]."""
        m = self.n_modes
        om = self.structure.omegas
        dd = self.structure.dampings
        r = np.zeros((2 * m, 2 * m))
        r[:m, m:] = np.eye(m)
        r[m:, :m] = -np.diag(om**2)
        r[m:, m:] = -2.0 * np.diag(dd * om)
        return r

    @property
    def influence(self) -> np.ndarray:
        """Contact-force influence vector (0, n)."""
        m = self.n_modes
        out = np.zeros(2 * m)
        out[m:] = self.structure.tip_values
        return out

    def forcing_vector(self, t) -> np.ndarray:
        """Modal external force f_e(t) as an (M,) or (M, T) array."""
        m = self.n_modes
        t = np.asarray(t, dtype=float)
        out = np.zeros((m,) + t.shape)
        f = self.forcing
        if f.amplitude != 0.0:
            out[f.mode - 1] = f.amplitude * np.cos(f.frequency * t)
        return out


@dataclass(frozen=True)
class CollocationOperator:
    """Semidiscrete Timoshenko beam: xddot = -K x + b f_c on interior nodes.

    The state stacks deflection and cross-section rotation at the interior
    Chebyshev nodes; the clamped-root and pinned-tip-rotation conditions are
    imposed by row replacement, and the tip shear condition is folded into
    the force influence. The contact force here is the modal-consistent one
    (power-conjugate to the tip velocity).
    """

    n_points: int
    beta: float
    gamma: float
    stiffness: np.ndarray        # K, (2(N-1))^2
    force_influence: np.ndarray  # b
    tip_extractor: np.ndarray    # u(1) = tip_extractor @ x at zero contact force
    mass_weights: np.ndarray     # discrete kinetic-energy weights per unknown
    tip_weight: float = field(default=0.0)  # quadrature weight of the tip node

    def __post_init__(self):
        for name in ("stiffness", "force_influence", "tip_extractor", "mass_weights"):
            object.__setattr__(self, name, _readonly(getattr(self, name)))

    @property
    def n_unknowns(self) -> int:
        return self.stiffness.shape[0]

    def residual(self, u: np.ndarray, phi: np.ndarray, fc: float) -> np.ndarray:
        """Acceleration residual of a static candidate state (zero means equilibrium)."""
        x = np.concatenate([u, phi])
        return -self.stiffness @ x + self.force_influence * fc


def eb_frequencies(n_modes: int) -> np.ndarray:
    """First natural frequencies of the unit Euler-Bernoulli cantilever.

    Roots of 1 + cos(sqrt(w)) cosh(sqrt(w)) = 0, solved in the overflow-safe
    form cos(s) + 1/cosh(s) = 0 by bracketed bisection of s = sqrt(w) in
    ((k-1) pi, k pi).

    Parameters
    ----------
    n_modes : int
        Number of frequencies to return.
    """
    if n_modes < 1:
        raise ValueError("need at least one mode")

    def f(s):
        # 1/cosh without overflow for large s
        return np.cos(s) + 2.0 * np.exp(-s) / (1.0 + np.exp(-2.0 * s))

    roots = np.empty(n_modes)
    for k in range(1, n_modes + 1):
        a = (k - 1) * np.pi + 1e-12
        b = k * np.pi - 1e-12
        if f(a) * f(b) > 0:
            raise DiscretizationError(
                f"failed to bracket cantilever characteristic root {k} in "
                f"({a:.6f}, {b:.6f})"
            )
        roots[k - 1] = brentq(f, a, b, xtol=1e-14, rtol=8.9e-16)
    return roots**2


def eb_structure(n_modes: int, damping: float = 0.0) -> ModalStructure:
    """Euler-Bernoulli cantilever modal model with uniform damping ratio.

    Mass-normalized tip values alternate +2, -2, ...; frequencies grow
    quadratically in the mode number (nominal_alpha = 2).
    """
    om = eb_frequencies(n_modes)
    tips = 2.0 * (-1.0) ** np.arange(n_modes)
    return ModalStructure(
        omegas=om,
        dampings=np.full(n_modes, float(damping)),
        tip_values=tips,
        model_tag="euler-bernoulli",
        nominal_alpha=2.0,
    )


def string_structure(n_modes: int, wave_speed: float = 1.0,
                     damping: float = 0.0) -> ModalStructure:
    """Fixed-free string modal model on the unit interval.

    omega_k = (k - 1/2) pi c with mass-normalized tip values of magnitude
    sqrt(2) and alternating sign. Frequencies are exactly linear in k
    (nominal_alpha = 1), and the undamped tip response carries wave returns,
    which makes this the controlled testbed for kernel discontinuities.
    """
    if wave_speed <= 0:
        raise ValueError("wave speed must be positive")
    k = np.arange(1, n_modes + 1)
    om = (k - 0.5) * np.pi * wave_speed
    tips = np.sqrt(2.0) * (-1.0) ** np.arange(n_modes)
    return ModalStructure(
        omegas=om,
        dampings=np.full(n_modes, float(damping)),
        tip_values=tips,
        model_tag="string",
        nominal_alpha=1.0,
    )


def timoshenko_collocation(n_points: int, beta: float, gamma: float) -> CollocationOperator:
    """Chebyshev collocation of the Timoshenko beam on [0, 1].

    The deflection u and rotation phi satisfy
        u_tt   = beta*gamma*(u'' - phi'),
        phi_tt = beta*phi'' + beta^2*gamma*(u' - phi),
    with u(0) = phi(0) = phi(1) = 0 and the tip shear condition folded into
    the force influence. The returned force influence is scaled so that the
    contact force is power-conjugate to the tip velocity (the same scaling
    the modal conversion produces).

    Parameters
    ----------
    n_points : int
        Polynomial degree N; the grid has N + 1 points and the dynamic
        state holds 2(N - 1) interior unknowns.
    """
    n = int(n_points)
    if n < 8:
        raise ConfigurationError("need at least 8 collocation points to resolve the boundary rows")
    if beta <= 0 or gamma <= 0:
        raise ValueError("beta and gamma must be positive")
    d1, d2 = diff_matrices(n, 2)
    w = clenshaw_curtis_weights(n)
    dnn = d1[n, n]
    # tip shear row: u'(1) - phi(1) = fc with phi(1) = 0, u(0) = 0
    #   -> u_N = (fc - sum_{j=1..N-1} d1[N,j] u_j) / d1[N,N]
    au = -d1[n, 1:n] / dnn
    nun = n - 1
    K = np.zeros((2 * nun, 2 * nun))
    b = np.zeros(2 * nun)
    bg = beta * gamma
    b2g = beta * beta * gamma
    for row, i in enumerate(range(1, n)):
        K[row, :nun] = -bg * (d2[i, 1:n] + d2[i, n] * au)
        K[row, nun:] = bg * d1[i, 1:n]
        b[row] = bg * d2[i, n] / dnn
        cphi = beta * d2[i, 1:n].copy()
        cphi[row] -= b2g
        K[nun + row, :nun] = -b2g * (d1[i, 1:n] + d1[i, n] * au)
        K[nun + row, nun:] = -cphi
        b[nun + row] = b2g * d1[i, n] / dnn
    # kinetic energy = 1/2 int(u_t^2) + 1/(2 beta) int(phi_t^2)
    weights = np.concatenate([w[1:n], w[1:n] / beta])
    tip = np.concatenate([au, np.zeros(nun)])
    # modal-consistent force units: power-conjugate to the tip velocity and
    # oriented so a positive force raises the tip (positive compliance)
    return CollocationOperator(
        n_points=n,
        beta=float(beta),
        gamma=float(gamma),
        stiffness=K,
        force_influence=-b / bg,
        tip_extractor=tip,
        mass_weights=weights,
        tip_weight=float(w[n]),
    )


def to_modal(op: CollocationOperator, damping: float,
             complex_tol: float = 1e-3) -> ModalStructure:
    """Convert a collocation operator to mass-normalized modal coordinates.

    Eigenvalues of the stiffness operator give the squared frequencies;
    modes are normalized to unit modal mass under the discrete kinetic
    inner product (including the slaved tip node), and tip values are read
    off with the tip extractor. Signs are fixed so tip values alternate
    +, -, +, ... like the analytic beam families.

    Complex eigenvalue pairs among the unresolved top of the collocation
    spectrum are accepted up to `complex_tol` relative imaginary part and
    projected to real frequencies; anything larger is a discretization
    failure.
    """
    if not 0 <= damping < 1:
        raise ValueError("damping ratio must lie in [0, 1)")
    K = op.stiffness
    lam, P, _ = eig_refined(K)
    scale = np.abs(lam).max()
    if np.abs(lam.imag).max() > complex_tol * scale:
        raise DiscretizationError(
            f"collocation stiffness has complex eigenvalues beyond tolerance "
            f"(|Im| up to {np.abs(lam.imag).max():.3e} against spectral scale "
            f"{scale:.3e}, tol {complex_tol:.1e}); refine or change the grid"
        )
    if np.any(lam.real < -1e-8 * scale):
        raise DiscretizationError("collocation stiffness has negative eigenvalues")
    # realify: complex-conjugate pairs span a real invariant plane
    modes = np.empty(P.shape)
    used = np.zeros(len(lam), dtype=bool)
    for i in range(len(lam)):
        if used[i]:
            continue
        if abs(lam[i].imag) <= 1e-13 * max(abs(lam[i]), 1.0):
            modes[:, i] = P[:, i].real
            used[i] = True
        else:
            rest = np.where(~used)[0]
            j = rest[np.argmin(np.abs(lam[rest] - lam[i].conjugate()))]
            modes[:, i] = P[:, i].real
            modes[:, j] = P[:, i].imag
            used[i] = used[j] = True
    lam = np.abs(lam.real)
    order = np.argsort(lam)
    lam = lam[order]
    modes = modes[:, order]

    nun = op.n_unknowns // 2
    au = op.tip_extractor[:nun]
    mass = op.mass_weights @ modes**2 + op.tip_weight * (au @ modes[:nun]) ** 2
    modes = modes / np.sqrt(mass)
    tips = op.tip_extractor @ modes
    signs = np.where(tips == 0, 1.0, np.sign(tips)) * (-1.0) ** np.arange(len(lam))
    tips = tips * signs
    return ModalStructure(
        omegas=np.sqrt(lam),
        dampings=np.full(len(lam), float(damping)),
        tip_values=tips,
        model_tag="timoshenko",
        nominal_alpha=1.0,
    )


def tip_normalized_ic(ms: ModalStructure, mode: int, displacement: float,
                      velocity: float) -> np.ndarray:
    """Modal initial state for a single-mode shape scaled to unit tip value.

    A deflection `displacement * psi_mode` with psi_mode(tip) = 1 has modal
    amplitude displacement / n_mode under mass normalization.
    """
    m = ms.n_modes
    if not 1 <= mode <= m:
        raise ValueError("initial-condition mode index out of range")
    nk = ms.tip_values[mode - 1]
    if nk == 0:
        raise ValueError("tip value of the requested mode vanishes")
    z = np.zeros(2 * m)
    z[mode - 1] = displacement / nk
    z[m + mode - 1] = velocity / nk
    return z


def assemble_first_order(ms: ModalStructure,
                         forcing: HarmonicForcing | None = None,
                         ic: np.ndarray | None = None) -> FirstOrderSystem:
    """Bundle a modal structure with forcing and initial state.

    Parameters
    ----------
    ms : ModalStructure
    forcing : HarmonicForcing, optional
        Defaults to no external forcing.
    ic : ndarray, optional
        Full (x(0), xdot(0)) state of length 2M; defaults to rest.
    """
    m = ms.n_modes
    if forcing is None:
        forcing = HarmonicForcing()
    if ic is None:
        ic = np.zeros(2 * m)
    return FirstOrderSystem(structure=ms, forcing=forcing, initial_state=np.asarray(ic, dtype=float))
