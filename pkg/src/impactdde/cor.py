"""Coefficient-of-restitution baseline on the full modal system.

Between events the modes evolve by exact damped-oscillator closed forms;
tip crossings of the stop are located by block scanning plus bisection and
resolved with the instantaneous restitution map. Chatter accumulations
(geometrically collapsing rebound velocities) are terminated by a standard
sticking regularization: once the incident speed falls below a relative
threshold the tip is held on the stop by exact constrained evolution until
the constraint force turns negative. Set ``stick_rel=0`` for the raw
event-driven model, which aborts on chatter overflow instead.
"""

from __future__ import annotations

import numpy as np

from ._eig import eig_refined
from .errors import ChatterOverflowError
from .simulate import ContactConfig, SimEvent, SimulationResult
from .structures import FirstOrderSystem, HarmonicForcing, ModalStructure

__all__ = [
    "cor_impact_map",
    "simulate_cor",
    "chatter_metrics",
    "ModalPropagator",
]


def cor_impact_map(v: np.ndarray, n: np.ndarray, restitution: float) -> np.ndarray:
    """Post-impact modal velocities for an instantaneous impact.

    Reflects the normal component: v+ = (I - (1 + C) n n^T / (n . n)) v,
    so n . v+ = -C (n . v); modal positions are left to the caller
    (positions do not jump).
    """
    n = np.asarray(n, dtype=float)
    v = np.asarray(v, dtype=float)
    nn = float(n @ n)
    if nn == 0.0:
        raise ValueError("impact direction vector vanishes")
    if not 0.0 <= restitution <= 1.0:
        raise ValueError("restitution must lie in [0, 1]")
    return v - (1.0 + restitution) * (n @ v) / nn * n


class ModalPropagator:
    """Exact per-mode propagation with optional single-mode harmonic forcing."""

    def __init__(self, ms: ModalStructure, forcing: HarmonicForcing):
        self.om = ms.omegas
        self.dd = ms.dampings
        self.wd = self.om * np.sqrt(1.0 - self.dd**2)
        self.zw = self.dd * self.om
        self.forcing = forcing
        self.pc = np.zeros(ms.n_modes)
        self.ps = np.zeros(ms.n_modes)
        f = forcing
        if f.amplitude != 0.0:
            k = f.mode - 1
            dm = (self.om[k] ** 2 - f.frequency**2) ** 2 \
                + (2 * self.dd[k] * self.om[k] * f.frequency) ** 2
            self.pc[k] = f.amplitude * (self.om[k] ** 2 - f.frequency**2) / dm
            self.ps[k] = f.amplitude * (2 * self.dd[k] * self.om[k] * f.frequency) / dm

    def particular(self, t):
        nu = self.forcing.frequency
        t = np.asarray(t, dtype=float)
        c, s = np.cos(nu * t), np.sin(nu * t)
        xp = np.multiply.outer(self.pc, c) + np.multiply.outer(self.ps, s)
        vp = nu * (np.multiply.outer(self.ps, c) - np.multiply.outer(self.pc, s))
        return xp, vp

    def advance(self, x0, v0, t0, dt):
        """States at absolute times t0 + dt; dt scalar or (B,) -> (M,) or (M, B)."""
        dt = np.asarray(dt, dtype=float)
        xp0, vp0 = self.particular(t0)
        a = x0 - xp0
        b = v0 - vp0
        e = np.exp(-np.multiply.outer(self.zw, dt))
        c = np.cos(np.multiply.outer(self.wd, dt))
        s = np.sin(np.multiply.outer(self.wd, dt))
        bw = (b + self.zw * a) / self.wd
        cv = (self.om**2 * a + self.zw * b) / self.wd
        if dt.ndim == 0:
            xh = e * (a * c + bw * s)
            vh = e * (b * c - cv * s)
        else:
            xh = e * (a[:, None] * c + bw[:, None] * s)
            vh = e * (b[:, None] * c - cv[:, None] * s)
        xp, vp = self.particular(t0 + dt)
        return xh + xp, vh + vp


class _StickPropagator:
    """Exact evolution with the tip pinned: accelerations projected off n."""

    def __init__(self, ms: ModalStructure, forcing: HarmonicForcing):
        m = ms.n_modes
        n = ms.tip_values
        self.n = n
        self.nn = float(n @ n)
        self.om2 = ms.omegas**2
        self.dzw = 2.0 * ms.dampings * ms.omegas
        self.m = m
        self.forcing = forcing
        P = np.eye(m) - np.outer(n, n) / self.nn
        Rs = np.zeros((2 * m, 2 * m))
        Rs[:m, m:] = np.eye(m)
        Rs[m:, :m] = -P * self.om2[None, :]
        Rs[m:, m:] = -P * self.dzw[None, :]
        self.lam, self.X, _ = eig_refined(Rs)
        self.Xinv = np.linalg.inv(self.X)
        self.w = np.zeros(2 * m, dtype=complex)
        if forcing.amplitude != 0.0:
            F = np.zeros(2 * m)
            F[m + forcing.mode - 1] = forcing.amplitude
            F[m:] = P @ F[m:]
            self.w = np.linalg.solve(
                1j * forcing.frequency * np.eye(2 * m) - Rs, F.astype(complex))

    def _part(self, t):
        if self.forcing.amplitude == 0.0:
            return np.zeros((2 * self.m,) + np.shape(np.asarray(t, dtype=float)))
        ph = np.exp(1j * self.forcing.frequency * np.asarray(t, dtype=float))
        return np.real(np.multiply.outer(self.w, ph))

    def advance(self, x0, v0, t0, dt):
        z0 = np.concatenate([x0, v0]) - self._part(t0)
        coef = self.Xinv @ z0.astype(complex)
        dt = np.asarray(dt, dtype=float)
        e = np.exp(np.multiply.outer(self.lam, dt))
        if dt.ndim == 0:
            z = np.real(self.X @ (coef * e)) + self._part(t0 + dt)
        else:
            z = np.real(self.X @ (coef[:, None] * e)) + self._part(t0 + dt)
        return z[:self.m], z[self.m:]

    def external_force(self, t):
        fe = np.zeros((self.m,) + np.shape(np.asarray(t, dtype=float)))
        if self.forcing.amplitude != 0.0:
            fe[self.forcing.mode - 1] = self.forcing.amplitude * np.cos(
                self.forcing.frequency * np.asarray(t, dtype=float))
        return fe

    def constraint_force(self, x, v, t):
        """Lagrange multiplier holding the tip; negative means lift-off."""
        fe = self.external_force(t)
        if np.ndim(x) > 1:
            acc = self.om2[:, None] * x + self.dzw[:, None] * v - fe
        else:
            acc = self.om2 * x + self.dzw * v - fe
        return np.tensordot(self.n, acc, axes=1) / self.nn


def simulate_cor(sys: FirstOrderSystem, config: ContactConfig, *,
                 oversample: int = 8,
                 stick_rel: float = 1e-3,
                 max_events: int = 10_000_000) -> SimulationResult:
    """Simulate the full modal system with instantaneous restitution impacts.

    The trajectory is sampled on the same uniform grid as the reduced
    simulator; the contact-force series is all zeros (undefined in this
    model) and every impact is logged. Crossings are bracketed on a scan
    grid of 2 pi / (oversample * omega_max) and bisected to 1e-10 * eps.

    Raises
    ------
    ChatterOverflowError
        When the impact count exceeds `max_events` (raw model, Zeno
        accumulation).
    """
    ms = sys.structure
    m = ms.n_modes
    n = ms.tip_values
    prop = ModalPropagator(ms, sys.forcing)
    eps = config.eps
    t_end = config.t_end
    nsamp = int(round(t_end / eps))
    times = eps * np.arange(nsamp + 1)
    ys = np.zeros((nsamp + 1, 2))
    contact = np.zeros(nsamp + 1, dtype=np.uint8)
    events: list[SimEvent] = []

    x = sys.initial_state[:m].copy()
    v = sys.initial_state[m:].copy()
    t = 0.0
    ys[0] = (n @ x, n @ v)
    filled = 0

    def fill(upto_t, prp, sticking):
        nonlocal filled
        j0 = filled + 1
        j1 = min(int(np.floor(upto_t / eps + 1e-12)), nsamp)
        if j1 < j0:
            return
        ts = times[j0:j1 + 1]
        xx, vv = prp.advance(x, v, t, ts - t)
        ys[j0:j1 + 1, 0] = n @ xx
        ys[j0:j1 + 1, 1] = n @ vv
        if sticking:
            contact[j0:j1 + 1] = 1
        filled = j1

    stop = config.stop_position
    if stop is None:
        fill(t_end, prop, False)
        return SimulationResult(times=times, y=ys, fc=np.zeros(nsamp + 1),
                                in_contact=contact, events=())

    h = 2 * np.pi / (ms.omegas[-1] * oversample)
    tol_t = max(1e-10 * eps, 4 * np.spacing(t_end))
    gap_max = 20 * 2 * np.pi / ms.omegas[-1]
    block = 64
    stick = None
    in_stick = False
    cr = config.restitution
    v_run_ref = 0.0
    t_last_impact = -np.inf
    n_impacts = 0

    def scan(indicator_neg, prp):
        """First dt > 0 with indicator <= 0, scanned in blocks, then bisected."""
        off = 0.0
        remaining = t_end - t
        while off < remaining:
            dts = off + h * np.arange(1, block + 1)
            dts = dts[dts <= remaining + h]
            if len(dts) == 0:
                return None
            vals = indicator_neg(dts)
            hit = np.where(vals <= 0.0)[0]
            if hit.size:
                i = int(hit[0])
                lo = dts[i - 1] if i > 0 else off
                hi = dts[i]
                while hi - lo > tol_t:
                    mid = 0.5 * (lo + hi)
                    if indicator_neg(np.array([mid]))[0] <= 0.0:
                        hi = mid
                    else:
                        lo = mid
                return hi if hi <= remaining else None
            off = dts[-1]
        return None

    while t < t_end - tol_t:
        if not in_stick:
            def gap(dts):
                xx, _ = prop.advance(x, v, t, dts)
                return (n @ xx) - stop
            dt_hit = scan(gap, prop)
            if dt_hit is None:
                fill(t_end, prop, False)
                break
            t_hit = t + dt_hit
            fill(t_hit, prop, False)
            x, v = prop.advance(x, v, t, dt_hit)
            t = t_hit
            vn = float(n @ v)
            if t - t_last_impact > gap_max:
                v_run_ref = 0.0
            v_run_ref = max(v_run_ref, abs(vn))
            t_last_impact = t
            if stick_rel > 0.0 and abs(vn) < stick_rel * v_run_ref:
                if stick is None:
                    stick = _StickPropagator(ms, sys.forcing)
                v = v - vn / stick.nn * n
                x = x + (stop - float(n @ x)) / stick.nn * n
                in_stick = True
                events.append(SimEvent("stick", t, 0.0, 0.0))
            else:
                v = cor_impact_map(v, n, cr)
                events.append(SimEvent("impact", t, 0.0, 0.0))
                n_impacts += 1
                if n_impacts > max_events:
                    raise ChatterOverflowError(
                        f"chatter overflow: more than {max_events} impacts")
        else:
            def lam_pos(dts):
                xx, vv = stick.advance(x, v, t, dts)
                return stick.constraint_force(xx, vv, t + dts)
            dt_lift = scan(lam_pos, stick)
            if dt_lift is None:
                fill(t_end, stick, True)
                break
            t_lift = t + dt_lift
            fill(t_lift, stick, True)
            x, v = stick.advance(x, v, t, dt_lift)
            x = x + (stop - float(n @ x)) / stick.nn * n
            v = v - float(n @ v) / stick.nn * n
            t = t_lift
            in_stick = False
            events.append(SimEvent("release", t, 0.0, 0.0))

    if filled < nsamp:
        fill(t_end, stick if in_stick else prop, in_stick)
    return SimulationResult(times=times, y=ys, fc=np.zeros(nsamp + 1),
                            in_contact=contact, events=tuple(events))


def chatter_metrics(result: SimulationResult, gap_factor: float = 10.0) -> dict:
    """Event-rate statistics of an impact log.

    Episodes are maximal runs of impacts whose gaps stay below
    `gap_factor` times the median gap; the rate is events per unit time
    inside episodes and the dominant frequency is the reciprocal median
    in-episode gap. Fewer than two impacts give empty metrics.
    """
    t = result.event_times("impact")
    if len(t) < 2:
        return {}
    gaps = np.diff(t)
    med = float(np.median(gaps))
    split = np.where(gaps > gap_factor * med)[0]
    starts = np.concatenate([[0], split + 1])
    ends = np.concatenate([split, [len(t) - 1]])
    duration = 0.0
    count = 0
    in_gaps = []
    for a, b in zip(starts, ends):
        if b > a:
            duration += t[b] - t[a]
            count += b - a + 1
            in_gaps.append(gaps[a:b])
    if duration == 0.0 or not in_gaps:
        return {}
    in_gaps = np.concatenate(in_gaps)
    return {
        "n_events": int(len(t)),
        "n_episodes": int(len(starts)),
        "event_rate": count / duration,
        "dominant_event_frequency": 1.0 / float(np.median(in_gaps)),
    }
