"""Pure-Python (numpy) reference implementation of the stepping kernels.

Semantics are identical to the compiled core in ``_core.pyx``; this module
is the import-time fallback and the readable specification of the loops.
"""

import numpy as np

BACKEND = "python"


def run_contact(dl1, dl2, g2, a11, a12, a21, a22, linf2, lplus2,
                ybar1, eps, nsteps, y10, y20, jmax, clamp=True):
    """Event-driven explicit-Euler run of the reduced contact model.

    Free flight advances the resolved pair with the memory sum over past
    contact-force increments; a predicted tip position at or below the stop
    triggers onset (state pinned, force jumps by -incident velocity / the
    short-time kernel level); in contact the force obeys the discretized
    evolution rule; a negative predicted force releases, and the release
    sample itself advances freely from the pinned state so the rebound
    velocity survives.

    Returns
    -------
    y : (nsteps+1, 2) array
    fc : (nsteps+1,) array
    in_contact : (nsteps+1,) uint8 array
    events : (kind, step, fc_before, fc_after) arrays; kind 0 = onset, 1 = release
    conv_ops : int
        Total number of increment multiplies spent in memory sums.
    """
    dl1 = np.asarray(dl1, dtype=float)
    dl2 = np.asarray(dl2, dtype=float)
    g2 = np.asarray(g2, dtype=float)
    nsteps = int(nsteps)
    jmax = min(int(jmax), len(dl2))
    use1 = bool(np.any(dl1 != 0.0))

    y = np.zeros((nsteps + 1, 2))
    fc = np.zeros(nsteps + 1)
    contact = np.zeros(nsteps + 1, dtype=np.uint8)
    y[0, 0] = y10
    y[0, 1] = y20

    inc_q = np.zeros(nsteps + 2, dtype=np.int64)
    inc_df = np.zeros(nsteps + 2)
    ninc = 0
    start = 0
    ev_kind = []
    ev_step = []
    ev_fb = []
    ev_fa = []
    in_c = False
    aybar2 = a21 * ybar1
    conv_ops = 0

    for q in range(nsteps):
        while start < ninc and q - inc_q[start] >= jmax:
            start += 1
        if start < ninc:
            lags = q - inc_q[start:ninc]
            dfs = inc_df[start:ninc]
            c2 = float(dl2[lags] @ dfs)
            c1 = float(dl1[lags] @ dfs) if use1 else 0.0
            conv_ops += ninc - start
        else:
            c1 = c2 = 0.0

        if not in_c:
            y1n = y[q, 0] + eps * (a11 * y[q, 0] + a12 * y[q, 1]) + c1
            y2n = y[q, 1] + eps * (a21 * y[q, 0] + a22 * y[q, 1] + g2[q]) + c2
            if y1n <= ybar1:
                v_inc = y[q, 1]
                f = -v_inc / lplus2
                if f < 0.0:
                    f = 0.0
                y[q + 1, 0] = ybar1
                y[q + 1, 1] = 0.0
                fc[q + 1] = f
                contact[q + 1] = 1
                in_c = True
                ev_kind.append(0)
                ev_step.append(q + 1)
                ev_fb.append(0.0)
                ev_fa.append(f)
                if f != 0.0:
                    inc_q[ninc] = q + 1
                    inc_df[ninc] = f
                    ninc += 1
            else:
                y[q + 1, 0] = y1n
                y[q + 1, 1] = y2n
        else:
            f = fc[q] - (eps / lplus2) * (linf2 * fc[q] + aybar2 + g2[q]) - c2 / lplus2
            if f < 0.0 and clamp:
                ev_kind.append(1)
                ev_step.append(q + 1)
                ev_fb.append(fc[q])
                ev_fa.append(0.0)
                f = 0.0
                in_c = False
                # release sample advances freely from the pinned state
                y[q + 1, 0] = ybar1 + eps * (a11 * ybar1) + c1
                y[q + 1, 1] = eps * (a21 * ybar1 + g2[q]) + c2
            else:
                y[q + 1, 0] = ybar1
                y[q + 1, 1] = 0.0
                contact[q + 1] = 1
            fc[q + 1] = f
            if f != fc[q]:
                inc_q[ninc] = q + 1
                inc_df[ninc] = f - fc[q]
                ninc += 1

    events = (np.array(ev_kind, dtype=np.int64),
              np.array(ev_step, dtype=np.int64),
              np.array(ev_fb), np.array(ev_fa))
    return y, fc, contact, events, conv_ops


def run_prescribed(dl1, dl2, g2, a11, a12, a21, a22, linf1, linf2,
                   fc, eps, y10, y20):
    """Explicit-Euler run of the reduced equation with a prescribed force.

    Implements the full update
        y_{q+1} = y_q + eps (A y_q + L_inf f_q + g_q) + sum dL_j (f_{q-j} - f_{q-j-1}),
    of which the contact stepper's free flight is the f == 0 special case.
    """
    dl1 = np.asarray(dl1, dtype=float)
    dl2 = np.asarray(dl2, dtype=float)
    g2 = np.asarray(g2, dtype=float)
    fc = np.asarray(fc, dtype=float)
    nsteps = len(fc) - 1
    y = np.zeros((nsteps + 1, 2))
    y[0] = (y10, y20)
    df = np.diff(fc)
    use1 = bool(np.any(dl1 != 0.0))
    for q in range(nsteps):
        if q >= 1:
            # sum_{j=0}^{q-1} dL[j] * df[q-1-j]
            seg = df[:q][::-1]
            c2 = float(dl2[:q] @ seg)
            c1 = float(dl1[:q] @ seg) if use1 else 0.0
        else:
            c1 = c2 = 0.0
        y[q + 1, 0] = y[q, 0] + eps * (a11 * y[q, 0] + a12 * y[q, 1] + linf1 * fc[q]) + c1
        y[q + 1, 1] = y[q, 1] + eps * (a21 * y[q, 0] + a22 * y[q, 1] + linf2 * fc[q] + g2[q]) + c2
    return y
