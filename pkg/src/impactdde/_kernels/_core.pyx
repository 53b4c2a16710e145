# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled stepping kernels; semantics match ``_ref.py`` exactly."""

import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND = "compiled"


def run_contact(dl1, dl2, g2, double a11, double a12, double a21, double a22,
                double linf2, double lplus2, double ybar1, double eps,
                long nsteps, double y10, double y20, long jmax,
                bint clamp=True):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] dl1a = np.ascontiguousarray(dl1, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] dl2a = np.ascontiguousarray(dl2, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] g2a = np.ascontiguousarray(g2, dtype=np.float64)
    cdef double[::1] vdl1 = dl1a
    cdef double[::1] vdl2 = dl2a
    cdef double[::1] vg2 = g2a

    if jmax > vdl2.shape[0]:
        jmax = vdl2.shape[0]

    cdef cnp.ndarray[cnp.float64_t, ndim=2] y = np.zeros((nsteps + 1, 2))
    cdef cnp.ndarray[cnp.float64_t, ndim=1] fc = np.zeros(nsteps + 1)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] contact = np.zeros(nsteps + 1, dtype=np.uint8)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] inc_q = np.zeros(nsteps + 2, dtype=np.int64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] inc_df = np.zeros(nsteps + 2)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] ev_kind = np.empty(nsteps + 2, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] ev_step = np.empty(nsteps + 2, dtype=np.int64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ev_fb = np.empty(nsteps + 2)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ev_fa = np.empty(nsteps + 2)

    cdef double[:, ::1] vy = y
    cdef double[::1] vfc = fc
    cdef cnp.uint8_t[::1] vcontact = contact
    cdef cnp.int64_t[::1] viq = inc_q
    cdef double[::1] vidf = inc_df
    cdef cnp.int64_t[::1] vek = ev_kind
    cdef cnp.int64_t[::1] ves = ev_step
    cdef double[::1] vefb = ev_fb
    cdef double[::1] vefa = ev_fa

    cdef bint use1 = np.any(dl1a != 0.0)
    cdef long ninc = 0, start = 0, nev = 0
    cdef bint in_c = False
    cdef double aybar2 = a21 * ybar1
    cdef long long conv_ops = 0
    cdef long q, i, j
    cdef double c1, c2, y1n, y2n, v_inc, f, dfi

    vy[0, 0] = y10
    vy[0, 1] = y20

    for q in range(nsteps):
        while start < ninc and q - viq[start] >= jmax:
            start += 1
        c1 = 0.0
        c2 = 0.0
        if use1:
            for i in range(start, ninc):
                j = q - viq[i]
                dfi = vidf[i]
                c1 += vdl1[j] * dfi
                c2 += vdl2[j] * dfi
        else:
            for i in range(start, ninc):
                c2 += vdl2[q - viq[i]] * vidf[i]
        conv_ops += ninc - start

        if not in_c:
            y1n = vy[q, 0] + eps * (a11 * vy[q, 0] + a12 * vy[q, 1]) + c1
            y2n = vy[q, 1] + eps * (a21 * vy[q, 0] + a22 * vy[q, 1] + vg2[q]) + c2
            if y1n <= ybar1:
                v_inc = vy[q, 1]
                f = -v_inc / lplus2
                if f < 0.0:
                    f = 0.0
                vy[q + 1, 0] = ybar1
                vy[q + 1, 1] = 0.0
                vfc[q + 1] = f
                vcontact[q + 1] = 1
                in_c = True
                vek[nev] = 0
                ves[nev] = q + 1
                vefb[nev] = 0.0
                vefa[nev] = f
                nev += 1
                if f != 0.0:
                    viq[ninc] = q + 1
                    vidf[ninc] = f
                    ninc += 1
            else:
                vy[q + 1, 0] = y1n
                vy[q + 1, 1] = y2n
        else:
            f = vfc[q] - (eps / lplus2) * (linf2 * vfc[q] + aybar2 + vg2[q]) - c2 / lplus2
            if f < 0.0 and clamp:
                vek[nev] = 1
                ves[nev] = q + 1
                vefb[nev] = vfc[q]
                vefa[nev] = 0.0
                nev += 1
                f = 0.0
                in_c = False
                vy[q + 1, 0] = ybar1 + eps * (a11 * ybar1) + c1
                vy[q + 1, 1] = eps * (a21 * ybar1 + vg2[q]) + c2
            else:
                vy[q + 1, 0] = ybar1
                vy[q + 1, 1] = 0.0
                vcontact[q + 1] = 1
            vfc[q + 1] = f
            if f != vfc[q]:
                viq[ninc] = q + 1
                vidf[ninc] = f - vfc[q]
                ninc += 1

    events = (ev_kind[:nev].copy(), ev_step[:nev].copy(),
              ev_fb[:nev].copy(), ev_fa[:nev].copy())
    return y, fc, contact, events, int(conv_ops)


def run_prescribed(dl1, dl2, g2, double a11, double a12, double a21, double a22,
                   double linf1, double linf2, fc, double eps,
                   double y10, double y20):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] dl1a = np.ascontiguousarray(dl1, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] dl2a = np.ascontiguousarray(dl2, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] g2a = np.ascontiguousarray(g2, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] fca = np.ascontiguousarray(fc, dtype=np.float64)
    cdef double[::1] vdl1 = dl1a
    cdef double[::1] vdl2 = dl2a
    cdef double[::1] vg2 = g2a
    cdef double[::1] vfc = fca

    cdef long nsteps = vfc.shape[0] - 1
    cdef cnp.ndarray[cnp.float64_t, ndim=2] y = np.zeros((nsteps + 1, 2))
    cdef double[:, ::1] vy = y
    cdef cnp.ndarray[cnp.float64_t, ndim=1] dfa = np.diff(fca)
    cdef double[::1] vdf = dfa
    cdef bint use1 = np.any(dl1a != 0.0)
    cdef long q, j
    cdef double c1, c2, dfi

    vy[0, 0] = y10
    vy[0, 1] = y20
    for q in range(nsteps):
        c1 = 0.0
        c2 = 0.0
        if use1:
            for j in range(q):
                dfi = vdf[q - 1 - j]
                c1 += vdl1[j] * dfi
                c2 += vdl2[j] * dfi
        else:
            for j in range(q):
                c2 += vdl2[j] * vdf[q - 1 - j]
        vy[q + 1, 0] = vy[q, 0] + eps * (a11 * vy[q, 0] + a12 * vy[q, 1] + linf1 * vfc[q]) + c1
        vy[q + 1, 1] = vy[q, 1] + eps * (a21 * vy[q, 0] + a22 * vy[q, 1] + linf2 * vfc[q] + vg2[q]) + c2
    return y
