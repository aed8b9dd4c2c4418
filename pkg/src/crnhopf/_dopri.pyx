# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled Dormand--Prince 5(4) integrator for polynomial vector fields.

Same signature and algorithm as :mod:`crnhopf._dopri_py`.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs, pow, isfinite
from libc.stdlib cimport malloc, free

cnp.import_array()

KERNEL = "cython"

DEF A21 = 0.2
DEF A31 = 0.075
DEF A32 = 0.225

cdef double _A41 = 44.0 / 45.0, _A42 = -56.0 / 15.0, _A43 = 32.0 / 9.0
cdef double _A51 = 19372.0 / 6561.0, _A52 = -25360.0 / 2187.0, _A53 = 64448.0 / 6561.0, _A54 = -212.0 / 729.0
cdef double _A61 = 9017.0 / 3168.0, _A62 = -355.0 / 33.0, _A63 = 46732.0 / 5247.0, _A64 = 49.0 / 176.0, _A65 = -5103.0 / 18656.0
cdef double _A71 = 35.0 / 384.0, _A73 = 500.0 / 1113.0, _A74 = 125.0 / 192.0, _A75 = -2187.0 / 6784.0, _A76 = 11.0 / 84.0
cdef double _E1 = 71.0 / 57600.0, _E3 = -71.0 / 16695.0, _E4 = 71.0 / 1920.0, _E5 = -17253.0 / 339200.0
cdef double _E6 = 22.0 / 525.0, _E7 = -1.0 / 40.0


cdef struct Field:
    long* E
    double* C
    int n
    int M
    int var
    int dim
    double* mon
    double* jac
    double* tmp


cdef inline double ipow(double x, long k) nogil:
    cdef double r = 1.0
    while k > 0:
        if k & 1:
            r *= x
        x *= x
        k >>= 1
    return r


cdef void rhs(Field* F, double* y, double* out) noexcept nogil:
    cdef int n = F.n, M = F.M
    cdef int m, i, k, j
    cdef long e
    cdef double v, acc, d
    for m in range(M):
        v = 1.0
        for i in range(n):
            e = F.E[m * n + i]
            if e:
                v *= ipow(y[i], e)
        F.mon[m] = v
    for k in range(n):
        acc = 0.0
        for m in range(M):
            acc += F.C[k * M + m] * F.mon[m]
        out[k] = acc
    if not F.var:
        return
    for i in range(n):
        for k in range(n):
            F.jac[k * n + i] = 0.0
        for m in range(M):
            e = F.E[m * n + i]
            if e == 0:
                continue
            v = <double> e
            for j in range(n):
                if j == i:
                    if e > 1:
                        v *= ipow(y[j], e - 1)
                elif F.E[m * n + j]:
                    v *= ipow(y[j], F.E[m * n + j])
            for k in range(n):
                F.jac[k * n + i] += F.C[k * M + m] * v
    # Phi' = J Phi, Phi stored row-major after the state
    for k in range(n):
        for j in range(n):
            acc = 0.0
            for i in range(n):
                acc += F.jac[k * n + i] * y[n + i * n + j]
            out[n + k * n + j] = acc


cdef int step(Field* F, double* y, double* k1, double h,
              double* k2, double* k3, double* k4, double* k5, double* k6,
              double* ys, double* ynew, double* k7, double* err) noexcept nogil:
    cdef int dim = F.dim, n = F.n, i
    for i in range(dim):
        ys[i] = y[i] + h * (A21 * k1[i])
    rhs(F, ys, k2)
    for i in range(dim):
        ys[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i])
    rhs(F, ys, k3)
    for i in range(dim):
        ys[i] = y[i] + h * (_A41 * k1[i] + _A42 * k2[i] + _A43 * k3[i])
    rhs(F, ys, k4)
    for i in range(dim):
        ys[i] = y[i] + h * (_A51 * k1[i] + _A52 * k2[i] + _A53 * k3[i] + _A54 * k4[i])
    rhs(F, ys, k5)
    for i in range(dim):
        ys[i] = y[i] + h * (_A61 * k1[i] + _A62 * k2[i] + _A63 * k3[i] + _A64 * k4[i] + _A65 * k5[i])
    for i in range(n):
        if ys[i] <= 0.0:
            return 1
    rhs(F, ys, k6)
    for i in range(dim):
        ynew[i] = y[i] + h * (_A71 * k1[i] + _A73 * k3[i] + _A74 * k4[i] + _A75 * k5[i] + _A76 * k6[i])
        if not isfinite(ynew[i]):
            return 1
    for i in range(n):
        if ynew[i] <= 0.0:
            return 1
    rhs(F, ynew, k7)
    for i in range(dim):
        err[i] = h * (_E1 * k1[i] + _E3 * k3[i] + _E4 * k4[i] + _E5 * k5[i] + _E6 * k6[i] + _E7 * k7[i])
    return 0


cdef double section(double* nrm, double* y, int n, double offset) noexcept nogil:
    cdef double g = -offset
    cdef int i
    for i in range(n):
        g += nrm[i] * y[i]
    return g


def integrate(E, C, y0, double t_end, double rtol=1e-10, double atol=1e-12, double h0=0.0,
              double hmax=0.0, long max_steps=1000000, variational=False, normal=None,
              double offset=0.0, int direction=1, int max_crossings=0, double t_min=0.0,
              t_out=None, record=False):
    """Integrate from t=0 to ``t_end``; see :func:`crnhopf._dopri_py.integrate`."""
    cdef cnp.ndarray[long, ndim=2, mode="c"] Ea = np.ascontiguousarray(E, dtype=np.int64).astype(np.dtype("l"), copy=False)
    cdef cnp.ndarray[double, ndim=2, mode="c"] Ca = np.ascontiguousarray(C, dtype=float)
    cdef int n = Ca.shape[0]
    cdef int M = Ca.shape[1]
    yv = np.array(y0, dtype=float)
    cdef int var = 1 if variational else 0
    if var and yv.size == n:
        yv = np.concatenate([yv, np.eye(n).ravel()])
    cdef int dim = yv.size
    cdef cnp.ndarray[double, ndim=1, mode="c"] ya = np.ascontiguousarray(yv)
    cdef int has_sec = normal is not None
    cdef cnp.ndarray[double, ndim=1, mode="c"] nrm = np.ascontiguousarray(
        normal if has_sec else np.zeros(n), dtype=float)
    cdef cnp.ndarray[double, ndim=1, mode="c"] tout = np.ascontiguousarray(
        [] if t_out is None else t_out, dtype=float)
    cdef int nout = tout.shape[0]
    out_y = np.empty((nout, dim))
    cdef int iout = 0

    cdef Field F
    F.E = <long*> Ea.data
    F.C = <double*> Ca.data
    F.n = n
    F.M = M
    F.var = var
    F.dim = dim
    cdef double* work = <double*> malloc(sizeof(double) * (M + 2 * n * n + 16 * dim + 8))
    if work == NULL:
        raise MemoryError()
    F.mon = work
    F.jac = work + M
    F.tmp = F.jac + n * n
    cdef double* y = F.tmp + n * n
    cdef double* k1 = y + dim
    cdef double* k2 = k1 + dim
    cdef double* k3 = k2 + dim
    cdef double* k4 = k3 + dim
    cdef double* k5 = k4 + dim
    cdef double* k6 = k5 + dim
    cdef double* k7 = k6 + dim
    cdef double* ys = k7 + dim
    cdef double* ynew = ys + dim
    cdef double* errv = ynew + dim
    cdef double* yprev = errv + dim
    cdef double* k1prev = yprev + dim
    cdef double* ytr = k1prev + dim
    cdef double* etmp = ytr + dim
    cdef double* k7t = etmp + dim

    cdef int i, status = 0, rc, reject = 0, last_out, crossed, side, it
    cdef double t = 0.0, h, hnew, err, fac, fac11, facold = 1e-4, beta = 0.04
    cdef double expo1 = 0.2 - beta * 0.75
    cdef double sc, d0, d1, g_prev = 0.0, g_new, tnew, s
    cdef double lo, hi, glo, ghi, theta, gt
    cdef long nsteps = 0, nrej = 0
    ts = [] ; ysl = [] ; cross_t = [] ; cross_y = []
    try:
        for i in range(dim):
            y[i] = ya[i]
        while iout < nout and tout[iout] <= 0.0:
            out_y[iout] = ya
            iout += 1
        rhs(&F, y, k1)
        if h0 <= 0:
            d0 = 0.0
            d1 = 0.0
            for i in range(dim):
                sc = atol + rtol * fabs(y[i])
                d0 += (y[i] / sc) ** 2
                d1 += (k1[i] / sc) ** 2
            d0 = sqrt(d0 / dim)
            d1 = sqrt(d1 / dim)
            h = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
            h = min(h, t_end)
        else:
            h = min(h0, t_end)
        if hmax <= 0:
            hmax = t_end
        if has_sec:
            g_prev = section(<double*> nrm.data, y, n, offset)
        if record:
            ts.append(0.0)
            ysl.append(np.array([y[i] for i in range(n)]))
        while True:
            if t >= t_end:
                break
            if nsteps >= max_steps:
                status = 3
                break
            h = min(h, hmax)
            last_out = 0
            if iout < nout and t + h >= tout[iout]:
                h = tout[iout] - t
                last_out = 1
            if t + h >= t_end:
                h = t_end - t
            if h <= 1e-14 * max(1.0, fabs(t)):
                if t_end - t <= 1e-14 * max(1.0, fabs(t)):
                    t = t_end
                    break
                status = 2
                break
            rc = step(&F, y, k1, h, k2, k3, k4, k5, k6, ys, ynew, k7, errv)
            nsteps += 1
            if rc:
                h *= 0.5
                nrej += 1
                reject = 1
                continue
            err = 0.0
            for i in range(dim):
                sc = atol + rtol * max(fabs(y[i]), fabs(ynew[i]))
                err += (errv[i] / sc) ** 2
            err = sqrt(err / dim)
            fac11 = pow(err, expo1) if err > 0 else 0.0
            if err <= 1.0:
                fac = fac11 / pow(facold, beta)
                fac = max(0.1, min(5.0, fac / 0.9)) if fac > 0 else 0.1
                hnew = h / fac
                facold = max(err, 1e-4)
                tnew = t + h
                if last_out and fabs(tnew - tout[iout]) <= 1e-12 * max(1.0, fabs(tnew)):
                    tnew = tout[iout]
                crossed = 0
                if has_sec:
                    g_new = section(<double*> nrm.data, ynew, n, offset)
                    if direction * g_prev < 0 and 0 <= direction * g_new and tnew > t_min:
                        # Illinois regula falsi on single steps from y
                        for i in range(dim):
                            yprev[i] = y[i]
                            k1prev[i] = k1[i]
                        lo = 0.0
                        hi = h
                        glo = g_prev
                        ghi = g_new
                        side = 0
                        theta = h
                        for it in range(100):
                            theta = hi - ghi * (hi - lo) / (ghi - glo) if ghi != glo else 0.5 * (lo + hi)
                            if not (lo < theta < hi):
                                theta = 0.5 * (lo + hi)
                            rc = step(&F, yprev, k1prev, theta, k2, k3, k4, k5, k6, ys, ytr, k7t, etmp)
                            if rc:
                                theta = 0.5 * (lo + hi)
                                step(&F, yprev, k1prev, theta, k2, k3, k4, k5, k6, ys, ytr, k7t, etmp)
                            gt = section(<double*> nrm.data, ytr, n, offset)
                            if gt == 0.0 or hi - lo <= 1e-13 * max(1.0, fabs(t)):
                                break
                            if (gt < 0) == (glo < 0):
                                lo = theta
                                glo = gt
                                if side == -1:
                                    ghi *= 0.5
                                side = -1
                            else:
                                hi = theta
                                ghi = gt
                                if side == 1:
                                    glo *= 0.5
                                side = 1
                            s = 0.0
                            for i in range(n):
                                s = max(s, fabs(ytr[i]))
                            if fabs(gt) <= 1e-15 * (1.0 + s):
                                break
                        if t + theta > t_min:
                            cross_t.append(t + theta)
                            cross_y.append(np.array([ytr[i] for i in range(dim)]))
                            crossed = 1
                    g_prev = g_new
                t = tnew
                for i in range(dim):
                    y[i] = ynew[i]
                    k1[i] = k7[i]
                while iout < nout and tout[iout] <= t + 1e-12 * max(1.0, fabs(t)):
                    out_y[iout] = np.array([y[i] for i in range(dim)])
                    iout += 1
                if record:
                    ts.append(t)
                    ysl.append(np.array([y[i] for i in range(n)]))
                if crossed and max_crossings and len(cross_t) >= max_crossings:
                    t = cross_t[len(cross_t) - 1]
                    for i in range(dim):
                        y[i] = cross_y[len(cross_y) - 1][i]
                    status = 1
                    break
                if reject:
                    hnew = min(hnew, h)
                reject = 0
                h = hnew
            else:
                h = h / min(5.0, fac11 / 0.9)
                nrej += 1
                reject = 1
        yout = np.array([y[i] for i in range(dim)])
    finally:
        free(work)
    return (
        status,
        t,
        yout,
        np.array(ts) if record else np.empty(0),
        np.array(ysl) if record else np.empty((0, n)),
        np.array(cross_t),
        np.array(cross_y).reshape(len(cross_t), dim),
        out_y[:iout] if iout < nout else out_y,
        nsteps,
        nrej,
    )
