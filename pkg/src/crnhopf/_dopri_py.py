"""Pure-Python (numpy) Dormand--Prince 5(4) integrator for polynomial fields.

Mirror of the compiled ``_dopri`` extension; same signature, same results up
to floating-point summation order. The field is given densely:
``f_k(x) = sum_m C[k, m] prod_i x_i^E[m, i]``.
"""

import numpy as np

STATUS_DONE = 0
STATUS_CROSSINGS = 1
STATUS_UNDERFLOW = 2
STATUS_MAX_STEPS = 3

_A21 = 1.0 / 5.0
_A31, _A32 = 3.0 / 40.0, 9.0 / 40.0
_A41, _A42, _A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
_A51, _A52, _A53, _A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
_A61, _A62, _A63, _A64, _A65 = 9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0
_A71, _A73, _A74, _A75, _A76 = 35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0
_E1, _E3, _E4, _E5, _E6, _E7 = (
    71.0 / 57600.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
)

KERNEL = "python"


def _rhs(E, Ef, C, y, n, variational):
    x = y[:n]
    mon = np.prod(x[None, :] ** E, axis=1)
    f = C @ mon
    if not variational:
        return f
    # d/dx_i x^e = e_i x^(e - e_i), written without dividing by x_i
    jac = np.empty((n, n))
    for i in range(n):
        Ei = E.copy()
        Ei[:, i] = np.maximum(Ei[:, i] - 1, 0)
        jac[:, i] = C @ (Ef[:, i] * np.prod(x[None, :] ** Ei, axis=1))
    phi = y[n:].reshape(n, n)
    return np.concatenate([f, (jac @ phi).ravel()])


def _step(E, Ef, C, y, k1, h, n, variational):
    k2 = _rhs(E, Ef, C, y + h * (_A21 * k1), n, variational)
    k3 = _rhs(E, Ef, C, y + h * (_A31 * k1 + _A32 * k2), n, variational)
    k4 = _rhs(E, Ef, C, y + h * (_A41 * k1 + _A42 * k2 + _A43 * k3), n, variational)
    k5 = _rhs(E, Ef, C, y + h * (_A51 * k1 + _A52 * k2 + _A53 * k3 + _A54 * k4), n, variational)
    ys = y + h * (_A61 * k1 + _A62 * k2 + _A63 * k3 + _A64 * k4 + _A65 * k5)
    if np.any(ys[:n] <= 0):
        return None, None, None
    k6 = _rhs(E, Ef, C, ys, n, variational)
    ynew = y + h * (_A71 * k1 + _A73 * k3 + _A74 * k4 + _A75 * k5 + _A76 * k6)
    if np.any(ynew[:n] <= 0) or not np.all(np.isfinite(ynew)):
        return None, None, None
    k7 = _rhs(E, Ef, C, ynew, n, variational)
    err = h * (_E1 * k1 + _E3 * k3 + _E4 * k4 + _E5 * k5 + _E6 * k6 + _E7 * k7)
    return ynew, k7, err


def integrate(
    E,
    C,
    y0,
    t_end,
    rtol=1e-10,
    atol=1e-12,
    h0=0.0,
    hmax=0.0,
    max_steps=1_000_000,
    variational=False,
    normal=None,
    offset=0.0,
    direction=1,
    max_crossings=0,
    t_min=0.0,
    t_out=None,
    record=False,
):
    """Integrate from t=0 to ``t_end``.

    Returns ``(status, t, y, ts, ys, cross_t, cross_y, out_y, nsteps, nrej)``.
    ``normal``/``offset`` define a section ``normal . x - offset``; crossings
    in ``direction`` after ``t_min`` are localised to a time tolerance of
    about 1e-12 and integration stops after ``max_crossings`` of them
    (0 = never stop). ``t_out`` are output times hit exactly.
    """
    E = np.ascontiguousarray(E, dtype=np.int64)
    Ef = E.astype(float)
    C = np.ascontiguousarray(C, dtype=float)
    n = C.shape[0]
    y = np.array(y0, dtype=float)
    if variational and y.size == n:
        y = np.concatenate([y, np.eye(n).ravel()])
    dim = y.size
    has_sec = normal is not None
    if has_sec:
        normal = np.asarray(normal, dtype=float)
    t_out = np.asarray([] if t_out is None else t_out, dtype=float)
    out_y = np.empty((t_out.size, dim))
    iout = 0
    while iout < t_out.size and t_out[iout] <= 0.0:
        out_y[iout] = y
        iout += 1

    t = 0.0
    k1 = _rhs(E, Ef, C, y, n, variational)
    if h0 <= 0:
        sc = atol + rtol * np.abs(y)
        d0 = np.sqrt(np.mean((y / sc) ** 2))
        d1 = np.sqrt(np.mean((k1 / sc) ** 2))
        h = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
        h = min(h, t_end)
    else:
        h = min(h0, t_end)
    if hmax <= 0:
        hmax = t_end
    facold = 1e-4
    beta = 0.04
    expo1 = 0.2 - beta * 0.75
    ts = [0.0] if record else None
    ys = [y[:n].copy()] if record else None
    cross_t, cross_y = [], []
    g_prev = float(normal @ y[:n] - offset) if has_sec else 0.0
    nsteps = nrej = 0
    status = STATUS_DONE
    reject = False
    while True:
        if t >= t_end:
            break
        if nsteps >= max_steps:
            status = STATUS_MAX_STEPS
            break
        h = min(h, hmax)
        last_out = False
        if iout < t_out.size and t + h >= t_out[iout]:
            h = t_out[iout] - t
            last_out = True
        if t + h >= t_end:
            h = t_end - t
        if h <= 1e-14 * max(1.0, abs(t)):
            if t_end - t <= 1e-14 * max(1.0, abs(t)):
                t = t_end
                break
            status = STATUS_UNDERFLOW
            break
        ynew, k7, err_vec = _step(E, Ef, C, y, k1, h, n, variational)
        nsteps += 1
        if ynew is None:
            h *= 0.5
            nrej += 1
            reject = True
            continue
        sc = atol + rtol * np.maximum(np.abs(y), np.abs(ynew))
        err = float(np.sqrt(np.mean((err_vec / sc) ** 2)))
        fac11 = err**expo1 if err > 0 else 0.0
        if err <= 1.0:
            fac = fac11 / facold**beta
            fac = max(0.1, min(5.0, fac / 0.9)) if fac > 0 else 0.1
            hnew = h / fac
            facold = max(err, 1e-4)
            tnew = t + h
            if last_out and abs(tnew - t_out[iout]) <= 1e-12 * max(1.0, abs(tnew)):
                tnew = t_out[iout]
            crossed = False
            if has_sec:
                g_new = float(normal @ ynew[:n] - offset)
                if direction * g_prev < 0 <= direction * g_new and tnew > t_min:
                    tc, yc = _locate(E, Ef, C, y, k1, t, h, n, variational, normal, offset, g_prev, g_new)
                    if tc > t_min:
                        cross_t.append(tc)
                        cross_y.append(yc)
                        crossed = True
                g_prev = g_new
            t = tnew
            y = ynew
            k1 = k7
            while iout < t_out.size and t_out[iout] <= t + 1e-12 * max(1.0, abs(t)):
                out_y[iout] = y
                iout += 1
            if record:
                ts.append(t)
                ys.append(y[:n].copy())
            if crossed and max_crossings and len(cross_t) >= max_crossings:
                t = cross_t[-1]
                y = cross_y[-1].copy()
                status = STATUS_CROSSINGS
                break
            if reject:
                hnew = min(hnew, h)
            reject = False
            h = hnew
        else:
            h = h / min(5.0, fac11 / 0.9)
            nrej += 1
            reject = True
    return (
        status,
        t,
        y,
        np.array(ts) if record else np.empty(0),
        np.array(ys) if record else np.empty((0, n)),
        np.array(cross_t),
        np.array(cross_y).reshape(len(cross_t), dim),
        out_y[:iout] if iout < t_out.size else out_y,
        nsteps,
        nrej,
    )


def _locate(E, Ef, C, y, k1, t, h, n, variational, normal, offset, g0, g1):
    """Root of the section function along the step via Illinois regula falsi."""
    lo, hi = 0.0, h
    glo, ghi = g0, g1
    side = 0
    best = (h, None)
    for _ in range(100):
        theta = hi - ghi * (hi - lo) / (ghi - glo) if ghi != glo else 0.5 * (lo + hi)
        if not (lo < theta < hi):
            theta = 0.5 * (lo + hi)
        yt, _, _ = _step(E, Ef, C, y, k1, theta, n, variational)
        if yt is None:
            theta = 0.5 * (lo + hi)
            yt, _, _ = _step(E, Ef, C, y, k1, theta, n, variational)
        gt = float(normal @ yt[:n] - offset)
        best = (theta, yt)
        if gt == 0.0 or hi - lo <= 1e-13 * max(1.0, abs(t)):
            break
        if (gt < 0) == (glo < 0):
            lo, glo = theta, gt
            if side == -1:
                ghi *= 0.5
            side = -1
        else:
            hi, ghi = theta, gt
            if side == 1:
                glo *= 0.5
            side = 1
        if abs(gt) <= 1e-15 * (1.0 + np.abs(yt[:n]).max()):
            break
    theta, yt = best
    if yt is None:
        yt, _, _ = _step(E, Ef, C, y, k1, theta, n, variational)
    return t + theta, yt
