# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled projection kernel; mirrors ``_kernels_py.project_batch``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, fabs, sqrt, isnan

cnp.import_array()

cdef double RHO_MAX = 700.0


cdef inline double _resid(double r, double x, double y, double z) noexcept nogil:
    cdef double a = (r - 1.0) * x + y
    cdef double b = x - r * y
    cdef double c = r * r - r + 1.0
    cdef double e = exp(-fabs(r))
    if r >= 0:
        return a - b * e * e - c * z * e
    return a * e * e - b - c * z * e


cdef inline double _dresid(double r, double x, double y, double z) noexcept nogil:
    cdef double a = (r - 1.0) * x + y
    cdef double b = x - r * y
    cdef double c = r * r - r + 1.0
    cdef double e = exp(-fabs(r))
    if r >= 0:
        return x + y * e * e + 2.0 * b * e * e - (2.0 * r - 1.0) * z * e + c * z * e
    return x * e * e + 2.0 * a * e * e + y - (2.0 * r - 1.0) * z * e - c * z * e


cdef int _project_one(double x, double y, double z, double* out) noexcept nogil:
    # out: primal[3], polar[3], dist, rho, case, iters
    cdef double lo, hi, flo, fhi, r, f, df, step, mid, w1, w2
    cdef double e, nx, ny, nz, nn, lam, yc, pv, qv
    cdef double pin[3]
    cdef double pri[3]
    cdef double pol[3]
    cdef int it = 0, i
    cdef bint clean
    out[7] = 0.0 / 0.0
    out[9] = 0.0
    # inside K
    if (y > 0 and x / y <= RHO_MAX + 10 and z >= y * exp(x / y)) or (y == 0 and x <= 0 and z >= 0):
        out[0] = x; out[1] = y; out[2] = z
        out[3] = 0; out[4] = 0; out[5] = 0
        out[6] = 0; out[8] = 0
        return 0
    # inside the polar cone
    if (x > 0 and y / x - 1.0 <= RHO_MAX + 10 and -z >= x * exp(y / x - 1.0)) or (x == 0 and y <= 0 and z <= 0):
        out[0] = 0; out[1] = 0; out[2] = 0
        out[3] = x; out[4] = y; out[5] = z
        out[6] = sqrt(x * x + y * y + z * z); out[8] = 1
        return 0
    if x <= 0 and y <= 0:
        out[0] = x; out[1] = 0; out[2] = z if z > 0 else 0.0
        out[3] = 0; out[4] = y; out[5] = z if z < 0 else 0.0
        out[6] = sqrt(y * y + out[5] * out[5]); out[8] = 2
        return 0
    lo = -RHO_MAX
    hi = RHO_MAX
    if x > 0 and 1.0 - y / x > lo:
        lo = 1.0 - y / x
    if x < 0 and 1.0 - y / x < hi:
        hi = 1.0 - y / x
    if y > 0 and x / y < hi:
        hi = x / y
    if y < 0 and x / y > lo:
        lo = x / y
    if lo > RHO_MAX:
        lo = RHO_MAX
    if hi < -RHO_MAX:
        hi = -RHO_MAX
    if lo >= hi:
        r = hi
    else:
        flo = _resid(lo, x, y, z)
        fhi = _resid(hi, x, y, z)
        if flo >= 0:
            r = lo
        elif fhi <= 0:
            r = hi
        else:
            # safeguarded Newton seeded from x/y
            r = x / y if y > 0 else 0.5 * (lo + hi)
            if not (r > lo and r < hi):
                r = 0.5 * (lo + hi)
            w1 = hi - lo
            w2 = w1
            while it < 200:
                it += 1
                f = _resid(r, x, y, z)
                if f == 0:
                    break
                if f < 0:
                    lo = r
                else:
                    hi = r
                df = _dresid(r, x, y, z)
                step = f / df if df != 0 else 0.0
                mid = r - step
                # bisect when Newton leaves the bracket or has not halved it in two steps
                if df == 0 or isnan(mid) or mid <= lo or mid >= hi or fabs(step) > 0.5 * (hi - lo) or hi - lo > 0.5 * w2:
                    mid = 0.5 * (lo + hi)
                w2 = w1
                w1 = hi - lo
                if fabs(mid - r) <= 4e-16 * (fabs(r) if fabs(r) > 1.0 else 1.0) or hi - lo <= 4e-16 * (fabs(r) if fabs(r) > 1.0 else 1.0):
                    r = mid
                    break
                r = mid
    e = exp(-fabs(r))
    if r >= 0:
        nx = 1.0; nz = -e
    else:
        nx = e; nz = -1.0
    ny = (1.0 - r) * nx
    nn = nx * nx + ny * ny + nz * nz
    lam = x * nx + y * ny + z * nz
    if lam < 0:
        lam = 0.0
    lam = lam / nn
    yc = (r - 1.0) * x + y
    clean = fabs(yc) > 1e-6 * (fabs(r - 1.0) * fabs(x) + fabs(y))
    if yc < 0:
        yc = 0.0
    yc = yc / (r * r - r + 1.0)
    pin[0] = x; pin[1] = y; pin[2] = z
    pri[0] = yc * r; pri[1] = yc
    pri[2] = yc * exp(r) if yc > 0 else 0.0
    pol[0] = lam * nx; pol[1] = lam * ny; pol[2] = lam * nz
    for i in range(3):
        pv = pri[i]
        qv = pol[i]
        if clean and fabs(pv) <= fabs(qv):
            out[i] = pv
            out[3 + i] = pin[i] - pv
        else:
            out[i] = pin[i] - qv
            out[3 + i] = qv
    out[6] = lam * sqrt(nn)
    if fabs(r) >= RHO_MAX:
        # root beyond the clamp: the sheet degenerates towards F_{-inf}
        pri[0] = x if x < 0 else 0.0
        pri[1] = 0.0
        pri[2] = z if z > 0 else 0.0
        pv = sqrt((x - pri[0]) * (x - pri[0]) + y * y + (z - pri[2]) * (z - pri[2]))
        qv = sqrt(out[3] * out[3] + out[4] * out[4] + out[5] * out[5])
        if pv <= qv:
            for i in range(3):
                out[i] = pri[i]
                out[3 + i] = pin[i] - pri[i]
            out[6] = pv
        else:
            out[6] = qv
    out[7] = r
    out[8] = 3
    out[9] = it
    return 0


def project_batch(points, max_iter=200):
    """Project an ``(n, 3)`` array; returns ``(primal, polar, dist, rho, case, iters)``."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2] p = np.ascontiguousarray(points, dtype=np.float64).reshape(-1, 3)
    cdef Py_ssize_t n = p.shape[0], k
    cdef cnp.ndarray[cnp.float64_t, ndim=2] primal = np.empty((n, 3))
    cdef cnp.ndarray[cnp.float64_t, ndim=2] polar = np.empty((n, 3))
    cdef cnp.ndarray[cnp.float64_t, ndim=1] dist = np.empty(n)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] rho = np.empty(n)
    cdef cnp.ndarray[cnp.int8_t, ndim=1] case = np.empty(n, dtype=np.int8)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] iters = np.empty(n, dtype=np.int64)
    cdef double out[10]
    with nogil:
        for k in range(n):
            _project_one(p[k, 0], p[k, 1], p[k, 2], out)
            primal[k, 0] = out[0]; primal[k, 1] = out[1]; primal[k, 2] = out[2]
            polar[k, 0] = out[3]; polar[k, 1] = out[4]; polar[k, 2] = out[5]
            dist[k] = out[6]
            rho[k] = out[7]
            case[k] = <cnp.int8_t>out[8]
            iters[k] = <cnp.int64_t>out[9]
    return primal, polar, dist, rho, case, iters
