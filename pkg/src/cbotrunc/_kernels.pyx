# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled stepping kernels.

Signatures match ``_kernels_py``.  ``advance`` runs a whole chunk of steps
without the GIL: objective evaluation, consensus, projection and the particle
update are fused into one pass per step.
"""

import numpy as np

from libc.math cimport cos, exp, fabs, isfinite, isinf, sin, sqrt, M_E, M_PI

from .errors import NonFiniteObjectiveError

NAME = "compiled"

# order must match objectives.BATCH_FUNCTIONS
cdef enum:
    ACKLEY = 0
    GRIEWANK = 1
    RASTRIGIN = 2
    ALPINE = 3
    SALOMON = 4
    ACKLEY_FIG1 = 5
    RASTRIGIN_FIG1 = 6

cdef double TWO_PI = 2.0 * M_PI


cdef double _objective(int code, const double* x, const double* shift,
                       Py_ssize_t d) noexcept nogil:
    cdef Py_ssize_t k
    cdef double y, r
    cdef double sq = 0.0
    cdef double acc = 0.0
    cdef double prod = 1.0

    if code == ACKLEY or code == ACKLEY_FIG1:
        for k in range(d):
            y = x[k] - shift[k]
            sq += y * y
            acc += cos(TWO_PI * y)
        if code == ACKLEY:
            return -20.0 * exp(-0.2 * sqrt(sq / d)) - exp(acc / d) + 20.0 + M_E
        return -20.0 * exp(-0.2 / sqrt(<double>d) * sqrt(sq)) - exp(acc / d)
    elif code == GRIEWANK:
        for k in range(d):
            y = x[k] - shift[k]
            sq += y * y
            prod *= cos(y / (k + 1.0))
        return 1.0 + sq / 4000.0 - prod
    elif code == RASTRIGIN:
        for k in range(d):
            y = x[k] - shift[k]
            acc += y * y - 10.0 * cos(TWO_PI * y)
        return 10.0 * d + acc
    elif code == ALPINE:
        for k in range(d):
            y = x[k] - shift[k]
            acc += fabs(y * sin(10.0 * y) - 0.1 * y)
        return 10.0 * acc
    elif code == SALOMON:
        for k in range(d):
            y = x[k] - shift[k]
            sq += y * y
        r = sqrt(sq)
        return 1.0 - cos(200.0 * M_PI * r) + 10.0 * r
    elif code == RASTRIGIN_FIG1:
        for k in range(d):
            y = x[k] - shift[k]
            acc += y * y + 2.5 * (1.0 - cos(TWO_PI * y))
        return acc
    return 0.0 / 0.0


cdef Py_ssize_t _consensus(const double[:, ::1] x, const double[::1] values,
                           double alpha, double[::1] w,
                           double[::1] point) noexcept nogil:
    """Weighted mean written into ``point``; returns argmin or -1 on NaN/inf."""
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t d = x.shape[1]
    cdef Py_ssize_t i, k
    cdef Py_ssize_t j = 0
    cdef double wi, p, lo, hi
    cdef double s = 0.0

    for i in range(n):
        if not isfinite(values[i]):
            return -1
        if values[i] < values[j]:
            j = i
    for k in range(d):
        point[k] = 0.0
    for i in range(n):
        wi = exp(-alpha * (values[i] - values[j]))
        w[i] = wi
        s += wi
        if wi != 0.0:
            for k in range(d):
                point[k] += wi * (x[i, k] - x[j, k])
    for k in range(d):
        p = x[j, k] + point[k] / s
        lo = x[0, k]
        hi = x[0, k]
        for i in range(1, n):
            if x[i, k] < lo:
                lo = x[i, k]
            elif x[i, k] > hi:
                hi = x[i, k]
        if p < lo:
            p = lo
        elif p > hi:
            p = hi
        point[k] = p
    for i in range(n):
        w[i] /= s
    return j


cdef void _project(const double* v, const double* c, double radius,
                   double* out, Py_ssize_t d) noexcept nogil:
    cdef Py_ssize_t k
    cdef double n = 0.0
    cdef double scale, q, eps = 2.220446049250313e-16
    for k in range(d):
        out[k] = v[k]
    if isinf(radius):
        return
    for k in range(d):
        n += (v[k] - c[k]) * (v[k] - c[k])
    n = sqrt(n)
    if n <= radius:
        return
    scale = radius / n
    while True:
        q = 0.0
        for k in range(d):
            out[k] = c[k] + scale * (v[k] - c[k])
            q += (out[k] - c[k]) * (out[k] - c[k])
        if sqrt(q) <= radius:
            return
        # geometric backoff; reaches scale 0 (out == c) in at most ~53 rounds
        scale *= 1.0 - eps
        eps = 2.0 * eps


cdef void _step(double[:, ::1] x, const double* target, const double* point,
                const double[:, ::1] noise, double lam, double dt, double sigma,
                double trunc_m, bint aniso) noexcept nogil:
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t d = x.shape[1]
    cdef Py_ssize_t i, k
    cdef double amp, z, xi
    for i in range(n):
        if aniso:
            for k in range(d):
                xi = x[i, k]
                amp = fabs(xi - point[k])
                if amp > trunc_m:
                    amp = trunc_m
                x[i, k] = xi - dt * lam * (xi - target[k]) + sigma * amp * noise[i, k]
        else:
            z = 0.0
            for k in range(d):
                z += (x[i, k] - point[k]) * (x[i, k] - point[k])
            amp = sqrt(z)
            if amp > trunc_m:
                amp = trunc_m
            for k in range(d):
                xi = x[i, k]
                x[i, k] = xi - dt * lam * (xi - target[k]) + sigma * amp * noise[i, k]


def evaluate(int code, x, shift):
    cdef const double[:, ::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef const double[::1] sv = np.ascontiguousarray(shift, dtype=np.float64)
    cdef Py_ssize_t n = xv.shape[0]
    cdef Py_ssize_t d = xv.shape[1]
    cdef Py_ssize_t i
    out = np.empty(n)
    cdef double[::1] ov = out
    with nogil:
        for i in range(n):
            ov[i] = _objective(code, &xv[i, 0], &sv[0], d)
    return out


def consensus(x, values, double alpha):
    cdef const double[:, ::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef const double[::1] fv = np.ascontiguousarray(values, dtype=np.float64)
    w = np.empty(xv.shape[0])
    point = np.empty(xv.shape[1])
    cdef double[::1] wv = w
    cdef double[::1] pv = point
    cdef Py_ssize_t j
    with nogil:
        j = _consensus(xv, fv, alpha, wv, pv)
    if j < 0:
        raise NonFiniteObjectiveError()
    return point, w, int(j)


def project(v, center, double radius):
    cdef const double[::1] vv = np.ascontiguousarray(v, dtype=np.float64)
    cdef const double[::1] cv = np.ascontiguousarray(center, dtype=np.float64)
    out = np.empty(vv.shape[0])
    cdef double[::1] ov = out
    _project(&vv[0], &cv[0], radius, &ov[0], vv.shape[0])
    return out


def amplitudes(x, point, double trunc_m, bint aniso):
    diff = np.asarray(x, dtype=np.float64) - np.asarray(point, dtype=np.float64)
    if aniso:
        return np.minimum(np.abs(diff), trunc_m)
    return np.minimum(np.sqrt(np.sum(diff * diff, axis=1)), trunc_m)


def step(x, target, point, noise, double lam, double dt, double sigma,
         double trunc_m, bint aniso):
    out = np.array(x, dtype=np.float64, order="C", copy=True)
    cdef double[:, ::1] xv = out
    cdef const double[::1] tv = np.ascontiguousarray(target, dtype=np.float64)
    cdef const double[::1] pv = np.ascontiguousarray(point, dtype=np.float64)
    cdef const double[:, ::1] bv = np.ascontiguousarray(noise, dtype=np.float64)
    with nogil:
        _step(xv, &tv[0], &pv[0], bv, lam, dt, sigma, trunc_m, aniso)
    return out


def advance(int code, x, shift, noise, double lam, double sigma, double alpha,
            double dt, double trunc_m, double radius, center, bint aniso):
    out = np.array(x, dtype=np.float64, order="C", copy=True)
    cdef double[:, ::1] xv = out
    cdef const double[::1] sv = np.ascontiguousarray(shift, dtype=np.float64)
    cdef const double[::1] cv = np.ascontiguousarray(center, dtype=np.float64)
    cdef const double[:, :, ::1] bv = np.ascontiguousarray(noise, dtype=np.float64)
    cdef Py_ssize_t k = bv.shape[0]
    cdef Py_ssize_t n = xv.shape[0]
    cdef Py_ssize_t d = xv.shape[1]
    points = np.empty((k, d))
    means = np.empty((k, d))
    cdef double[:, ::1] pv = points
    cdef double[:, ::1] mv = means
    cdef double[::1] values = np.empty(n)
    cdef double[::1] w = np.empty(n)
    cdef double[::1] target = np.empty(d)
    cdef Py_ssize_t t, i, c
    cdef Py_ssize_t bad = -1
    cdef double acc

    with nogil:
        for t in range(k):
            for i in range(n):
                values[i] = _objective(code, &xv[i, 0], &sv[0], d)
            if _consensus(xv, values, alpha, w, pv[t]) < 0:
                bad = t
                break
            _project(&pv[t, 0], &cv[0], radius, &target[0], d)
            _step(xv, &target[0], &pv[t, 0], bv[t], lam, dt, sigma, trunc_m, aniso)
            for c in range(d):
                acc = 0.0
                for i in range(n):
                    acc += xv[i, c]
                mv[t, c] = acc / n
    return out, points, means, int(bad)
