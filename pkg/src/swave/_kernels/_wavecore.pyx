# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled bump/wave evaluation kernels.

Mirror of _fallback.py: identical formulas, identical summation order.  The
wave kernel walks the shift lattice nearest point first with two frontiers
(tie goes left), so terms are accumulated in decreasing magnitude.
"""
import numpy as np

cimport numpy as cnp
from libc.math cimport exp, fabs, log1p, rint

cnp.import_array()

SIGMOID = 0
RELU = 1
SOFTPLUS = 2
SOFTSIGN = 3


cdef inline double _logistic(double z) noexcept nogil:
    cdef double e
    if z >= 0.0:
        return 1.0 / (1.0 + exp(-z))
    e = exp(z)
    return e / (1.0 + e)


cdef inline double _softplus(double z) noexcept nogil:
    if z > 0.0:
        return z + log1p(exp(-z))
    return log1p(exp(z))


cdef inline double _relu(double z) noexcept nogil:
    return z if z > 0.0 else 0.0


cdef inline double _bump(int kind, double s, double x) noexcept nogil:
    cdef double sx, a, b
    if kind == 0:
        return _logistic(s * x + 1.0) + _logistic(1.0 - s * x) - 1.0
    elif kind == 1:
        sx = s * x
        return _relu(sx + 1.0) - _relu(sx) + _relu(1.0 - sx) - _relu(-sx) - 1.0
    elif kind == 2:
        sx = s * x
        return _softplus(sx + 1.0) - _softplus(sx) + _softplus(1.0 - sx) - _softplus(-sx) - 1.0
    else:
        a = x + 1.0
        b = 1.0 - x
        return a / (1.0 + fabs(a)) + b / (1.0 + fabs(b))


def bump_eval(int kind, double s, x):
    """Evaluate the unit bump psi for the given gate kind at points x."""
    if kind < 0 or kind > 3:
        raise ValueError(f"unknown kind id {kind}")
    arr = np.ascontiguousarray(np.asarray(x, dtype=np.float64))
    shape = arr.shape
    cdef double[::1] xv = np.ravel(arr)
    out_arr = np.empty(xv.shape[0], dtype=np.float64)
    cdef double[::1] ov = out_arr
    cdef Py_ssize_t i, n = xv.shape[0]
    with nogil:
        for i in range(n):
            ov[i] = _bump(kind, s, xv[i])
    return out_arr.reshape(shape)


def wave_eval(int kind, double s, double theta, int m, double scale, double offset, x):
    """Evaluate scale * sum_{|k|<=m} psi(x - k*theta) + offset at points x."""
    if kind < 0 or kind > 3:
        raise ValueError(f"unknown kind id {kind}")
    arr = np.ascontiguousarray(np.asarray(x, dtype=np.float64))
    shape = arr.shape
    cdef double[::1] xv = np.ravel(arr)
    out_arr = np.empty(xv.shape[0], dtype=np.float64)
    cdef double[::1] ov = out_arr
    cdef Py_ssize_t i, n = xv.shape[0]
    cdef double xi, total, knear, lo, hi, dlo, dhi, fm
    cdef int step
    fm = <double> m
    with nogil:
        for i in range(n):
            xi = xv[i]
            knear = rint(xi / theta)
            if knear < -fm:
                knear = -fm
            elif knear > fm:
                knear = fm
            total = _bump(kind, s, xi - knear * theta)
            lo = knear
            hi = knear
            for step in range(2 * m):
                dlo = fabs(xi - (lo - 1.0) * theta) if lo > -fm else 1e308 * 10.0
                dhi = fabs(xi - (hi + 1.0) * theta) if hi < fm else 1e308 * 10.0
                if dlo <= dhi:
                    lo = lo - 1.0
                    total = total + _bump(kind, s, xi - lo * theta)
                else:
                    hi = hi + 1.0
                    total = total + _bump(kind, s, xi - hi * theta)
            ov[i] = scale * total + offset
    return out_arr.reshape(shape)
