# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled discrete-energy kernels; same contract as ``_fallback``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport pow, sqrt, log1p, expm1, fabs, INFINITY

cnp.import_array()

cdef enum:
    POWER = 0
    POWER_SUM = 1
    CURVATURE = 2
    POWER_LOG = 3


cdef inline double _pw(double t, double a) noexcept nogil:
    """t**a; integer and half-integer exponents in [0, 8] avoid libm pow,
    which is several times slower than a few multiplications."""
    cdef double a2 = 2.0 * a, r = 1.0, b = t
    cdef int k, n
    if 0.0 <= a2 <= 16.0 and a2 == <int>a2:
        k = <int>a2
        n = k >> 1
        while n:
            if n & 1:
                r *= b
            b *= b
            n >>= 1
        if k & 1:
            r *= sqrt(t)
        return r
    return pow(t, a)


cdef inline double _A(int code, double p, double q, double g, double t) noexcept nogil:
    if code == POWER:
        return _pw(t, p)
    elif code == POWER_SUM:
        return _pw(t, p) + _pw(t, q)
    elif code == CURVATURE:
        return expm1(g * log1p(t * t))
    else:
        return _pw(t, p) * log1p(t)


cdef inline double _dA(int code, double p, double q, double g, double t) noexcept nogil:
    if code == POWER:
        return p * _pw(t, p - 1)
    elif code == POWER_SUM:
        return p * _pw(t, p - 1) + q * _pw(t, q - 1)
    elif code == CURVATURE:
        return 2 * g * t * _pw(1 + t * t, g - 1)
    else:
        return p * _pw(t, p - 1) * log1p(t) + _pw(t, p) / (1 + t)


cdef inline double _d2A(int code, double p, double q, double g, double t) noexcept nogil:
    cdef double s
    if code == POWER:
        if t == 0 and p < 2:
            return INFINITY
        return p * (p - 1) * _pw(t, p - 2)
    elif code == POWER_SUM:
        if t == 0 and p < 2:
            return INFINITY
        return p * (p - 1) * _pw(t, p - 2) + q * (q - 1) * _pw(t, q - 2)
    elif code == CURVATURE:
        s = 1 + t * t
        return 2 * g * _pw(s, g - 2) * (s + 2 * (g - 1) * t * t)
    else:
        if t == 0:
            return 0.0
        return (p * (p - 1) * _pw(t, p - 2) * log1p(t)
                + 2 * p * _pw(t, p - 1) / (1 + t)
                - _pw(t, p) / ((1 + t) * (1 + t)))


cdef inline double _sign(double x) noexcept nogil:
    if x > 0:
        return 1.0
    elif x < 0:
        return -1.0
    return 0.0


def energy_parts(int code, params, double q, const double[::1] u, const double[::1] h,
                 const double[::1] mu, const double[::1] w, const double[::1] V):
    cdef double p = params[0], qa = params[1], g = params[2]
    cdef Py_ssize_t n = u.shape[0], i
    cdef double grad = 0, pot = 0, nonlin = 0, au
    with nogil:
        for i in range(n - 1):
            grad += mu[i] * _A(code, p, qa, g, fabs(u[i + 1] - u[i]) / h[i])
        for i in range(n):
            au = fabs(u[i])
            pot += w[i] * V[i] * _A(code, p, qa, g, au)
            nonlin += w[i] * _pw(au, q)
    return grad, pot, nonlin / q


def gradient(int code, params, double q, const double[::1] u, const double[::1] h,
             const double[::1] mu, const double[::1] w, const double[::1] V):
    cdef double p = params[0], qa = params[1], g = params[2]
    cdef Py_ssize_t n = u.shape[0], i
    cdef double d, flux, au, s
    out = np.empty(n)
    cdef double[::1] o = out
    with nogil:
        for i in range(n):
            au = fabs(u[i])
            s = _sign(u[i])
            o[i] = w[i] * s * (V[i] * _dA(code, p, qa, g, au) - _pw(au, q - 1))
        for i in range(n - 1):
            d = (u[i + 1] - u[i]) / h[i]
            flux = mu[i] * _sign(d) * _dA(code, p, qa, g, fabs(d)) / h[i]
            o[i + 1] += flux
            o[i] -= flux
    return out


def hessian_bands(int code, params, double q, const double[::1] u, const double[::1] h,
                  const double[::1] mu, const double[::1] w, const double[::1] V,
                  double eps_reg, bint include_nonlin):
    cdef double p = params[0], qa = params[1], g = params[2]
    cdef Py_ssize_t n = u.shape[0], i
    cdef double d, kap, au
    diag = np.empty(n)
    off = np.empty(n - 1)
    cdef double[::1] dg = diag
    cdef double[::1] of = off
    with nogil:
        for i in range(n):
            au = fabs(u[i])
            if au < eps_reg:
                au = eps_reg
            dg[i] = w[i] * V[i] * _d2A(code, p, qa, g, au)
            if include_nonlin:
                dg[i] -= w[i] * (q - 1) * _pw(au, q - 2)
        for i in range(n - 1):
            d = fabs(u[i + 1] - u[i]) / h[i]
            if d < eps_reg:
                d = eps_reg
            kap = mu[i] * _d2A(code, p, qa, g, d) / (h[i] * h[i])
            dg[i] += kap
            dg[i + 1] += kap
            of[i] = -kap
    return diag, off
