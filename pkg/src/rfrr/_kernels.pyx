# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled spectral kernels.

Same API and semantics as ``_kernels_py``. Loops run tail-first with
Neumaier-compensated accumulation.
"""
from libc.math cimport sqrt, fabs, pow, INFINITY

import numpy as np
cimport numpy as cnp

cnp.import_array()

cdef enum:
    _CONVERGED = 0
    _STALLED = 1
    _MAX_ITER = 2

CONVERGED = _CONVERGED
STALLED = _STALLED
MAX_ITER = _MAX_ITER


cdef inline void _add(double x, double* s, double* c) noexcept nogil:
    cdef double t = s[0] + x
    if fabs(s[0]) >= fabs(x):
        c[0] += (s[0] - t) + x
    else:
        c[0] += (x - t) + s[0]
    s[0] = t


cdef inline double _nu1(double n, double p, double lam, double nu2) noexcept nogil:
    cdef double c = n / p
    cdef double s = sqrt((1.0 - c) * (1.0 - c) + 4.0 * lam / (p * nu2))
    if c <= 1.0:
        return 0.5 * nu2 * ((1.0 - c) + s)
    return 2.0 * lam / (p * (s + c - 1.0))


cdef double _t11(const double[::1] e, double nu) noexcept nogil:
    cdef Py_ssize_t k
    cdef double s = 0.0, c = 0.0
    for k in range(e.shape[0] - 1, -1, -1):
        _add(e[k] / (e[k] + nu), &s, &c)
    return s + c


def nu1_from_nu2(double n, double p, double lam, double nu2):
    return _nu1(n, p, lam, nu2)


def trace_power(eigs, double nu, int a, int b):
    cdef const double[::1] e = np.ascontiguousarray(eigs, dtype=np.float64)
    cdef Py_ssize_t k
    cdef double s = 0.0, c = 0.0, x, num, den
    with nogil:
        for k in range(e.shape[0] - 1, -1, -1):
            x = e[k]
            num = x if a == 1 else (x * x if a == 2 else pow(x, a))
            den = x + nu
            den = den if b == 1 else (den * den if b == 2 else pow(den, b))
            _add(num / den, &s, &c)
    return s + c


def resolvent_sums(eigs, target, double nu):
    cdef const double[::1] e = np.ascontiguousarray(eigs, dtype=np.float64)
    cdef const double[::1] t = np.ascontiguousarray(target, dtype=np.float64)
    cdef Py_ssize_t k
    cdef double inv, inv2, x, b2
    cdef double s0 = 0, c0 = 0, s1 = 0, c1 = 0, s2 = 0, c2 = 0
    cdef double s3 = 0, c3 = 0, s4 = 0, c4 = 0, s5 = 0, c5 = 0
    with nogil:
        for k in range(e.shape[0] - 1, -1, -1):
            x = e[k]
            b2 = t[k] * t[k]
            inv = 1.0 / (x + nu)
            inv2 = inv * inv
            _add(x * inv, &s0, &c0)
            _add(x * x * inv2, &s1, &c1)
            _add(x * inv2, &s2, &c2)
            _add(b2 * inv, &s3, &c3)
            _add(b2 * inv2, &s4, &c4)
            _add(b2 * x * inv2, &s5, &c5)
    return (s0 + c0, s1 + c1, s2 + c2, s3 + c3, s4 + c4, s5 + c5)


def iterate_fixed_point(eigs, double n, double p, double lam, double nu2,
                        double tol, long max_iter, double damping, long stall_window):
    cdef const double[::1] e = np.ascontiguousarray(eigs, dtype=np.float64)
    cdef double[::1] history = np.empty(stall_window)
    cdef double nu1 = _nu1(n, p, lam, nu2), new, change = INFINITY
    cdef long it, slot
    cdef int status = _MAX_ITER
    cdef long done = max_iter
    with nogil:
        for it in range(1, max_iter + 1):
            nu1 = _nu1(n, p, lam, nu2)
            new = nu1 + nu2 * _t11(e, nu2) / p
            new = (1.0 - damping) * nu2 + damping * new
            change = fabs(new - nu2) / nu2
            nu2 = new
            if change <= tol:
                nu1 = _nu1(n, p, lam, nu2)
                status = _CONVERGED
                done = it
                break
            slot = it % stall_window
            if it > stall_window and change > 0.1 * history[slot]:
                status = _STALLED
                done = it
                break
            history[slot] = change
    return nu1, nu2, done, status, change


def t_sum(int s, double delta, double gamma, double nu, double alpha, long trunc):
    # terms are vectorized in numpy; only the compensated accumulation runs here
    k = np.arange(trunc, 0, -1, dtype=np.float64)
    cdef const double[::1] terms = k ** (-s - delta * alpha) / (k ** -alpha + nu) ** gamma
    cdef Py_ssize_t i
    cdef double acc = 0.0, c = 0.0
    with nogil:
        for i in range(terms.shape[0]):
            _add(terms[i], &acc, &c)
    return acc + c
