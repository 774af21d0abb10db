# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: Hermite recurrence and the sliding mean-oscillation scan."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, exp2, floor, ldexp, fabs, log

cnp.import_array()

ctypedef fused num_t:
    double
    double complex

cdef double _BIG = 2.0 ** 512
cdef int _SHIFT = 512
cdef double _PI_QUARTER = 0.7511255444649425


cdef inline void _start(double x, double* p0, long* e) noexcept nogil:
    cdef double a = x * x / (2.0 * log(2.0))
    cdef double fl = floor(a)
    p0[0] = _PI_QUARTER * exp2(fl - a)
    e[0] = <long>(-fl)


def hermite_table(int nmax, x):
    """Return ``phi_k(x)`` for ``k = 0..nmax`` as an array of shape (nmax+1, len(x))."""
    xs = np.ascontiguousarray(x, dtype=np.float64).ravel()
    cdef Py_ssize_t P = xs.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((nmax + 1, P))
    cdef double[:, ::1] ov = out
    cdef const double[::1] xv = xs
    cdef double[::1] a = np.empty(nmax + 1)
    cdef double[::1] b = np.empty(nmax + 1)
    cdef Py_ssize_t i, k
    cdef double xi, pp, pc, pn
    cdef long e
    for k in range(nmax + 1):
        a[k] = sqrt(2.0 / (k + 1))
        b[k] = sqrt(k / (k + 1.0))
    with nogil:
        for i in range(P):
            xi = xv[i]
            pp = 0.0
            _start(xi, &pc, &e)
            ov[0, i] = ldexp(pc, e)
            for k in range(nmax):
                pn = xi * a[k] * pc - b[k] * pp
                if fabs(pn) > _BIG:
                    pn = ldexp(pn, -_SHIFT)
                    pc = ldexp(pc, -_SHIFT)
                    e += _SHIFT
                pp = pc
                pc = pn
                ov[k + 1, i] = ldexp(pc, e)
    return out


def hermite_last_two(int k, x):
    """Return ``(phi_{k-1}(x), phi_k(x))`` without storing the full table."""
    xs = np.ascontiguousarray(x, dtype=np.float64).ravel()
    cdef Py_ssize_t P = xs.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] prev = np.empty(P)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] cur = np.empty(P)
    cdef double[::1] pv = prev
    cdef double[::1] cv = cur
    cdef const double[::1] xv = xs
    cdef double[::1] a = np.empty(max(k, 1))
    cdef double[::1] b = np.empty(max(k, 1))
    cdef Py_ssize_t i, j
    cdef double xi, pp, pc, pn
    cdef long e
    for j in range(k):
        a[j] = sqrt(2.0 / (j + 1))
        b[j] = sqrt(j / (j + 1.0))
    with nogil:
        for i in range(P):
            xi = xv[i]
            pp = 0.0
            _start(xi, &pc, &e)
            for j in range(k):
                pn = xi * a[j] * pc - b[j] * pp
                if fabs(pn) > _BIG:
                    pn = ldexp(pn, -_SHIFT)
                    pc = ldexp(pc, -_SHIFT)
                    e += _SHIFT
                pp = pc
                pc = pn
            pv[i] = ldexp(pp, e)
            cv[i] = ldexp(pc, e)
    return prev, cur


cdef inline double _mag(num_t z) noexcept nogil:
    if num_t is double:
        return fabs(z)
    else:
        return sqrt(z.real * z.real + z.imag * z.imag)


cdef void _scan1(const num_t[::1] f, const num_t[::1] mu, double[::1] out, Py_ssize_t w) noexcept nogil:
    cdef Py_ssize_t a, i
    cdef double acc
    cdef num_t m
    for a in range(mu.shape[0]):
        m = mu[a]
        acc = 0.0
        for i in range(w):
            acc += _mag(f[a + i] - m)
        out[a] = acc / w


cdef void _scan2(const num_t[:, ::1] f, const num_t[:, ::1] mu, double[:, ::1] out, Py_ssize_t w) noexcept nogil:
    cdef Py_ssize_t a0, a1, i, j
    cdef double acc
    cdef num_t m
    for a0 in range(mu.shape[0]):
        for a1 in range(mu.shape[1]):
            m = mu[a0, a1]
            acc = 0.0
            for i in range(w):
                for j in range(w):
                    acc += _mag(f[a0 + i, a1 + j] - m)
            out[a0, a1] = acc / (w * w)


cdef void _scan3(const num_t[:, :, ::1] f, const num_t[:, :, ::1] mu, double[:, :, ::1] out, Py_ssize_t w) noexcept nogil:
    cdef Py_ssize_t a0, a1, a2, i, j, l
    cdef double acc
    cdef num_t m
    for a0 in range(mu.shape[0]):
        for a1 in range(mu.shape[1]):
            for a2 in range(mu.shape[2]):
                m = mu[a0, a1, a2]
                acc = 0.0
                for i in range(w):
                    for j in range(w):
                        for l in range(w):
                            acc += _mag(f[a0 + i, a1 + j, a2 + l] - m)
                out[a0, a1, a2] = acc / (w * w * w)


def _scan_real(f, mu, out, Py_ssize_t w):
    cdef const double[::1] f1, m1
    cdef double[::1] o1
    cdef const double[:, ::1] f2, m2
    cdef double[:, ::1] o2
    cdef const double[:, :, ::1] f3, m3
    cdef double[:, :, ::1] o3
    if f.ndim == 1:
        f1 = f; m1 = mu; o1 = out
        with nogil:
            _scan1(f1, m1, o1, w)
    elif f.ndim == 2:
        f2 = f; m2 = mu; o2 = out
        with nogil:
            _scan2(f2, m2, o2, w)
    else:
        f3 = f; m3 = mu; o3 = out
        with nogil:
            _scan3(f3, m3, o3, w)


def _scan_complex(f, mu, out, Py_ssize_t w):
    cdef const double complex[::1] f1, m1
    cdef const double complex[:, ::1] f2, m2
    cdef const double complex[:, :, ::1] f3, m3
    cdef double[::1] o1
    cdef double[:, ::1] o2
    cdef double[:, :, ::1] o3
    if f.ndim == 1:
        f1 = f; m1 = mu; o1 = out
        with nogil:
            _scan1(f1, m1, o1, w)
    elif f.ndim == 2:
        f2 = f; m2 = mu; o2 = out
        with nogil:
            _scan2(f2, m2, o2, w)
    else:
        f3 = f; m3 = mu; o3 = out
        with nogil:
            _scan3(f3, m3, o3, w)


def mean_oscillation_scan(values, means, int width):
    """Mean of ``|f - f_Q|`` over each window Q with the given anchor means."""
    values = np.asarray(values)
    if values.ndim not in (1, 2, 3):
        raise ValueError("dimension must be 1, 2 or 3")
    out = np.empty(np.shape(means))
    if np.iscomplexobj(values) or np.iscomplexobj(means):
        _scan_complex(np.ascontiguousarray(values, dtype=np.complex128),
                      np.ascontiguousarray(means, dtype=np.complex128), out, width)
    else:
        _scan_real(np.ascontiguousarray(values, dtype=np.float64),
                   np.ascontiguousarray(means, dtype=np.float64), out, width)
    return out
