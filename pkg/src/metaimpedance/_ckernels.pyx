# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled pairwise periodic Green kernels (same formulas as green._core)."""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, expm1, log, sin, cos, fabs, ceil, M_PI, NAN, INFINITY

cnp.import_array()

cdef double LOG2 = 0.6931471805599453


cdef inline void _terms(double d1s, double d2, double* a, double* dd,
                        double* e, double* ex2) noexcept nogil:
    # shared pieces of value and gradient; d1s = sin(pi d1)
    cdef double em1
    a[0] = 2.0 * M_PI * fabs(d2)
    # one exponential per term: expm1 where exp(-a) - 1 would cancel, exp elsewhere
    if a[0] < 0.5:
        em1 = expm1(-a[0])
        e[0] = 1.0 + em1
    else:
        e[0] = exp(-a[0])
        em1 = e[0] - 1.0
    dd[0] = em1 * em1 + 4.0 * e[0] * d1s * d1s
    # 1 - exp(-2a) = -(exp(-a) - 1)(exp(-a) + 1)
    ex2[0] = -em1 * (2.0 + em1)


def pair_green(double[::1] tx, double[::1] ty, double[::1] sx, double[::1] sy,
               bint mirror=False, bint grad=True):
    """Green values (and target gradients) for all target/source pairs.

    With ``mirror`` the source is reflected across x2 = 0 and the gradient is
    taken with respect to the unreflected target.
    """
    cdef Py_ssize_t nt = tx.shape[0], ns = sx.shape[0], i, j
    cdef cnp.ndarray[cnp.float64_t, ndim=2] g = np.empty((nt, ns))
    cdef cnp.ndarray[cnp.float64_t, ndim=2] g1
    cdef cnp.ndarray[cnp.float64_t, ndim=2] g2
    if grad:
        g1 = np.empty((nt, ns))
        g2 = np.empty((nt, ns))
    else:
        g1 = np.empty((0, 0))
        g2 = np.empty((0, 0))
    cdef double[:, ::1] gv = g
    cdef double[:, ::1] g1v = g1
    cdef double[:, ::1] g2v = g2
    cdef double d1, d2, a, e, ex2, s, dd, sg, t2
    cdef double sgn_mirror = -1.0 if mirror else 1.0
    with nogil:
        for i in range(nt):
            t2 = sgn_mirror * ty[i]
            for j in range(ns):
                d1 = tx[i] - sx[j]
                d1 = d1 - ceil(d1 - 0.5)
                d2 = t2 - sy[j]
                s = sin(M_PI * d1)
                _terms(s, d2, &a, &dd, &e, &ex2)
                if dd == 0.0:
                    gv[i, j] = -INFINITY
                    if grad:
                        g1v[i, j] = NAN
                        g2v[i, j] = NAN
                    continue
                gv[i, j] = (a - 2.0 * LOG2 + log(dd)) / (4.0 * M_PI)
                if grad:
                    sg = 1.0 if d2 > 0 else (-1.0 if d2 < 0 else 0.0)
                    g1v[i, j] = sin(2.0 * M_PI * d1) * e / dd
                    g2v[i, j] = sgn_mirror * sg * ex2 / (2.0 * dd)
    if grad:
        return g, g1, g2
    return g, None, None


def halfspace_pair(double[::1] tx, double[::1] ty, double[::1] sx, double[::1] sy,
                   bint grad=True):
    """``G(x - y) - G(x1 - y1, -x2 - y2)`` and its target gradient for all pairs.

    The direct and image terms share the trigonometric factors and the two
    logarithms are merged into one.
    """
    cdef Py_ssize_t nt = tx.shape[0], ns = sx.shape[0], i, j
    cdef cnp.ndarray[cnp.float64_t, ndim=2] g = np.empty((nt, ns))
    cdef cnp.ndarray[cnp.float64_t, ndim=2] g1
    cdef cnp.ndarray[cnp.float64_t, ndim=2] g2
    if grad:
        g1 = np.empty((nt, ns))
        g2 = np.empty((nt, ns))
    else:
        g1 = np.empty((0, 0))
        g2 = np.empty((0, 0))
    cdef double[:, ::1] gv = g
    cdef double[:, ::1] g1v = g1
    cdef double[:, ::1] g2v = g2
    cdef double d1, d2, dm2, s, c, a, dd, e, ex2, am, ddm, em, exm2, sg, sgm
    with nogil:
        for i in range(nt):
            for j in range(ns):
                d1 = tx[i] - sx[j]
                d1 = d1 - ceil(d1 - 0.5)
                d2 = ty[i] - sy[j]
                dm2 = -ty[i] - sy[j]
                s = sin(M_PI * d1)
                _terms(s, d2, &a, &dd, &e, &ex2)
                _terms(s, dm2, &am, &ddm, &em, &exm2)
                if dd == 0.0 or ddm == 0.0:
                    gv[i, j] = -INFINITY if dd == 0.0 else INFINITY
                    if grad:
                        g1v[i, j] = NAN
                        g2v[i, j] = NAN
                    continue
                gv[i, j] = (a - am + log(dd / ddm)) / (4.0 * M_PI)
                if grad:
                    c = 2.0 * s * cos(M_PI * d1)  # sin(2 pi d1)
                    sg = 1.0 if d2 > 0 else (-1.0 if d2 < 0 else 0.0)
                    sgm = 1.0 if dm2 > 0 else (-1.0 if dm2 < 0 else 0.0)
                    g1v[i, j] = c * (e / dd - em / ddm)
                    # the image gradient in x2 carries the chain-rule sign of -x2
                    g2v[i, j] = sg * ex2 / (2.0 * dd) + sgm * exm2 / (2.0 * ddm)
    if grad:
        return g, g1, g2
    return g, None, None
