# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled versions of the hot loops in :mod:`gammaprime._pykernels`."""
import numpy as np
cimport numpy as cnp
from libc.math cimport log, sqrt, fabs, exp, log1p, INFINITY, NAN

cnp.import_array()


def table_stats(const double[::1] n11, const double[::1] n12,
                const double[::1] n21, const double[::1] n22, double limit):
    cdef Py_ssize_t n = n11.shape[0], i
    psi_a = np.empty(n)
    se_a = np.empty(n)
    z_a = np.empty(n)
    t_a = np.empty(n)
    cdef double[::1] psi = psi_a, se = se_a, z = z_a, t = t_a
    cdef double a, b, c, d, ad, bc, r, lp, s, zi, y
    with nogil:
        for i in range(n):
            a = n11[i]; b = n12[i]; c = n21[i]; d = n22[i]
            ad = a * d
            bc = b * c
            r = ad / bc
            lp = log(r)
            s = sqrt((bc * (a + d) + ad * (b + c)) / (ad * bc))
            zi = lp / s
            psi[i] = lp
            se[i] = s
            z[i] = zi
            if fabs(lp) < limit:
                # tanh(log(r) / 4) = (sqrt(r) - 1) / (sqrt(r) + 1)
                r = sqrt(r)
                y = (r - 1.0) / (r + 1.0)
                t[i] = 4.0 * zi / (4.0 - lp * y)
            else:
                t[i] = NAN
    return psi_a, se_a, z_a, t_a


def posterior_weights(const double[::1] log_prior, const double[::1] xi,
                      double observed, bint two_sided):
    cdef Py_ssize_t n = xi.shape[0], i
    out_a = np.empty(n)
    cdef double[::1] out = out_a
    cdef double u, v, top = -INFINITY, total = 0.0, hi, lo
    with nogil:
        for i in range(n):
            if log_prior[i] == -INFINITY:
                out[i] = -INFINITY
                continue
            u = -0.5 * (observed - xi[i]) * (observed - xi[i])
            if two_sided:
                v = -0.5 * (observed + xi[i]) * (observed + xi[i])
                hi = u if u > v else v
                lo = v if u > v else u
                u = hi + log1p(exp(lo - hi))
            out[i] = log_prior[i] + u
            if out[i] > top:
                top = out[i]
        if top == -INFINITY:
            for i in range(n):
                out[i] = NAN
        else:
            for i in range(n):
                out[i] = exp(out[i] - top)
                total += out[i]
            for i in range(n):
                out[i] /= total
    return out_a


def abs_argmax(const double[::1] x):
    cdef Py_ssize_t n = x.shape[0], i, best = 0
    cdef double m = -1.0, v
    with nogil:
        for i in range(n):
            v = fabs(x[i])
            if v > m:
                m = v
                best = i
    return best
