# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: spectral weight evaluation and centroids.

Semantics must match ``wmsense._kernels._fallback`` bit-for-bit up to
floating-point summation order.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def sin2_weights(const double[::1] sin_tl, const double[::1] cos_tl,
                 const double[::1] psd,
                 double cos_c, double sin_c, out=None):
    """Post-selected spectral weights sin^2(tau*lam + c) * psd(lam)."""
    cdef Py_ssize_t n = sin_tl.shape[0]
    if out is None:
        out = np.empty(n, dtype=np.float64)
    cdef double[::1] w = out
    cdef Py_ssize_t i
    cdef double s
    for i in range(n):
        s = sin_tl[i] * cos_c + cos_tl[i] * sin_c
        w[i] = s * s * psd[i]
    return out


def sin2_centroid(const double[::1] lam, const double[::1] sin_tl,
                  const double[::1] cos_tl, const double[::1] psd,
                  double cos_c, double sin_c):
    """Centroid of ``sin2_weights`` over ``lam`` without materialising it."""
    cdef Py_ssize_t n = lam.shape[0]
    cdef Py_ssize_t i
    cdef double s, w, num = 0.0, den = 0.0
    for i in range(n):
        s = sin_tl[i] * cos_c + cos_tl[i] * sin_c
        w = s * s * psd[i]
        num += w * lam[i]
        den += w
    if not den > 0.0:
        raise ValueError("total spectral weight is not positive")
    return num / den


def centroid_sums(const double[::1] lam, counts, bint clamp_negative):
    """Return (sum(counts*lam), sum(counts)) with optional clamping at zero."""
    cdef const double[::1] c = np.ascontiguousarray(counts, dtype=np.float64)
    cdef Py_ssize_t n = lam.shape[0]
    cdef Py_ssize_t i
    cdef double v, num = 0.0, den = 0.0
    for i in range(n):
        v = c[i]
        if clamp_negative and v < 0.0:
            v = 0.0
        num += v * lam[i]
        den += v
    return num, den


def centroid_batch(const double[::1] lam, const double[:, ::1] frames,
                   double offset,
                   bint clamp_negative, out=None):
    """Per-row centroids of ``frames - offset``; non-positive totals -> NaN."""
    cdef Py_ssize_t m = frames.shape[0]
    cdef Py_ssize_t n = frames.shape[1]
    if out is None:
        out = np.empty(m, dtype=np.float64)
    cdef double[::1] res = out
    cdef Py_ssize_t i, j
    cdef double v, num, den
    for i in range(m):
        num = 0.0
        den = 0.0
        for j in range(n):
            v = frames[i, j] - offset
            if clamp_negative and v < 0.0:
                v = 0.0
            num += v * lam[j]
            den += v
        res[i] = num / den if den > 0.0 else np.nan
    return out
