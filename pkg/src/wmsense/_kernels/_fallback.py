"""Pure-NumPy implementations of the hot numerical kernels.

These mirror the Cython extension ``wmsense._kernels._core`` exactly; the
package selects one of the two at import time.  Keep both in sync: same
signatures, same semantics, same error behaviour.
"""

import numpy as np


def sin2_weights(sin_tl, cos_tl, psd, cos_c, sin_c, out=None):
    """Post-selected spectral weights sin^2(tau*lam + c) * psd(lam).

    The caller precomputes ``sin_tl = sin(tau*lam)`` and ``cos_tl =
    cos(tau*lam)`` once per wavelength grid; only the scalar phase offset
    ``c`` changes between calls, entering through ``cos_c``/``sin_c``.
    """
    s = sin_tl * cos_c
    s += cos_tl * sin_c
    np.square(s, out=s)
    s *= psd
    if out is not None:
        out[:] = s
        return out
    return s


def sin2_centroid(lam, sin_tl, cos_tl, psd, cos_c, sin_c):
    """Centroid of ``sin2_weights`` over ``lam`` without materialising it.

    Raises ValueError if the total weight is not positive (fully
    extinguished spectrum).
    """
    w = sin2_weights(sin_tl, cos_tl, psd, cos_c, sin_c)
    den = w.sum()
    if not den > 0.0:
        raise ValueError("total spectral weight is not positive")
    return float(np.dot(w, lam) / den)


def centroid_sums(lam, counts, clamp_negative):
    """Return (sum(counts*lam), sum(counts)) with optional clamping at zero."""
    c = np.asarray(counts, dtype=np.float64)
    if clamp_negative:
        c = np.maximum(c, 0.0)
    return float(np.dot(c, lam)), float(c.sum())


def centroid_batch(lam, frames, offset, clamp_negative, out=None):
    """Per-row centroids of ``frames - offset``.

    ``frames`` is (n_trials, n_pixels); ``offset`` is a scalar baseline
    (e.g. the dark mean) subtracted from every sample.  Rows whose total
    is not positive give NaN.
    """
    k = frames - offset
    if clamp_negative:
        np.maximum(k, 0.0, out=k)
    num = k @ lam
    den = k.sum(axis=1)
    if out is None:
        out = np.empty(den.shape, dtype=np.float64)
    good = den > 0.0
    out[good] = num[good] / den[good]
    out[~good] = np.nan
    return out
