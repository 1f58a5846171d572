"""Numerical kernels with a compiled fast path and a NumPy fallback.

The Cython extension ``_core`` carries the hot loops (spectral weight
evaluation, fused weight+centroid, batched frame centroids).  If it is
missing — source checkout without a build step — the pure-NumPy module
``_fallback`` is used instead.  Set ``WMSENSE_PURE_PYTHON=1`` to force
the fallback, e.g. for benchmarking or debugging.

``BACKEND`` records which implementation won.
"""

import os

if os.environ.get("WMSENSE_PURE_PYTHON", "0") not in ("", "0"):
    from . import _fallback as _impl

    BACKEND = "fallback"
else:
    try:
        from . import _core as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        from . import _fallback as _impl

        BACKEND = "fallback"

sin2_weights = _impl.sin2_weights
sin2_centroid = _impl.sin2_centroid
centroid_sums = _impl.centroid_sums
centroid_batch = _impl.centroid_batch


def backend_name():
    """Name of the active kernel implementation: 'compiled' or 'fallback'."""
    return BACKEND
