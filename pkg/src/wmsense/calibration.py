"""Sensitivity calibration: concentration steps to nm-per-RIU.

A staircase measurement cycles the flow cell through solutions of known
refractive index; segmenting the resulting shift series per level and
regressing mean shift against RI yields the read-out sensitivity
``s_RI`` (nm/RIU).  ``phase_sensitivity`` provides the model-side
counterpart: the numeric slope of the rendered centroid against the
reflection phase.
"""

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from .optics import phase_offset
from .spectral import CentroidModel


@dataclass
class CalibrationModel:
    """NaCl concentration-to-RI line plus the fitted sensitivity."""

    ri_intercept: float = 1.3305
    ri_slope: float = 1.471e-4  # RIU per (g/L) of NaCl
    sensitivity_nm_per_riu: float = math.nan
    shift_intercept_nm: float = math.nan
    r_squared: float = math.nan
    slope_stderr: float = math.nan


def nacl_ri(concentration_g_per_l, model=None):
    """Refractive index of an NaCl solution at the given g/L concentration."""
    c = np.asarray(concentration_g_per_l, dtype=np.float64)
    if np.any(c < 0.0):
        raise ValueError("concentration must be non-negative")
    m = model if model is not None else CalibrationModel()
    out = m.ri_intercept + m.ri_slope * c
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class ScheduleLevel:
    """One staircase level: a time interval at a known solution.

    Exactly one of ``concentration`` (g/L, converted through the NaCl
    line) or ``ri`` must be given.
    """

    label: str
    start: float
    stop: float
    concentration: Optional[float] = None
    ri: Optional[float] = None

    def __post_init__(self):
        if not self.stop > self.start:
            raise ValueError(
                f"level {self.label!r}: stop must exceed start "
                f"({self.start!r} .. {self.stop!r})"
            )
        if (self.concentration is None) == (self.ri is None):
            raise ValueError(
                f"level {self.label!r}: give exactly one of concentration or ri"
            )

    def refractive_index(self, model=None):
        if self.ri is not None:
            return self.ri
        return nacl_ri(self.concentration, model)


@dataclass(frozen=True)
class StepSchedule:
    """Time-ordered, non-overlapping staircase levels."""

    levels: Tuple[ScheduleLevel, ...]

    def __post_init__(self):
        if len(self.levels) == 0:
            raise ValueError("schedule needs at least one level")
        for prev, cur in zip(self.levels, self.levels[1:]):
            if cur.start < prev.stop:
                raise ValueError(
                    f"levels {prev.label!r} and {cur.label!r} overlap or are out of order"
                )


@dataclass(frozen=True)
class LevelStats:
    """Per-level summary of a segmented shift series."""

    label: str
    ri: float
    mean_shift_nm: float
    std_shift_nm: float
    n_samples: int


def segment_levels(sensorgram, schedule, settle_fraction=0.1, ri_model=None):
    """Per-level mean/std of the shift series, discarding settling samples.

    The first ``settle_fraction`` of the samples inside each level (by
    count) is dropped to let the flow cell equilibrate.  Every level
    must retain at least two samples.
    """
    if not 0.0 <= settle_fraction < 1.0:
        raise ValueError(f"settle_fraction must be in [0, 1), got {settle_fraction!r}")
    t = sensorgram.times
    out = []
    for lvl in schedule.levels:
        idx = np.nonzero((t >= lvl.start) & (t <= lvl.stop))[0]
        n_trim = int(math.floor(settle_fraction * idx.size))
        idx = idx[n_trim:]
        if idx.size < 2:
            raise ValueError(
                f"level {lvl.label!r} has {idx.size} usable samples; need >= 2"
            )
        vals = sensorgram.shifts[idx]
        out.append(
            LevelStats(
                label=lvl.label,
                ri=lvl.refractive_index(ri_model),
                mean_shift_nm=float(np.mean(vals)),
                std_shift_nm=float(np.std(vals, ddof=1)),
                n_samples=int(idx.size),
            )
        )
    return out


def fit_sensitivity(ri_values, mean_shifts, weights=None):
    """Least-squares line shift = s_RI * ri + const.

    Returns a ``CalibrationModel`` with the fitted slope (nm/RIU),
    intercept, R^2 and the slope's standard error (NaN when there are no
    residual degrees of freedom).  ``weights`` are optional inverse-
    variance weights per point.
    """
    x = np.asarray(ri_values, dtype=np.float64)
    y = np.asarray(mean_shifts, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("ri_values and mean_shifts must be 1-d and equally long")
    if np.unique(x).size < 2:
        raise ValueError("need at least two distinct RI values to fit a slope")
    if weights is None:
        w = np.ones_like(x)
    else:
        w = np.asarray(weights, dtype=np.float64)
        if w.shape != x.shape or np.any(w <= 0.0):
            raise ValueError("weights must be positive and match the data length")
    wsum = w.sum()
    xbar = float(np.dot(w, x) / wsum)
    ybar = float(np.dot(w, y) / wsum)
    sxx = float(np.dot(w, (x - xbar) ** 2))
    sxy = float(np.dot(w, (x - xbar) * (y - ybar)))
    slope = sxy / sxx
    intercept = ybar - slope * xbar
    resid = y - (intercept + slope * x)
    ss_res = float(np.dot(w, resid * resid))
    ss_tot = float(np.dot(w, (y - ybar) ** 2))
    if ss_tot > 0.0:
        r2 = 1.0 - ss_res / ss_tot
    else:
        r2 = 1.0 if ss_res == 0.0 else 0.0
    r2 = min(max(r2, 0.0), 1.0)
    dof = x.size - 2
    stderr = math.sqrt(ss_res / dof / sxx) if dof > 0 else math.nan
    return CalibrationModel(
        sensitivity_nm_per_riu=slope,
        shift_intercept_nm=intercept,
        r_squared=r2,
        slope_stderr=stderr,
    )


def phase_sensitivity(scheme, phi, source, grid, step=1e-4, model=None):
    """Numeric slope of the rendered centroid vs. reflection phase, nm/rad.

    Central difference with half-step ``step`` (radians).  The operating
    point must be in-regime: a post-selection zero of the weight
    function has to fall inside the wavelength grid.  Pass a prebuilt
    ``CentroidModel`` to amortise the grid trigonometry over repeated
    calls (sweeps, optimizers).
    """
    if not step > 0.0:
        raise ValueError(f"step must be positive, got {step!r}")
    if model is None:
        model = CentroidModel(scheme, source, grid)
    # extinction wavelengths solve tau*lam + c = k*pi
    c = phase_offset(scheme, phi)
    k_lo = math.ceil((scheme.tau * grid.lambda_start + c) / math.pi - 1e-12)
    k_hi = math.floor((scheme.tau * grid.lambda_end + c) / math.pi + 1e-12)
    if k_lo > k_hi:
        raise ValueError(
            "no extinction point inside the grid "
            f"[{grid.lambda_start:g}, {grid.lambda_end:g}] nm; "
            "re-solve the bias phase for this operating point"
        )
    hi = model.centroid(phi + step)
    lo = model.centroid(phi - step)
    return (hi - lo) / (2.0 * step)
