"""Source spectra, the spectrometer pixel grid, and centroid read-out.

The central-wavelength read-out used everywhere in the package is the
intensity centroid over the pixel grid; ``CentroidModel`` caches the
per-grid trigonometry so that repeated evaluations (angle sweeps,
derivative stencils) only pay for the scalar phase offset.
"""

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence, Tuple

import numpy as np

from . import _kernels
from .optics import SchemeParams, phase_offset


@dataclass(frozen=True)
class GaussianComponent:
    """One Gaussian intensity line: amplitude * exp(-(lam-center)^2/width^2)."""

    amplitude: float
    center: float
    width: float

    def __post_init__(self):
        if not self.amplitude > 0.0:
            raise ValueError(f"amplitude must be positive, got {self.amplitude!r}")
        if not self.center > 0.0:
            raise ValueError(f"center must be positive, got {self.center!r}")
        if not self.width > 0.0:
            raise ValueError(f"width must be positive, got {self.width!r}")


@dataclass(frozen=True)
class SourceSpectrum:
    """Broadband source modelled as a sum of Gaussian intensity components."""

    components: Tuple[GaussianComponent, ...]

    def __post_init__(self):
        if len(self.components) == 0:
            raise ValueError("source needs at least one component")

    @classmethod
    def single(cls, center, width, amplitude=1.0):
        return cls((GaussianComponent(amplitude, center, width),))

    def psd(self, lam):
        """Source intensity at wavelength(s) ``lam``."""
        lam = np.asarray(lam, dtype=np.float64)
        total = np.zeros_like(lam)
        for comp in self.components:
            d = (lam - comp.center) / comp.width
            total += comp.amplitude * np.exp(-d * d)
        return total

    def total_intensity(self):
        """Integral of the intensity over all wavelengths."""
        return math.sqrt(math.pi) * sum(
            c.amplitude * c.width for c in self.components
        )

    def reference_wavelength(self):
        """Intensity-weighted mean wavelength (closed form)."""
        num = sum(c.amplitude * c.width * c.center for c in self.components)
        den = sum(c.amplitude * c.width for c in self.components)
        return num / den

    def effective_sigma(self):
        """Gaussian-equivalent intensity width: sqrt(2 * Var) of the intensity.

        For a single component this is exactly its ``width``.
        """
        mu = self.reference_wavelength()
        den = sum(c.amplitude * c.width for c in self.components)
        var = 0.0
        for c in self.components:
            w = c.amplitude * c.width / den
            var += w * (c.width * c.width / 2.0 + (c.center - mu) ** 2)
        return math.sqrt(2.0 * var)


@dataclass(frozen=True)
class PixelGrid:
    """Linear wavelength axis of the spectrometer CCD."""

    pixel_count: int = 3648
    lambda_start: float = 750.0
    lambda_step: float = 200.0 / 3647.0

    def __post_init__(self):
        if self.pixel_count < 2:
            raise ValueError(f"need at least 2 pixels, got {self.pixel_count!r}")
        if not self.lambda_step > 0.0:
            raise ValueError(f"lambda_step must be positive, got {self.lambda_step!r}")

    @cached_property
    def wavelengths(self):
        lam = self.lambda_start + self.lambda_step * np.arange(self.pixel_count)
        lam.flags.writeable = False
        return lam

    @property
    def lambda_end(self):
        return self.lambda_start + self.lambda_step * (self.pixel_count - 1)


@dataclass
class SpectrumFrame:
    """One CCD exposure: counts per pixel.

    ``dark_subtracted`` tracks whether the dark baseline has already been
    removed; centroids are only meaningful on subtracted (or ideal)
    frames.  ``timestamp`` is optional acquisition time in seconds.
    """

    counts: np.ndarray
    dark_subtracted: bool = True
    timestamp: Optional[float] = None

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.float64)
        if self.counts.ndim != 1:
            raise ValueError("frame counts must be one-dimensional")


@dataclass(frozen=True)
class LabeledInterval:
    """Closed time interval [start, stop] with a label."""

    label: str
    start: float
    stop: float

    def __post_init__(self):
        if not self.stop > self.start:
            raise ValueError(
                f"interval {self.label!r}: stop must exceed start "
                f"({self.start!r} .. {self.stop!r})"
            )


@dataclass
class Sensorgram:
    """Centroid shift versus time, with optional labeled segments."""

    times: np.ndarray
    shifts: np.ndarray
    segments: Tuple[LabeledInterval, ...] = field(default_factory=tuple)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=np.float64)
        self.shifts = np.asarray(self.shifts, dtype=np.float64)
        if self.times.shape != self.shifts.shape or self.times.ndim != 1:
            raise ValueError("times and shifts must be 1-d arrays of equal length")
        if self.times.size >= 2 and not np.all(np.diff(self.times) > 0.0):
            raise ValueError("times must be strictly increasing")


@dataclass(frozen=True)
class Baseline:
    """Time window whose mean centroid defines the zero of a shift series."""

    start: float
    stop: float

    def __post_init__(self):
        if not self.stop > self.start:
            raise ValueError(f"baseline stop must exceed start ({self.start!r} .. {self.stop!r})")


def _check_overlap(source, grid, psd_on_grid):
    covered = float(np.sum(psd_on_grid)) * grid.lambda_step
    if covered < 1e-12 * source.total_intensity():
        raise ValueError(
            "source spectrum does not overlap the pixel grid "
            f"[{grid.lambda_start:g}, {grid.lambda_end:g}] nm"
        )


class CentroidModel:
    """Fast repeated centroid evaluation for one (scheme, source, grid).

    Precomputes sin/cos of ``tau * lam`` and the source intensity on the
    grid once; each centroid call then costs a fused multiply-add pass.
    """

    def __init__(self, scheme: SchemeParams, source: SourceSpectrum, grid: PixelGrid):
        self.scheme = scheme
        self.source = source
        self.grid = grid
        self.lam = np.ascontiguousarray(grid.wavelengths)
        self.psd = np.ascontiguousarray(source.psd(self.lam))
        _check_overlap(source, grid, self.psd)
        arg = scheme.tau * self.lam
        self.sin_tl = np.ascontiguousarray(np.sin(arg))
        self.cos_tl = np.ascontiguousarray(np.cos(arg))

    def _offset(self, phi, epsilon):
        if epsilon is None:
            return phase_offset(self.scheme, phi)
        return 0.5 * phi - epsilon

    def weights(self, phi, epsilon=None, out=None):
        """Post-selected weights on the grid for reflection phase ``phi``.

        ``epsilon`` overrides the scheme's bias phase when given.
        """
        c = self._offset(phi, epsilon)
        return _kernels.sin2_weights(
            self.sin_tl, self.cos_tl, self.psd, math.cos(c), math.sin(c), out=out
        )

    def centroid(self, phi, epsilon=None):
        """Centroid wavelength of the post-selected spectrum, in nm."""
        c = self._offset(phi, epsilon)
        return _kernels.sin2_centroid(
            self.lam, self.sin_tl, self.cos_tl, self.psd, math.cos(c), math.sin(c)
        )


def grid_source_centroid(source, grid):
    """Centroid of the raw source intensity sampled on the pixel grid.

    This is the natural reference wavelength for read-out on a given
    spectrometer; it differs from the closed-form value by the portion
    of the spectrum falling outside the grid.
    """
    lam = grid.wavelengths
    psd = source.psd(lam)
    _check_overlap(source, grid, psd)
    return float(np.dot(psd, lam) / np.sum(psd))


def render_ideal_frame(scheme, phi, source, grid, peak_counts=12000.0, saturation=None):
    """Noise-free expected frame of the post-selected spectrum.

    Scales the weights so the brightest pixel reads ``peak_counts``;
    clips at ``saturation`` if given.  Raises ValueError when the
    spectrum is fully extinguished on the grid or does not overlap it.
    """
    if not peak_counts > 0.0:
        raise ValueError(f"peak_counts must be positive, got {peak_counts!r}")
    model = CentroidModel(scheme, source, grid)
    w = model.weights(phi)
    top = float(np.max(w))
    if not top > 0.0:
        raise ValueError("post-selected spectrum is fully extinguished on the grid")
    counts = w * (peak_counts / top)
    if saturation is not None:
        np.minimum(counts, saturation, out=counts)
    return SpectrumFrame(counts=counts, dark_subtracted=True)


def centroid(frame, grid, clamp_negative=True):
    """Centroid wavelength of a dark-subtracted frame, in nm.

    Negative pixels (noise overshooting the dark baseline) are clamped
    to zero by default, matching what a live read-out does.
    """
    if not frame.dark_subtracted:
        raise ValueError("centroid needs a dark-subtracted frame")
    if frame.counts.size != grid.pixel_count:
        raise ValueError(
            f"frame has {frame.counts.size} pixels, grid expects {grid.pixel_count}"
        )
    num, den = _kernels.centroid_sums(grid.wavelengths, frame.counts, clamp_negative)
    if not den > 0.0:
        raise ValueError("frame has no positive signal; centroid undefined")
    return num / den


def shift_series(frames, grid, reference=0.0, clamp_negative=True):
    """Centroid-shift time series from a sequence of frames.

    ``reference`` is either a fixed wavelength in nm (0 means report raw
    centroids) or a ``Baseline`` window whose mean centroid becomes the
    zero.  Frames carry their own timestamps; when absent, the frame
    index is used as the time axis.
    """
    frames = list(frames)
    if len(frames) == 0:
        raise ValueError("need at least one frame")
    times = np.empty(len(frames))
    cents = np.empty(len(frames))
    for i, fr in enumerate(frames):
        times[i] = fr.timestamp if fr.timestamp is not None else float(i)
        cents[i] = centroid(fr, grid, clamp_negative=clamp_negative)
    if isinstance(reference, Baseline):
        mask = (times >= reference.start) & (times <= reference.stop)
        if not np.any(mask):
            raise ValueError(
                f"no frames inside baseline window [{reference.start:g}, {reference.stop:g}]"
            )
        ref = float(np.mean(cents[mask]))
        segs = (LabeledInterval("baseline", reference.start, reference.stop),)
    else:
        ref = float(reference)
        segs = ()
    return Sensorgram(times=times, shifts=cents - ref, segments=segs)
