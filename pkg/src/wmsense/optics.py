"""Closed-form optics of a total-internal-reflection sensing head.

Covers the relative phase picked up between p and s polarizations on
total internal reflection, its sensitivity to the external refractive
index, and the post-selected spectrum of the two weak-measurement
read-out schemes (phase-biased and standard).

Conventions used throughout the package:

* angles in radians, wavelengths in nanometres,
* coupling strength ``tau`` in rad/nm (spectral phase ``tau * lam``),
* a Gaussian *intensity* component of width ``w`` means
  ``exp(-(lam - center)**2 / w**2)``, i.e. standard deviation
  ``w / sqrt(2)``.
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple


class Variant(str, Enum):
    """Read-out scheme: phase-biased or standard weak measurement."""

    BIASED = "biased"
    STANDARD = "standard"


@dataclass(frozen=True)
class InterfaceParams:
    """Refractive indices and incidence angle at the sensing interface.

    Args:
        n1: prism index (denser medium).
        n2: analyte index; must satisfy 0 < n2 < n1.
        theta: angle of incidence in radians, in (0, pi/2).
    """

    n1: float
    n2: float
    theta: float

    def __post_init__(self):
        if not (self.n2 > 0.0 and self.n1 > self.n2):
            raise ValueError(
                f"need n1 > n2 > 0, got n1={self.n1!r}, n2={self.n2!r}"
            )
        if not (0.0 < self.theta < math.pi / 2):
            raise ValueError(f"theta must lie in (0, pi/2), got {self.theta!r}")

    def is_total_internal(self):
        """True when the incidence angle reaches total internal reflection."""
        return math.sin(self.theta) >= self.n2 / self.n1


@dataclass(frozen=True)
class SchemeParams:
    """Read-out scheme parameters.

    ``epsilon`` is the bias phase in radians; the standard scheme has no
    bias knob, so it must stay at 0 there.
    """

    variant: Variant
    tau: float
    epsilon: float = 0.0

    def __post_init__(self):
        if not self.tau > 0.0:
            raise ValueError(f"tau must be positive, got {self.tau!r}")
        if self.variant is Variant.STANDARD and self.epsilon != 0.0:
            raise ValueError("standard scheme takes no bias phase; epsilon must be 0")


def critical_angle(n1, n2):
    """Critical angle asin(n2/n1) for total internal reflection, in radians."""
    if not (n2 > 0.0 and n1 > n2):
        raise ValueError(f"need n1 > n2 > 0, got n1={n1!r}, n2={n2!r}")
    return math.asin(n2 / n1)


def tir_phase(iface):
    """Relative p-s phase on total internal reflection, in radians.

    phi = 2 * atan( sqrt(n1^2 sin^2(theta) - n2^2) / (n1 sin(theta) tan(theta)) )

    Raises ValueError below the critical angle, where the reflection is
    no longer total and this phase is undefined.
    """
    if not iface.is_total_internal():
        raise ValueError(
            "incidence below the critical angle: "
            f"theta={iface.theta!r}, critical={critical_angle(iface.n1, iface.n2)!r}"
        )
    s = iface.n1 * math.sin(iface.theta)
    rad = s * s - iface.n2 * iface.n2
    if rad < 0.0:  # roundoff right at the critical angle
        rad = 0.0
    return 2.0 * math.atan(math.sqrt(rad) / (s * math.tan(iface.theta)))


def dphase_dn(iface):
    """Derivative of the reflection phase w.r.t. the analyte index, rad/RIU.

    Always negative above the critical angle; diverges at it, so the
    incidence must be strictly total.
    """
    s = iface.n1 * math.sin(iface.theta)
    rad = s * s - iface.n2 * iface.n2
    if not rad > 0.0:
        raise ValueError(
            "phase derivative requires strictly total internal reflection "
            f"(theta={iface.theta!r})"
        )
    root = math.sqrt(rad)
    b = s * math.tan(iface.theta)
    g = root / b
    return -2.0 * iface.n2 / ((1.0 + g * g) * b * root)


def phase_offset(scheme, phi):
    """Scalar phase offset c such that the post-selected weight is
    sin^2(tau*lam + c) times the source intensity.

    Biased: c = phi/2 - epsilon.  Standard: the projection gives
    cos^2(tau*lam + phi/2), i.e. c = phi/2 + pi/2.
    """
    if scheme.variant is Variant.STANDARD:
        return 0.5 * phi + 0.5 * math.pi
    return 0.5 * phi - scheme.epsilon


def postselected_density(scheme, phi, lam, source_psd):
    """Post-selected spectral density at wavelength(s) ``lam``.

    ``source_psd`` is the source intensity evaluated at the same
    wavelengths.  Works on scalars and NumPy arrays alike.
    """
    import numpy as np

    c = phase_offset(scheme, phi)
    s = np.sin(scheme.tau * np.asarray(lam, dtype=np.float64) + c)
    return s * s * source_psd


def effective_epsilon(scheme, phi, lambda0):
    """Bias phase actually at work near ``lambda0``.

    For the biased scheme this is just ``scheme.epsilon``.  The standard
    scheme behaves like a biased one whose bias sits on the nearest
    half-integer branch (m + 1/2) * pi of the total phase
    ``tau*lambda0 + phi/2``.
    """
    if scheme.variant is Variant.BIASED:
        return scheme.epsilon
    m = round((scheme.tau * lambda0 + 0.5 * phi) / math.pi - 0.5)
    return (m + 0.5) * math.pi


class ShiftResult(NamedTuple):
    shift_nm: float
    regime_ok: bool


def inverse_regime_ratio(scheme, phi, lambda0, sigma0):
    """Distance to the nearest post-selection zero, in units of tau*sigma0.

    Folds the phase detuning at ``lambda0`` to the nearest extinction
    branch (period pi in the total phase), so a perfectly re-biased
    operating point scores 0 regardless of which branch it sits on.
    Values above ~0.2 mean the linear inverse regime is a stretch.
    """
    if not sigma0 > 0.0:
        raise ValueError(f"sigma0 must be positive, got {sigma0!r}")
    eps = effective_epsilon(scheme, phi, lambda0)
    x = scheme.tau * lambda0 + 0.5 * phi - eps
    dist = abs((x + 0.5 * math.pi) % math.pi - 0.5 * math.pi)
    return dist / (scheme.tau * sigma0)


def analytic_shift(scheme, phi, lambda0, sigma0, regime_threshold=0.2):
    """Small-detuning central-wavelength shift of the post-selected spectrum.

    For a single Gaussian source of intensity width ``sigma0`` centred at
    ``lambda0``, the centroid moves by

        dlam = 2 tau sigma0^2 u / (2 tau^2 sigma0^2 + u^2),
        u    = 2 (tau lambda0 + phi/2 - epsilon_eff).

    The detuning ``u`` is taken as-is for the biased scheme; the
    standard scheme has no bias knob, so its effective epsilon is the
    nearest half-integer branch (see ``effective_epsilon``).  Returns
    the shift and a flag that is True while |u/2| stays below
    ``regime_threshold * tau * sigma0`` (the linear inverse regime).

    Odd in ``u`` and bounded by sigma0/sqrt(2) in magnitude, with the
    extremes at u = +/- sqrt(2)*tau*sigma0; the slope at u = 0 is 1/tau
    per radian of phi.
    """
    if not sigma0 > 0.0:
        raise ValueError(f"sigma0 must be positive, got {sigma0!r}")
    eps = effective_epsilon(scheme, phi, lambda0)
    u = 2.0 * (scheme.tau * lambda0 + 0.5 * phi - eps)
    ts2 = scheme.tau * sigma0 * scheme.tau * sigma0
    shift = 2.0 * scheme.tau * sigma0 * sigma0 * u / (2.0 * ts2 + u * u)
    ok = abs(0.5 * u) < regime_threshold * scheme.tau * sigma0
    return ShiftResult(shift, ok)
