"""Operating-point design: bias choice, angle optimization, averaging.

The design figure of merit for an RI sensor read out through the
centroid shift is

    s_RI = S_phi * |dphi/dn|   [nm/RIU]

with S_phi the spectral sensitivity (nm/rad) of the centroid to the
reflection phase and dphi/dn the interface's phase response.  The bias
phase is always re-solved per angle so the read-out sits at a
post-selection zero of the source centre.
"""

import math
import warnings
from dataclasses import dataclass, replace
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .calibration import phase_sensitivity
from .optics import (
    InterfaceParams,
    SchemeParams,
    Variant,
    critical_angle,
    dphase_dn,
    inverse_regime_ratio,
    tir_phase,
)
from .spectral import CentroidModel, grid_source_centroid

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def bias_for_inverse_regime(tau, lambda0, phi):
    """Bias phase placing a post-selection zero at ``lambda0``.

    Solves sin(tau*lambda0 + phi/2 - epsilon) = 0 for epsilon, folded
    into [0, pi).
    """
    if not tau > 0.0:
        raise ValueError(f"tau must be positive, got {tau!r}")
    return (tau * lambda0 + 0.5 * phi) % math.pi


def standard_coupling(lambda0, m=0):
    """Admissible coupling strength tau_m = (m + 1/2) * pi / lambda0.

    These are the couplings at which the standard (unbiased) scheme has
    a post-selection zero at ``lambda0``.
    """
    if m < 0:
        raise ValueError(f"branch index must be >= 0, got {m!r}")
    if not lambda0 > 0.0:
        raise ValueError(f"lambda0 must be positive, got {lambda0!r}")
    return (m + 0.5) * math.pi / lambda0


def golden_section_max(f, a, b, tol=1e-5):
    """Maximize a unimodal scalar function on [a, b] by golden-section search."""
    if not b > a:
        raise ValueError(f"need b > a, got [{a!r}, {b!r}]")
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while (b - a) > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


@dataclass(frozen=True)
class OperatingPoint:
    """A fully specified sensing configuration and its predicted figures."""

    theta: float
    tau: float
    epsilon: float
    s_phi_nm_per_rad: float
    dphi_dn_rad_per_riu: float
    s_ri_nm_per_riu: float
    regime_ok: bool


class AngleSweep(NamedTuple):
    """Dense evaluation of the design figures over incidence angles."""

    theta: np.ndarray
    s_phi: np.ndarray
    dphi_dn: np.ndarray
    s_ri: np.ndarray


def _sweep_eval(model, iface_template, scheme, lambda0, thetas, step):
    """S_phi, dphi/dn and s_RI at each angle.

    For the biased scheme the bias phase is re-solved per angle; the
    standard scheme has no bias knob and is evaluated as-is.
    """
    rebias = scheme.variant is Variant.BIASED
    s_phi = np.empty(len(thetas))
    dpdn = np.empty(len(thetas))
    for i, th in enumerate(thetas):
        iface = replace(iface_template, theta=float(th))
        phi = tir_phase(iface)
        eps = bias_for_inverse_regime(scheme.tau, lambda0, phi) if rebias else None
        hi = model.centroid(phi + step, epsilon=eps)
        lo = model.centroid(phi - step, epsilon=eps)
        s_phi[i] = (hi - lo) / (2.0 * step)
        dpdn[i] = dphase_dn(iface)
    return s_phi, dpdn


def angle_sensitivity_sweep(
    iface_template,
    scheme,
    source,
    grid,
    thetas,
    lambda0=None,
    step=1e-4,
):
    """Evaluate S_phi, dphi/dn and s_RI on a grid of incidence angles.

    The bias phase is re-solved at every angle so each point sits in the
    inverse regime at ``lambda0`` (default: the source centroid on the
    grid).  All angles must lie strictly above the critical angle.
    """
    thetas = np.asarray(thetas, dtype=np.float64)
    crit = critical_angle(iface_template.n1, iface_template.n2)
    if np.any(thetas <= crit) or np.any(thetas >= math.pi / 2):
        raise ValueError("sweep angles must lie in (critical angle, pi/2)")
    if lambda0 is None:
        lambda0 = grid_source_centroid(source, grid)
    model = CentroidModel(scheme, source, grid)
    s_phi, dpdn = _sweep_eval(model, iface_template, scheme, lambda0, thetas, step)
    return AngleSweep(theta=thetas, s_phi=s_phi, dphi_dn=dpdn, s_ri=s_phi * np.abs(dpdn))


def optimize_angle(
    iface_template,
    scheme,
    source,
    grid,
    theta_range=None,
    margin=math.radians(0.3),
    coarse_points=200,
    tol=1e-5,
    step=1e-4,
    lambda0=None,
    regime_threshold=0.2,
):
    """Incidence angle maximizing s_RI = S_phi * |dphi/dn|.

    Scans a coarse grid over the feasible range (above the critical
    angle by ``margin``, below pi/2), then refines around the best
    coarse point by golden-section search to ``tol`` radians.  The bias
    phase is re-solved per candidate angle.

    Returns the optimal ``OperatingPoint``.
    """
    crit = critical_angle(iface_template.n1, iface_template.n2)
    lo = crit + margin
    hi = math.pi / 2 - 1e-6
    if theta_range is not None:
        lo = max(lo, theta_range[0])
        hi = min(hi, theta_range[1])
    if not hi > lo:
        raise ValueError(
            f"empty feasible angle range [{lo!r}, {hi!r}] "
            f"(critical angle {crit!r} + margin {margin!r})"
        )
    if coarse_points < 3:
        raise ValueError(f"coarse_points must be >= 3, got {coarse_points!r}")
    if lambda0 is None:
        lambda0 = grid_source_centroid(source, grid)
    model = CentroidModel(scheme, source, grid)
    tau = scheme.tau
    rebias = scheme.variant is Variant.BIASED

    def merit(th):
        iface = replace(iface_template, theta=th)
        phi = tir_phase(iface)
        eps = bias_for_inverse_regime(tau, lambda0, phi) if rebias else None
        s_phi = (
            model.centroid(phi + step, epsilon=eps)
            - model.centroid(phi - step, epsilon=eps)
        ) / (2.0 * step)
        return s_phi * abs(dphase_dn(iface))

    thetas = np.linspace(lo, hi, coarse_points)
    coarse = np.array([merit(float(t)) for t in thetas])
    k = int(np.argmax(coarse))
    a = thetas[max(k - 1, 0)]
    b = thetas[min(k + 1, coarse_points - 1)]
    theta_best = golden_section_max(merit, float(a), float(b), tol=tol)

    iface = replace(iface_template, theta=theta_best)
    phi = tir_phase(iface)
    eps = bias_for_inverse_regime(tau, lambda0, phi)
    tuned = replace(scheme, epsilon=eps) if scheme.variant is Variant.BIASED else scheme
    s_phi = phase_sensitivity(tuned, phi, source, grid, step=step, model=None)
    dpdn = dphase_dn(iface)
    ratio = inverse_regime_ratio(tuned, phi, lambda0, source.effective_sigma())
    return OperatingPoint(
        theta=theta_best,
        tau=tau,
        epsilon=eps if scheme.variant is Variant.BIASED else 0.0,
        s_phi_nm_per_rad=s_phi,
        dphi_dn_rad_per_riu=dpdn,
        s_ri_nm_per_riu=s_phi * abs(dpdn),
        regime_ok=bool(ratio < regime_threshold),
    )


@dataclass(frozen=True)
class SchemeComparison:
    """Biased vs. best admissible standard sensitivity at one coupling."""

    tau: float
    s_biased_nm_per_rad: float
    tau_standard: float
    s_standard_nm_per_rad: float
    biased_exceeds: bool


def sensitivity_ceiling(lambda0):
    """Upper bound 2*lambda0/pi on the standard scheme's S_phi, nm/rad."""
    if not lambda0 > 0.0:
        raise ValueError(f"lambda0 must be positive, got {lambda0!r}")
    return 2.0 * lambda0 / math.pi


def compare_schemes(tau_values, lambda0, source, grid, phi=0.0, step=None):
    """Spectral sensitivity of the biased scheme vs. the standard bound.

    For each requested coupling the biased S_phi is evaluated from the
    forward model with the bias re-solved at ``lambda0``; the standard
    scheme is scored at its nearest admissible coupling tau_m =
    (m + 1/2) * pi / lambda0, where its sensitivity is 1/tau_m -- capped
    by the ceiling 2*lambda0/pi at m = 0.
    """
    if not lambda0 > 0.0:
        raise ValueError(f"lambda0 must be positive, got {lambda0!r}")
    sigma = source.effective_sigma()
    rows: List[SchemeComparison] = []
    for tau in np.asarray(tau_values, dtype=np.float64):
        tau = float(tau)
        if not tau > 0.0:
            raise ValueError(f"tau values must be positive, got {tau!r}")
        eps = bias_for_inverse_regime(tau, lambda0, phi)
        scheme = SchemeParams(Variant.BIASED, tau, eps)
        # keep the finite-difference step well inside the linear range
        h = step if step is not None else min(1e-4, 0.02 * tau * sigma)
        s_biased = phase_sensitivity(scheme, phi, source, grid, step=h)
        m = max(0, round(tau * lambda0 / math.pi - 0.5))
        tau_m = standard_coupling(lambda0, m)
        rows.append(
            SchemeComparison(
                tau=tau,
                s_biased_nm_per_rad=s_biased,
                tau_standard=tau_m,
                s_standard_nm_per_rad=1.0 / tau_m,
                biased_exceeds=bool(s_biased > 1.0 / tau_m),
            )
        )
    return rows


@dataclass(frozen=True)
class AveragingModel:
    """Noise split into frame-averaged and floor components.

    r(N) = sqrt(sigma_s^2 / N + sigma_c^2) / s_RI
    """

    sigma_s_nm: float
    sigma_c_nm: float
    s_ri_nm_per_riu: float

    def __post_init__(self):
        if self.sigma_s_nm < 0.0 or self.sigma_c_nm < 0.0:
            raise ValueError("noise components must be non-negative")
        if not self.s_ri_nm_per_riu > 0.0:
            raise ValueError(
                f"sensitivity must be positive, got {self.s_ri_nm_per_riu!r}"
            )


def resolution(model, n_frames):
    """RI resolution after averaging ``n_frames`` frames, in RIU."""
    n = int(n_frames)
    if n < 1 or n != n_frames:
        raise ValueError(f"n_frames must be a positive integer, got {n_frames!r}")
    return (
        math.sqrt(model.sigma_s_nm**2 / n + model.sigma_c_nm**2)
        / model.s_ri_nm_per_riu
    )


def fit_noise_decomposition(n_frames, resolutions, s_ri):
    """Split measured resolutions r(N) into sigma_s and sigma_c.

    Fits (r * s_RI)^2 = sigma_s^2 / N + sigma_c^2 by least squares on
    1/N.  Negative fitted squares are clamped to zero.
    """
    n = np.asarray(n_frames, dtype=np.float64)
    r = np.asarray(resolutions, dtype=np.float64)
    if n.shape != r.shape or n.ndim != 1:
        raise ValueError("n_frames and resolutions must be 1-d and equally long")
    if np.unique(n).size < 2:
        raise ValueError("need at least two distinct averaging depths")
    if np.any(n < 1.0) or np.any(r < 0.0):
        raise ValueError("averaging depths must be >= 1 and resolutions >= 0")
    if not s_ri > 0.0:
        raise ValueError(f"sensitivity must be positive, got {s_ri!r}")
    y = (r * s_ri) ** 2
    a = np.column_stack([1.0 / n, np.ones_like(n)])
    (slope, icept), *_ = np.linalg.lstsq(a, y, rcond=None)
    if slope < 0.0 or icept < 0.0:
        warnings.warn(
            "noise decomposition produced a negative variance; clamping to 0",
            stacklevel=2,
        )
    return AveragingModel(
        sigma_s_nm=math.sqrt(max(float(slope), 0.0)),
        sigma_c_nm=math.sqrt(max(float(icept), 0.0)),
        s_ri_nm_per_riu=float(s_ri),
    )
