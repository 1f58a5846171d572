"""Interface phase, its RI derivative, and the closed-form shift law."""

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from wmsense import (
    InterfaceParams,
    SchemeParams,
    Variant,
    analytic_shift,
    critical_angle,
    dphase_dn,
    postselected_density,
    tir_phase,
)
from wmsense.optics import effective_epsilon, inverse_regime_ratio, phase_offset

from conftest import N1, N2, biased_scheme, standard_scheme

# Frozen against an independent complex-Fresnel oracle (phase of r_p
# minus phase of r_s, opposite sign convention, agreement  ~1e-15):
CRIT = 0.8637528405512671        # asin(1.3305/1.75)
PHI_52 = 0.4052015364972687      # theta = 52 deg
PHI_50_8 = 0.3131781836323852
DPHI_DN_50_8 = -5.9475273877179038  # rad/RIU, 40-digit differentiation oracle


def test_critical_angle_value():
    assert math.isclose(critical_angle(N1, N2), CRIT, rel_tol=1e-14)


def test_critical_angle_rejects_bad_indices():
    with pytest.raises(ValueError):
        critical_angle(1.0, 1.5)
    with pytest.raises(ValueError):
        critical_angle(1.5, -0.1)


def test_interface_validation():
    with pytest.raises(ValueError):
        InterfaceParams(n1=1.3, n2=1.5, theta=1.0)
    with pytest.raises(ValueError):
        InterfaceParams(n1=1.75, n2=1.3305, theta=0.0)
    with pytest.raises(ValueError):
        InterfaceParams(n1=1.75, n2=1.3305, theta=math.pi / 2)


def test_tir_phase_frozen_values():
    assert math.isclose(
        tir_phase(InterfaceParams(N1, N2, math.radians(52.0))), PHI_52, rel_tol=1e-13
    )
    assert math.isclose(
        tir_phase(InterfaceParams(N1, N2, math.radians(50.8))), PHI_50_8, rel_tol=1e-13
    )


def test_tir_phase_zero_at_critical_and_grazing():
    # phase vanishes at both ends of the TIR range
    assert tir_phase(InterfaceParams(N1, N2, CRIT + 1e-15)) < 1e-6
    assert tir_phase(InterfaceParams(N1, N2, math.pi / 2 - 1e-9)) < 1e-6


def test_tir_phase_below_critical_raises(iface):
    with pytest.raises(ValueError):
        tir_phase(InterfaceParams(N1, N2, CRIT - 1e-3))


def test_dphase_dn_frozen_value():
    val = dphase_dn(InterfaceParams(N1, N2, math.radians(50.8)))
    assert math.isclose(val, DPHI_DN_50_8, rel_tol=1e-12)


def test_dphase_dn_matches_finite_difference(iface):
    h = 1e-7
    up = tir_phase(InterfaceParams(N1, N2 + h, iface.theta))
    dn = tir_phase(InterfaceParams(N1, N2 - h, iface.theta))
    fd = (up - dn) / (2 * h)
    assert math.isclose(dphase_dn(iface), fd, rel_tol=1e-6)


def test_dphase_dn_negative_and_diverging_near_critical():
    prev = 0.0
    for off in (1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7):
        val = dphase_dn(InterfaceParams(N1, N2, CRIT + off))
        assert val < 0.0
        assert abs(val) > abs(prev)
        prev = val
    assert abs(prev) > 1e3  # blows up approaching the critical angle


def test_dphase_dn_requires_tir():
    with pytest.raises(ValueError):
        dphase_dn(InterfaceParams(N1, N2, CRIT - 1e-6))


def test_scheme_validation():
    with pytest.raises(ValueError):
        SchemeParams(Variant.BIASED, 0.0, 0.1)
    with pytest.raises(ValueError):
        SchemeParams(Variant.STANDARD, 2e-4, 0.3)
    # standard with zero bias is fine
    standard_scheme(2e-4)


def test_phase_offset_conventions():
    phi = 0.8
    assert phase_offset(biased_scheme(2e-4, 0.25), phi) == 0.5 * phi - 0.25
    assert phase_offset(standard_scheme(2e-4), phi) == 0.5 * phi + 0.5 * math.pi


def test_standard_density_is_projection_complement():
    """Standard post-selection weights are cos^2, i.e. sin^2 + pi/2 offset."""
    lam = np.linspace(750.0, 950.0, 512)
    psd = np.ones_like(lam)
    phi = 0.37
    tau = 2e-4
    d_std = postselected_density(standard_scheme(tau), phi, lam, psd)
    expected = np.cos(tau * lam + 0.5 * phi) ** 2
    np.testing.assert_allclose(d_std, expected, atol=1e-15)


@given(
    eps=st.floats(-10.0, 10.0),
    phi=st.floats(0.0, 1.5),
    k=st.integers(-3, 3),
)
def test_density_periodic_in_bias(eps, phi, k):
    # sin^2 is pi-periodic in the total phase, so shifting the bias by
    # k*pi cannot change the post-selected spectrum
    lam = np.linspace(800.0, 880.0, 64)
    psd = np.exp(-((lam - 840.0) / 20.0) ** 2)
    a = postselected_density(biased_scheme(2e-4, eps), phi, lam, psd)
    b = postselected_density(biased_scheme(2e-4, eps + k * math.pi), phi, lam, psd)
    np.testing.assert_allclose(a, b, atol=1e-12)


def test_effective_epsilon_biased_passthrough():
    s = biased_scheme(2e-4, 0.123)
    assert effective_epsilon(s, 0.4, 839.0) == 0.123


def test_effective_epsilon_standard_nearest_branch():
    tau, phi = 2e-4, 0.4052
    s = standard_scheme(tau)
    lam0 = 839.0
    eps = effective_epsilon(s, phi, lam0)
    # must sit on a half-integer branch ...
    frac = eps / math.pi - 0.5
    assert math.isclose(frac, round(frac), abs_tol=1e-12)
    # ... and be the nearest one to the total phase
    x = tau * lam0 + 0.5 * phi
    assert abs(x - eps) <= 0.5 * math.pi + 1e-12


def test_inverse_regime_ratio_zero_when_rebias_exact():
    tau, lam0, phi = 2e-4, 839.0, 0.4052
    eps = (tau * lam0 + 0.5 * phi) % math.pi
    r = inverse_regime_ratio(biased_scheme(tau, eps), phi, lam0, 23.0)
    assert r < 1e-9


def test_inverse_regime_ratio_folds_branches():
    tau, lam0 = 2e-4, 839.0
    s = biased_scheme(tau, 0.0)
    sigma0 = 23.0
    # detunings pi apart score identically
    r1 = inverse_regime_ratio(s, 0.3, lam0, sigma0)
    r2 = inverse_regime_ratio(s, 0.3 + 2 * math.pi, lam0, sigma0)
    assert math.isclose(r1, r2, rel_tol=1e-9)


def test_analytic_shift_slope_is_inverse_tau():
    """d(shift)/d(phi) -> 1/tau at the re-biased operating point."""
    tau, lam0, sigma0 = 2e-4, 833.0, 20.0
    eps = (tau * lam0) % math.pi
    s = biased_scheme(tau, eps)
    h = 1e-9
    up = analytic_shift(s, h, lam0, sigma0).shift_nm
    dn = analytic_shift(s, -h, lam0, sigma0).shift_nm
    slope = (up - dn) / (2 * h)
    assert math.isclose(slope, 1.0 / tau, rel_tol=1e-6)


def test_analytic_shift_extremum():
    # |shift| peaks at sigma0/sqrt(2) where u = +/- sqrt(2) tau sigma0
    tau, lam0, sigma0 = 2e-4, 833.0, 20.0
    eps = (tau * lam0) % math.pi
    u_star = math.sqrt(2.0) * tau * sigma0
    s_at = analytic_shift(biased_scheme(tau, eps - 0.5 * u_star), 0.0, lam0, sigma0)
    assert math.isclose(s_at.shift_nm, sigma0 / math.sqrt(2.0), rel_tol=1e-12)


@given(st.floats(-0.05, 0.05), st.floats(5.0, 40.0))
def test_analytic_shift_odd_and_bounded(detune, sigma0):
    tau, lam0 = 2e-4, 833.0
    eps0 = (tau * lam0) % math.pi
    plus = analytic_shift(biased_scheme(tau, eps0 - detune), 0.0, lam0, sigma0)
    minus = analytic_shift(biased_scheme(tau, eps0 + detune), 0.0, lam0, sigma0)
    assert math.isclose(plus.shift_nm, -minus.shift_nm, abs_tol=1e-9)
    assert abs(plus.shift_nm) <= sigma0 / math.sqrt(2.0) + 1e-9


def test_analytic_shift_regime_flag():
    tau, lam0, sigma0 = 2e-4, 833.0, 20.0
    eps = (tau * lam0) % math.pi
    ok = analytic_shift(biased_scheme(tau, eps), 0.0, lam0, sigma0)
    assert ok.regime_ok
    far = analytic_shift(biased_scheme(tau, eps - 0.5), 0.0, lam0, sigma0)
    assert not far.regime_ok


def test_analytic_shift_standard_uses_nearest_branch():
    # the standard scheme folds to its nearest extinction branch, so the
    # shift stays small even though there is no bias knob
    tau, lam0, sigma0 = standard_coupling_like(), 833.0, 20.0
    s = standard_scheme(tau)
    res = analytic_shift(s, 0.0, lam0, sigma0)
    assert abs(res.shift_nm) < sigma0
    assert res.regime_ok


def standard_coupling_like():
    # tau placing a cos^2 zero exactly at 833 nm: (m + 1/2) pi / lam0 at m=0
    return 0.5 * math.pi / 833.0
