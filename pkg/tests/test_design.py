"""Bias/angle/coupling design utilities and the averaging model."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wmsense import (
    AveragingModel,
    angle_sensitivity_sweep,
    bias_for_inverse_regime,
    compare_schemes,
    fit_noise_decomposition,
    golden_section_max,
    optimize_angle,
    resolution,
    sensitivity_ceiling,
    standard_coupling,
)
from wmsense.optics import critical_angle, inverse_regime_ratio
from wmsense.spectral import grid_source_centroid

from conftest import N1, N2, TAU, biased_scheme, standard_scheme

CEILING_833 = 530.3042703821952  # 2*833/pi
R_SINGLE_FRAME = 3.8956266078647556e-07  # 5.3e-3 nm / 13605 nm/RIU


def test_bias_lands_in_inverse_regime():
    lam0, phi = 839.0956, 0.4052
    eps = bias_for_inverse_regime(TAU, lam0, phi)
    assert 0.0 <= eps < math.pi
    ratio = inverse_regime_ratio(biased_scheme(TAU, eps), phi, lam0, 23.15)
    assert ratio < 1e-9


@given(st.floats(1e-5, 1e-2), st.floats(750.0, 950.0), st.floats(0.0, 1.5))
def test_bias_zero_ratio_property(tau, lam0, phi):
    eps = bias_for_inverse_regime(tau, lam0, phi)
    assert 0.0 <= eps < math.pi
    ratio = inverse_regime_ratio(biased_scheme(tau, eps), phi, lam0, 20.0)
    assert ratio < 1e-6


def test_standard_coupling_branches():
    lam0 = 833.0
    assert math.isclose(standard_coupling(lam0) * lam0, 0.5 * math.pi, rel_tol=1e-14)
    assert math.isclose(
        standard_coupling(lam0, m=3) * lam0, 3.5 * math.pi, rel_tol=1e-14
    )
    with pytest.raises(ValueError):
        standard_coupling(lam0, m=-1)
    with pytest.raises(ValueError):
        standard_coupling(0.0)


def test_sensitivity_ceiling_frozen():
    assert math.isclose(sensitivity_ceiling(833.0), CEILING_833, rel_tol=1e-14)
    with pytest.raises(ValueError):
        sensitivity_ceiling(-1.0)


def test_golden_section_finds_quadratic_peak():
    best = golden_section_max(lambda x: -((x - 2.0) ** 2), 0.0, 5.0, tol=1e-7)
    assert abs(best - 2.0) < 1e-6
    with pytest.raises(ValueError):
        golden_section_max(lambda x: x, 1.0, 1.0)


def test_angle_sweep_shapes_and_signs(iface, source, grid):
    crit = critical_angle(N1, N2)
    thetas = np.linspace(crit + math.radians(0.5), math.radians(70.0), 12)
    sweep = angle_sensitivity_sweep(iface, biased_scheme(TAU, 0.0), source, grid, thetas)
    assert sweep.theta.shape == sweep.s_phi.shape == sweep.s_ri.shape == (12,)
    assert np.all(sweep.dphi_dn < 0.0)
    assert np.all(sweep.s_ri >= 0.0)
    np.testing.assert_allclose(sweep.s_ri, sweep.s_phi * np.abs(sweep.dphi_dn))


def test_angle_sweep_rejects_subcritical(iface, source, grid):
    crit = critical_angle(N1, N2)
    with pytest.raises(ValueError):
        angle_sensitivity_sweep(
            iface, biased_scheme(TAU, 0.0), source, grid, [crit - 1e-3]
        )


def test_sensitivity_falls_with_angle(iface, source, grid):
    """Predicted s_RI ordering across 50.8 / 51.9 / 54 degrees."""
    thetas = np.radians([50.8, 51.9, 54.0])
    sweep = angle_sensitivity_sweep(iface, biased_scheme(TAU, 0.0), source, grid, thetas)
    assert sweep.s_ri[0] > sweep.s_ri[1] > sweep.s_ri[2]


def test_optimize_angle_hits_feasibility_edge(iface, source, grid):
    # |dphi/dn| grows towards the critical angle while S_phi stays ~1/tau,
    # so the optimum pins to the margin above the critical angle
    op = optimize_angle(iface, biased_scheme(TAU, 0.0), source, grid, coarse_points=40)
    crit = critical_angle(N1, N2)
    assert abs(op.theta - (crit + math.radians(0.3))) < 1e-3
    assert op.regime_ok
    assert op.s_ri_nm_per_riu > 0.0
    assert math.isclose(
        op.s_ri_nm_per_riu,
        op.s_phi_nm_per_rad * abs(op.dphi_dn_rad_per_riu),
        rel_tol=1e-12,
    )


def test_optimize_angle_respects_range(iface, source, grid):
    lo, hi = math.radians(52.0), math.radians(60.0)
    op = optimize_angle(
        iface, biased_scheme(TAU, 0.0), source, grid,
        theta_range=(lo, hi), coarse_points=30,
    )
    assert lo - 1e-9 <= op.theta <= hi + 1e-9


def test_optimize_angle_empty_range(iface, source, grid):
    with pytest.raises(ValueError, match="empty feasible"):
        optimize_angle(
            iface, biased_scheme(TAU, 0.0), source, grid,
            theta_range=(math.radians(10.0), math.radians(20.0)),
        )


def test_compare_schemes_rows(source, grid):
    # with the extinction at the source centroid the biased sensitivity
    # tracks 1/tau; elsewhere it picks up a source-dependent factor
    lam0 = grid_source_centroid(source, grid)
    taus = [5e-5, 1e-4, 2e-4, 1e-3]
    rows = compare_schemes(taus, lam0, source, grid)
    assert [r.tau for r in rows] == taus
    ceiling = sensitivity_ceiling(lam0)
    for row in rows:
        assert math.isclose(row.s_biased_nm_per_rad, 1.0 / row.tau, rel_tol=0.01)
        assert row.s_standard_nm_per_rad <= ceiling + 1e-9
        assert row.biased_exceeds == (row.s_biased_nm_per_rad > row.s_standard_nm_per_rad)
    # every coupling below pi/(2 lam0) beats the standard bound outright
    assert all(r.biased_exceeds for r in rows)


def test_compare_schemes_off_center_factor(source, grid):
    # away from the source centroid the sensitivity deficit is a fixed
    # source-geometry factor, the same for every coupling
    rows = compare_schemes([5e-5, 2e-4, 1e-3], 833.0, source, grid)
    ratios = [r.s_biased_nm_per_rad * r.tau for r in rows]
    assert ratios[0] < 0.99  # clearly off-center
    assert math.isclose(ratios[0], ratios[1], rel_tol=1e-3)
    assert math.isclose(ratios[1], ratios[2], rel_tol=1e-3)


def test_compare_schemes_boundary_coupling(source, grid):
    # at tau = pi/(2 lam0) the biased scheme degenerates into the standard
    # one: same coupling, same sensitivity
    lam0 = grid_source_centroid(source, grid)
    tau_b = standard_coupling(lam0)
    (row,) = compare_schemes([tau_b], lam0, source, grid)
    assert math.isclose(row.tau_standard, tau_b, rel_tol=1e-14)
    assert math.isclose(
        row.s_biased_nm_per_rad, row.s_standard_nm_per_rad, rel_tol=0.01
    )


def test_compare_schemes_validation(source, grid):
    with pytest.raises(ValueError):
        compare_schemes([0.0], 833.0, source, grid)
    with pytest.raises(ValueError):
        compare_schemes([1e-4], -5.0, source, grid)


def test_resolution_frozen_single_frame():
    model = AveragingModel(sigma_s_nm=5.3e-3, sigma_c_nm=0.0, s_ri_nm_per_riu=13605.0)
    assert math.isclose(resolution(model, 1), R_SINGLE_FRAME, rel_tol=1e-14)


def test_resolution_scaling_and_floor():
    model = AveragingModel(sigma_s_nm=4e-3, sigma_c_nm=1e-3, s_ri_nm_per_riu=10000.0)
    # pure 1/sqrt(N) until the floor takes over
    r1, r4 = resolution(model, 1), resolution(model, 4)
    assert r4 < r1
    floor = 1e-3 / 10000.0
    assert resolution(model, 10**9) == pytest.approx(floor, rel=1e-4)
    with pytest.raises(ValueError):
        resolution(model, 0)
    with pytest.raises(ValueError):
        resolution(model, 2.5)


@given(st.integers(1, 10**6), st.integers(1, 10**6))
def test_resolution_monotone_nonincreasing(n_a, n_b):
    model = AveragingModel(sigma_s_nm=5.3e-3, sigma_c_nm=2e-4, s_ri_nm_per_riu=13605.0)
    lo, hi = sorted((n_a, n_b))
    assert resolution(model, hi) <= resolution(model, lo) + 1e-18


def test_decomposition_exact_roundtrip():
    truth = AveragingModel(sigma_s_nm=5.3e-3, sigma_c_nm=8e-4, s_ri_nm_per_riu=13605.0)
    n = np.array([1, 2, 5, 10, 20, 50, 100, 500, 1000])
    r = np.array([resolution(truth, int(k)) for k in n])
    fit = fit_noise_decomposition(n, r, truth.s_ri_nm_per_riu)
    assert math.isclose(fit.sigma_s_nm, truth.sigma_s_nm, rel_tol=1e-10)
    assert math.isclose(fit.sigma_c_nm, truth.sigma_c_nm, rel_tol=1e-10)


def test_decomposition_negative_clamp_warns():
    # a curve that *improves faster* than 1/N forces a negative floor
    n = np.array([1.0, 2.0, 4.0])
    r = np.array([1.0, 0.4, 0.1])
    with pytest.warns(UserWarning, match="negative variance"):
        fit = fit_noise_decomposition(n, r, 1.0)
    assert fit.sigma_c_nm == 0.0


def test_decomposition_validation():
    with pytest.raises(ValueError):
        fit_noise_decomposition([1.0, 1.0], [0.1, 0.1], 1.0)
    with pytest.raises(ValueError):
        fit_noise_decomposition([1.0, 2.0], [0.1, 0.1], 0.0)
    with pytest.raises(ValueError):
        fit_noise_decomposition([0.5, 2.0], [0.1, 0.1], 1.0)


def test_averaging_model_validation():
    with pytest.raises(ValueError):
        AveragingModel(-1e-3, 0.0, 100.0)
    with pytest.raises(ValueError):
        AveragingModel(1e-3, 0.0, 0.0)
