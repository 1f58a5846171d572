"""Command-line front end.

Subcommands: shift, calibrate, noise, resolution, optimize, kinetics,
compare, simulate.  Every command loads one TOML run configuration,
writes plot-ready CSV files under the output directory and prints a
short text report.  Outputs are deterministic for a fixed seed and
config (byte-identical files across runs).

Exit codes: 0 success, 2 configuration error, 3 data error,
4 numerical failure.
"""

import argparse
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from ._kernels import backend_name
from .calibration import fit_sensitivity, phase_sensitivity, segment_levels
from .config import ConfigError, load_run_config
from .design import (
    angle_sensitivity_sweep,
    bias_for_inverse_regime,
    AveragingModel,
    compare_schemes,
    fit_noise_decomposition,
    optimize_angle,
    resolution as resolution_at,
    sensitivity_ceiling,
)
from .io import (
    DataError,
    read_binding_points,
    read_resolution_points,
    read_sensorgram,
    write_frame,
    write_table,
)
from .kinetics import (
    fit_langmuir,
    langmuir_equilibrium,
    limit_of_detection,
    molar_association_constant,
)
from .noise import (
    NoiseParams,
    PoissonVariance,
    analytic_centroid_sigma,
    monte_carlo_centroid_sigma,
    simulate_frame,
    subtract_dark,
)
from .optics import (
    SchemeParams,
    Variant,
    dphase_dn,
    inverse_regime_ratio,
    tir_phase,
)
from .spectral import CentroidModel, grid_source_centroid, render_ideal_frame


def _operating_point(cfg):
    """Resolve (scheme, phi, lambda0) for the configured setup.

    A missing bias phase ("auto") is solved so the post-selection zero
    sits at the source centroid on the grid.
    """
    phi = tir_phase(cfg.interface)
    lam0 = grid_source_centroid(cfg.source, cfg.grid)
    if cfg.variant is Variant.BIASED:
        eps = cfg.epsilon
        if eps is None:
            eps = bias_for_inverse_regime(cfg.tau, lam0, phi)
        scheme = SchemeParams(Variant.BIASED, cfg.tau, eps)
    else:
        scheme = SchemeParams(Variant.STANDARD, cfg.tau, 0.0)
    return scheme, phi, lam0


def _out_path(cfg, name):
    return Path(cfg.out_dir) / name


def cmd_shift(cfg, args):
    scheme, phi0, lam0 = _operating_point(cfg)
    settings = cfg.shift
    sweep = getattr(args, "sweep", None) or settings.sweep
    points = getattr(args, "points", None) or settings.points
    half = getattr(args, "half_range", None) or settings.half_range_rad
    if sweep == "epsilon" and scheme.variant is Variant.STANDARD:
        raise ConfigError("shift.sweep: epsilon sweep requires the biased scheme")

    model = CentroidModel(scheme, cfg.source, cfg.grid)
    ref = model.centroid(phi0)
    sigma = cfg.source.effective_sigma()
    rows = []
    if sweep == "phi":
        values = np.linspace(phi0 - half, phi0 + half, points)
        for v in values:
            shift = model.centroid(float(v)) - ref
            ratio = inverse_regime_ratio(scheme, float(v), lam0, sigma)
            rows.append((v, shift, ratio < cfg.regime_threshold))
    else:
        values = np.linspace(scheme.epsilon - half, scheme.epsilon + half, points)
        for v in values:
            shift = model.centroid(phi0, epsilon=float(v)) - ref
            probe = replace(scheme, epsilon=float(v))
            ratio = inverse_regime_ratio(probe, phi0, lam0, sigma)
            rows.append((v, shift, ratio < cfg.regime_threshold))

    out = _out_path(cfg, "shift_sweep.csv")
    write_table(out, ["sweep_value_rad", "shift_nm", "regime_ok"], rows, cfg.meta())
    slope = phase_sensitivity(scheme, phi0, cfg.source, cfg.grid)
    print(
        f"operating point: theta={math.degrees(cfg.interface.theta):.4f} deg, "
        f"phi={phi0:.6f} rad, epsilon={scheme.epsilon:.6f} rad, "
        f"lambda0={lam0:.4f} nm"
    )
    print(f"phase sensitivity S_phi = {slope:.1f} nm/rad ({sweep} sweep)")
    print(f"wrote {out} ({len(rows)} rows)")


def cmd_calibrate(cfg, args):
    if cfg.schedule is None:
        raise ConfigError("calibrate: config has no [[calibrate.level]] schedule")
    sg = read_sensorgram(args.data)
    stats = segment_levels(sg, cfg.schedule, cfg.settle_fraction)
    fit = fit_sensitivity(
        [s.ri for s in stats], [s.mean_shift_nm for s in stats]
    )

    levels_out = _out_path(cfg, "calibration_levels.csv")
    write_table(
        levels_out,
        ["label", "ri", "mean_shift_nm", "std_shift_nm", "n_samples"],
        [(s.label, s.ri, s.mean_shift_nm, s.std_shift_nm, s.n_samples) for s in stats],
        cfg.meta(),
    )

    # model-side prediction at the configured operating point, reported
    # alongside the regression (they need not agree; see README)
    scheme, phi0, _ = _operating_point(cfg)
    s_phi = phase_sensitivity(scheme, phi0, cfg.source, cfg.grid)
    chain = s_phi * abs(dphase_dn(cfg.interface))

    report_out = _out_path(cfg, "calibration_report.csv")
    write_table(
        report_out,
        [
            "s_ri_nm_per_riu",
            "intercept_nm",
            "r_squared",
            "slope_stderr_nm_per_riu",
            "predicted_s_ri_nm_per_riu",
        ],
        [
            (
                fit.sensitivity_nm_per_riu,
                fit.shift_intercept_nm,
                fit.r_squared,
                fit.slope_stderr,
                chain,
            )
        ],
        cfg.meta(),
    )
    print(f"levels: {len(stats)}; fitted s_RI = {fit.sensitivity_nm_per_riu:.1f} nm/RIU")
    print(f"R^2 = {fit.r_squared:.6f}, slope stderr = {fit.slope_stderr:.3g} nm/RIU")
    print(f"model-chain prediction at configured angle: {chain:.1f} nm/RIU")
    print(f"wrote {levels_out}")
    print(f"wrote {report_out}")


def cmd_noise(cfg, args):
    scheme, phi0, _ = _operating_point(cfg)
    ideal = render_ideal_frame(
        scheme, phi0, cfg.source, cfg.grid, cfg.peak_counts, cfg.saturation
    )
    mc = monte_carlo_centroid_sigma(
        ideal, cfg.grid, cfg.noise, cfg.mc_trials, cfg.mc_clamp_negative
    )
    rows = []
    for mode in (PoissonVariance.MEAN, PoissonVariance.SQUARED_MEAN):
        params = replace(cfg.noise, poisson_variance=mode)
        sigma = analytic_centroid_sigma(ideal, cfg.grid, params)
        ratio = mc.sigma_nm / sigma if sigma > 0.0 else math.inf
        rows.append((mode.value, sigma, mc.sigma_nm, mc.standard_error, ratio))

    out = _out_path(cfg, "noise_report.csv")
    write_table(
        out,
        [
            "poisson_variance",
            "sigma_analytic_nm",
            "sigma_mc_nm",
            "mc_standard_error_nm",
            "ratio_mc_over_analytic",
        ],
        rows,
        cfg.meta(),
    )
    for mode, sigma, mc_sigma, se, ratio in rows:
        print(
            f"{mode}: analytic sigma_s = {sigma:.6g} nm, "
            f"MC = {mc_sigma:.6g} +/- {se:.2g} nm (ratio {ratio:.4f})"
        )
    print(f"wrote {out} ({mc.trials} trials)")


def cmd_resolution(cfg, args):
    settings = cfg.resolution
    if settings.s_ri_nm_per_riu is None:
        raise ConfigError("resolution.s_ri_nm_per_riu is required for this command")
    s_ri = settings.s_ri_nm_per_riu
    if args.data is not None:
        n_vals, r_vals = read_resolution_points(args.data)
        model = fit_noise_decomposition(n_vals, r_vals, s_ri)
    else:
        if settings.sigma_s_nm is None:
            raise ConfigError(
                "resolution.sigma_s_nm is required when no --data file is given"
            )
        model = AveragingModel(settings.sigma_s_nm, settings.sigma_c_nm, s_ri)
        n_vals = np.array(sorted(set(settings.n_frames)), dtype=np.float64)
        r_vals = np.array([resolution_at(model, int(n)) for n in n_vals])

    rows = [
        (int(n), r, resolution_at(model, int(n)))
        for n, r in zip(n_vals, r_vals)
    ]
    out = _out_path(cfg, "resolution_curve.csv")
    write_table(out, ["N", "r_RIU", "r_fit_RIU"], rows, cfg.meta())
    floor = model.sigma_c_nm / model.s_ri_nm_per_riu
    print(
        f"decomposition: sigma_s = {model.sigma_s_nm:.6g} nm, "
        f"sigma_c = {model.sigma_c_nm:.6g} nm"
    )
    print(f"r(1) = {resolution_at(model, 1):.4g} RIU, floor = {floor:.4g} RIU")
    print(f"wrote {out} ({len(rows)} rows)")


def cmd_optimize(cfg, args):
    scheme, _, lam0 = _operating_point(cfg)
    settings = cfg.optimize
    theta_range = None
    if settings.theta_min_deg is not None:
        theta_range = (
            math.radians(settings.theta_min_deg),
            math.radians(settings.theta_max_deg),
        )
    margin = math.radians(settings.margin_deg)
    best = optimize_angle(
        cfg.interface,
        scheme,
        cfg.source,
        cfg.grid,
        theta_range=theta_range,
        margin=margin,
        coarse_points=settings.coarse_points,
        tol=settings.tol_rad,
        lambda0=lam0,
        regime_threshold=cfg.regime_threshold,
    )

    from .optics import critical_angle

    lo = critical_angle(cfg.interface.n1, cfg.interface.n2) + margin
    hi = math.pi / 2 - 1e-6
    if theta_range is not None:
        lo, hi = max(lo, theta_range[0]), min(hi, theta_range[1])
    thetas = np.linspace(lo, hi, settings.coarse_points)
    sweep = angle_sensitivity_sweep(
        cfg.interface, scheme, cfg.source, cfg.grid, thetas, lambda0=lam0
    )
    sigma = cfg.source.effective_sigma()
    rows = []
    for th, s_phi, dpdn, s_ri in zip(sweep.theta, sweep.s_phi, sweep.dphi_dn, sweep.s_ri):
        iface = replace(cfg.interface, theta=float(th))
        phi = tir_phase(iface)
        if scheme.variant is Variant.BIASED:
            probe = replace(scheme, epsilon=bias_for_inverse_regime(scheme.tau, lam0, phi))
        else:
            probe = scheme
        ratio = inverse_regime_ratio(probe, phi, lam0, sigma)
        rows.append(
            (math.degrees(th), s_phi, dpdn, s_ri, ratio < cfg.regime_threshold)
        )

    sweep_out = _out_path(cfg, "angle_sweep.csv")
    write_table(
        sweep_out,
        [
            "theta_deg",
            "S_phi_nm_per_rad",
            "dphi_dn_rad_per_RIU",
            "s_RI_nm_per_RIU",
            "regime_ok",
        ],
        rows,
        cfg.meta(),
    )
    point_out = _out_path(cfg, "operating_point.csv")
    write_table(
        point_out,
        [
            "theta_deg",
            "tau_rad_per_nm",
            "epsilon_rad",
            "S_phi_nm_per_rad",
            "dphi_dn_rad_per_RIU",
            "s_RI_nm_per_RIU",
            "regime_ok",
        ],
        [
            (
                math.degrees(best.theta),
                best.tau,
                best.epsilon,
                best.s_phi_nm_per_rad,
                best.dphi_dn_rad_per_riu,
                best.s_ri_nm_per_riu,
                best.regime_ok,
            )
        ],
        cfg.meta(),
    )
    print(
        f"best angle: {math.degrees(best.theta):.4f} deg, "
        f"s_RI = {best.s_ri_nm_per_riu:.1f} nm/RIU "
        f"(S_phi = {best.s_phi_nm_per_rad:.1f} nm/rad, "
        f"dphi/dn = {best.dphi_dn_rad_per_riu:.3f} rad/RIU)"
    )
    print(f"wrote {sweep_out} ({len(rows)} rows)")
    print(f"wrote {point_out}")


def cmd_kinetics(cfg, args):
    pts = read_binding_points(args.data)
    fit = fit_langmuir(pts)
    sigma_blank = cfg.kinetics.sigma_blank_nm
    lod = limit_of_detection(fit, sigma_blank)
    at_lod = langmuir_equilibrium(lod, fit.r_max, fit.k_a)

    fit_rows = [
        (
            p.concentration,
            p.response,
            langmuir_equilibrium(p.concentration, fit.r_max, fit.k_a),
        )
        for p in pts
    ]
    fit_out = _out_path(cfg, "kinetics_fit.csv")
    write_table(
        fit_out,
        ["concentration_g_per_mL", "response_nm", "fitted_response_nm"],
        fit_rows,
        cfg.meta(),
    )

    header = [
        "r_max_nm",
        "r_max_stderr_nm",
        "k_a_per_g_mL",
        "k_a_stderr_per_g_mL",
        "residual_rms_nm",
        "converged",
        "sigma_blank_nm",
        "lod_g_per_mL",
        "response_at_lod_nm",
    ]
    row = [
        fit.r_max,
        fit.r_max_stderr,
        fit.k_a,
        fit.k_a_stderr,
        fit.residual_rms,
        fit.converged,
        sigma_blank,
        lod,
        at_lod,
    ]
    if cfg.kinetics.molar_mass_g_mol is not None:
        header.append("k_a_per_molar")
        row.append(
            molar_association_constant(fit.k_a, cfg.kinetics.molar_mass_g_mol)
        )
    report_out = _out_path(cfg, "kinetics_report.csv")
    write_table(report_out, header, [row], cfg.meta())

    print(
        f"Langmuir fit: r_max = {fit.r_max:.4g} nm (+/- {fit.r_max_stderr:.2g}), "
        f"k_a = {fit.k_a:.6g} (g/mL)^-1 (+/- {fit.k_a_stderr:.2g})"
    )
    print(
        f"residual rms = {fit.residual_rms:.3g} nm, converged = {fit.converged}"
    )
    print(
        f"LOD at sigma_blank = {sigma_blank:g} nm: {lod:.4g} g/mL "
        f"(response there = {at_lod:.6g} nm = 3*sigma)"
    )
    print(f"wrote {fit_out}")
    print(f"wrote {report_out}")


def cmd_compare(cfg, args):
    scheme, phi0, lam0 = _operating_point(cfg)
    rows = compare_schemes(cfg.compare_taus, lam0, cfg.source, cfg.grid, phi=phi0)
    ceiling = sensitivity_ceiling(lam0)
    out = _out_path(cfg, "scheme_compare.csv")
    write_table(
        out,
        [
            "tau_rad_per_nm",
            "S_biased_nm_per_rad",
            "tau_standard_rad_per_nm",
            "S_standard_nm_per_rad",
            "biased_exceeds",
            "ceiling_nm_per_rad",
        ],
        [
            (
                r.tau,
                r.s_biased_nm_per_rad,
                r.tau_standard,
                r.s_standard_nm_per_rad,
                r.biased_exceeds,
                ceiling,
            )
            for r in rows
        ],
        cfg.meta(),
    )
    print(f"standard-scheme ceiling 2*lambda0/pi = {ceiling:.1f} nm/rad at lambda0 = {lam0:.1f} nm")
    print(f"wrote {out} ({len(rows)} rows)")


def cmd_simulate(cfg, args):
    scheme, phi0, _ = _operating_point(cfg)
    ideal = render_ideal_frame(
        scheme, phi0, cfg.source, cfg.grid, cfg.peak_counts, cfg.saturation
    )
    n = getattr(args, "frames", None) or cfg.simulate.n_frames
    rng = np.random.default_rng(cfg.noise.rng_seed)

    ideal_out = _out_path(cfg, "frame_ideal.csv")
    write_frame(ideal_out, ideal, cfg.grid, cfg.meta())
    if n == 1:
        noisy = subtract_dark(simulate_frame(ideal, cfg.noise, rng), cfg.noise)
        frame_out = _out_path(cfg, "frame.csv")
        write_frame(frame_out, noisy, cfg.grid, cfg.meta())
        print(f"wrote {ideal_out}")
        print(f"wrote {frame_out}")
        return
    header = ["time_s"] + [f"px{i}" for i in range(cfg.grid.pixel_count)]
    rows = []
    for k in range(n):
        noisy = subtract_dark(simulate_frame(ideal, cfg.noise, rng), cfg.noise)
        rows.append([k * cfg.simulate.frame_time_s, *noisy.counts])
    stack_out = _out_path(cfg, "frames.csv")
    write_table(stack_out, header, rows, cfg.meta())
    print(f"wrote {ideal_out}")
    print(f"wrote {stack_out} ({n} frames)")


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--config", default=argparse.SUPPRESS, help="TOML run configuration file"
    )
    common.add_argument(
        "--seed", type=int, default=argparse.SUPPRESS, help="override run.seed"
    )
    common.add_argument(
        "--out", default=argparse.SUPPRESS, help="override run.out_dir"
    )

    parser = argparse.ArgumentParser(
        prog="wmsense",
        description="Weak-measurement RI sensor simulation and design toolkit",
        parents=[common],
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__} ({backend_name()} kernels)"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("shift", parents=[common], help="centroid shift vs phase/bias sweep")
    p.add_argument("--sweep", choices=["phi", "epsilon"], help="sweep variable")
    p.add_argument("--points", type=int, help="number of sweep points")
    p.add_argument("--half-range", type=float, dest="half_range", help="sweep half-width, rad")
    p.set_defaults(func=cmd_shift)

    p = sub.add_parser("calibrate", parents=[common], help="sensitivity from a staircase sensorgram")
    p.add_argument("--data", required=True, help="sensorgram CSV (time_s,shift_nm)")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("noise", parents=[common], help="centroid noise: analytic vs Monte Carlo")
    p.set_defaults(func=cmd_noise)

    p = sub.add_parser("resolution", parents=[common], help="resolution vs averaging depth")
    p.add_argument("--data", help="measured N,r_RIU CSV; omit to synthesise from config")
    p.set_defaults(func=cmd_resolution)

    p = sub.add_parser("optimize", parents=[common], help="best incidence angle")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("kinetics", parents=[common], help="Langmuir fit and detection limit")
    p.add_argument("--data", required=True, help="binding CSV (concentration_g_per_mL,response_nm)")
    p.set_defaults(func=cmd_kinetics)

    p = sub.add_parser("compare", parents=[common], help="biased vs standard sensitivity")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("simulate", parents=[common], help="synthesise noisy frames to file")
    p.add_argument("--frames", type=int, help="number of frames (default from config)")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_run_config(
            getattr(args, "config", None),
            seed_override=getattr(args, "seed", None),
            out_override=getattr(args, "out", None),
        )
        args.func(cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except (ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
