"""Run configuration: strict TOML loading with full defaults.

Every section and key is optional — an empty file yields the default
sensing setup — but unknown sections or keys are rejected with their
full path, so typos never silently fall back to defaults.
"""

import hashlib
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Tuple

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .calibration import ScheduleLevel, StepSchedule
from .noise import ClassicalNoise, NoiseParams, PoissonVariance
from .optics import InterfaceParams, SchemeParams, Variant
from .spectral import GaussianComponent, PixelGrid, SourceSpectrum


class ConfigError(Exception):
    """The run configuration is missing, malformed, or inconsistent."""


# Default broadband SLD model: two Gaussian intensity components.
DEFAULT_SOURCE_COMPONENTS = (
    {"amplitude": 1.0, "center_nm": 821.1, "width_nm": 7.55},
    {"amplitude": 1.035, "center_nm": 845.8, "width_nm": 19.58},
)

_ENUM_KEYS = {
    "variant": {"biased": Variant.BIASED, "standard": Variant.STANDARD},
    "classical": {
        "power_law": ClassicalNoise.POWER_LAW,
        "exp_affine": ClassicalNoise.EXP_AFFINE,
    },
    "poisson_variance": {
        "mean": PoissonVariance.MEAN,
        "squared_mean": PoissonVariance.SQUARED_MEAN,
    },
}


class _Section:
    """One config table: typed key extraction with path-qualified errors."""

    def __init__(self, name, raw):
        self.name = name
        self.raw = dict(raw)

    def _path(self, key):
        return f"{self.name}.{key}" if self.name else key

    def _take(self, key, default):
        return self.raw.pop(key, default)

    def number(self, key, default, minimum=None, strict_min=None):
        """Typed number; pass default=None to make the key required."""
        val = self._take(key, default)
        if val is None:
            raise ConfigError(f"{self._path(key)}: required key is missing")
        if isinstance(val, bool) or not isinstance(val, (int, float)):
            raise ConfigError(f"{self._path(key)}: expected a number, got {val!r}")
        val = float(val)
        if minimum is not None and val < minimum:
            raise ConfigError(f"{self._path(key)}: must be >= {minimum}, got {val!r}")
        if strict_min is not None and not val > strict_min:
            raise ConfigError(f"{self._path(key)}: must be > {strict_min}, got {val!r}")
        return val

    def maybe_number(self, key, minimum=None, strict_min=None):
        """Optional number: None when the key is absent."""
        if key not in self.raw:
            return None
        return self.number(key, None, minimum=minimum, strict_min=strict_min)

    def integer(self, key, default, minimum=None):
        val = self._take(key, default)
        if isinstance(val, bool) or not isinstance(val, int):
            raise ConfigError(f"{self._path(key)}: expected an integer, got {val!r}")
        if minimum is not None and val < minimum:
            raise ConfigError(f"{self._path(key)}: must be >= {minimum}, got {val!r}")
        return val

    def boolean(self, key, default):
        val = self._take(key, default)
        if not isinstance(val, bool):
            raise ConfigError(f"{self._path(key)}: expected true/false, got {val!r}")
        return val

    def string(self, key, default):
        val = self._take(key, default)
        if not isinstance(val, str):
            raise ConfigError(f"{self._path(key)}: expected a string, got {val!r}")
        return val

    def enum(self, key, default):
        val = self.string(key, default)
        table = _ENUM_KEYS[key]
        if val not in table:
            raise ConfigError(
                f"{self._path(key)}: must be one of {sorted(table)}, got {val!r}"
            )
        return table[val]

    def number_or_auto(self, key, default):
        val = self._take(key, default)
        if val == "auto":
            return None
        if isinstance(val, bool) or not isinstance(val, (int, float)):
            raise ConfigError(
                f"{self._path(key)}: expected a number or \"auto\", got {val!r}"
            )
        return float(val)

    def number_list(self, key, default, strict_min=None):
        val = self._take(key, list(default))
        if not isinstance(val, list) or not val:
            raise ConfigError(f"{self._path(key)}: expected a non-empty array")
        out = []
        for item in val:
            if isinstance(item, bool) or not isinstance(item, (int, float)):
                raise ConfigError(
                    f"{self._path(key)}: expected numbers, got {item!r}"
                )
            if strict_min is not None and not item > strict_min:
                raise ConfigError(
                    f"{self._path(key)}: entries must be > {strict_min}, got {item!r}"
                )
            out.append(float(item))
        return out

    def integer_list(self, key, default, minimum=None):
        val = self._take(key, list(default))
        if not isinstance(val, list) or not val:
            raise ConfigError(f"{self._path(key)}: expected a non-empty array")
        out = []
        for item in val:
            if isinstance(item, bool) or not isinstance(item, int):
                raise ConfigError(
                    f"{self._path(key)}: expected integers, got {item!r}"
                )
            if minimum is not None and item < minimum:
                raise ConfigError(
                    f"{self._path(key)}: entries must be >= {minimum}, got {item!r}"
                )
            out.append(int(item))
        return out

    def tables(self, key):
        val = self._take(key, None)
        if val is None:
            return None
        if not isinstance(val, list) or not all(isinstance(t, dict) for t in val):
            raise ConfigError(f"{self._path(key)}: expected an array of tables")
        return val

    def finish(self):
        if self.raw:
            extra = sorted(self.raw)
            raise ConfigError(f"unknown key(s) in [{self.name}]: {', '.join(extra)}")


@dataclass
class OptimizeSettings:
    theta_min_deg: Optional[float]
    theta_max_deg: Optional[float]
    margin_deg: float
    coarse_points: int
    tol_rad: float


@dataclass
class ResolutionSettings:
    n_frames: List[int]
    sigma_s_nm: Optional[float]
    sigma_c_nm: float
    s_ri_nm_per_riu: Optional[float]


@dataclass
class ShiftSettings:
    sweep: str  # "phi" | "epsilon"
    half_range_rad: float
    points: int


@dataclass
class KineticsSettings:
    sigma_blank_nm: float
    molar_mass_g_mol: Optional[float]


@dataclass
class SimulateSettings:
    n_frames: int
    frame_time_s: float


@dataclass
class RunConfig:
    """Fully resolved run configuration."""

    seed: int
    out_dir: str
    threads: int
    interface: InterfaceParams
    variant: Variant
    tau: float
    epsilon: Optional[float]  # None means re-solve per operating point
    source: SourceSpectrum
    grid: PixelGrid
    noise: NoiseParams
    peak_counts: float
    saturation: Optional[float]
    settle_fraction: float
    schedule: Optional[StepSchedule]
    mc_trials: int
    mc_clamp_negative: bool
    shift: ShiftSettings
    resolution: ResolutionSettings
    optimize: OptimizeSettings
    compare_taus: List[float]
    kinetics: KineticsSettings
    simulate: SimulateSettings
    config_sha256: str
    regime_threshold: float = 0.2

    def scheme(self, epsilon):
        """Concrete SchemeParams with the given resolved bias phase."""
        if self.variant is Variant.STANDARD:
            return SchemeParams(Variant.STANDARD, self.tau, 0.0)
        return SchemeParams(Variant.BIASED, self.tau, epsilon)

    def meta(self):
        """Provenance pairs written into every output CSV."""
        return {"config_sha256": self.config_sha256, "seed": self.seed}


def _parse_source(raw_components):
    comps = []
    for i, tbl in enumerate(raw_components):
        sec = _Section(f"source.component[{i}]", tbl)
        amp = sec.number("amplitude", 1.0, strict_min=0.0)
        center = sec.number("center_nm", None, strict_min=0.0)
        width = sec.number("width_nm", None, strict_min=0.0)
        sec.finish()
        comps.append(GaussianComponent(amp, center, width))
    return SourceSpectrum(tuple(comps))


def _parse_schedule(raw_levels):
    if raw_levels is None:
        return None
    levels = []
    for i, tbl in enumerate(raw_levels):
        sec = _Section(f"calibrate.level[{i}]", tbl)
        label = sec.string("label", f"level{i}")
        start = sec.number("start_s", None)
        stop = sec.number("stop_s", None)
        conc = sec.raw.pop("concentration_g_per_L", None)
        ri = sec.raw.pop("ri", None)
        sec.finish()
        for name, val in (("concentration_g_per_L", conc), ("ri", ri)):
            if val is not None and (
                isinstance(val, bool) or not isinstance(val, (int, float))
            ):
                raise ConfigError(
                    f"calibrate.level[{i}].{name}: expected a number, got {val!r}"
                )
        try:
            levels.append(
                ScheduleLevel(
                    label=label,
                    start=start,
                    stop=stop,
                    concentration=None if conc is None else float(conc),
                    ri=None if ri is None else float(ri),
                )
            )
        except ValueError as exc:
            raise ConfigError(f"calibrate.level[{i}]: {exc}") from None
    try:
        return StepSchedule(tuple(levels))
    except ValueError as exc:
        raise ConfigError(f"calibrate.level: {exc}") from None


def load_run_config(path=None, seed_override=None, out_override=None):
    """Load and validate a TOML run configuration.

    ``path`` may be None for an all-defaults configuration.  ``seed``
    and ``out_dir`` overrides come from the CLI flags.
    """
    if path is None:
        blob = b""
    else:
        p = Path(path)
        if not p.exists():
            raise ConfigError(f"no such config file: {p}")
        blob = p.read_bytes()
    try:
        raw = tomllib.loads(blob.decode("utf-8"))
    except (tomllib.TOMLDecodeError, UnicodeDecodeError) as exc:
        raise ConfigError(f"{path}: {exc}") from None
    digest = hashlib.sha256(blob).hexdigest()[:12]

    known = {
        "run", "interface", "scheme", "source", "grid", "noise", "render",
        "calibrate", "mc", "shift", "resolution", "optimize", "compare",
        "kinetics", "simulate",
    }
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ConfigError(f"unknown section(s): {', '.join(unknown)}")
    for name in known:
        if name in raw and not isinstance(raw[name], dict):
            raise ConfigError(f"[{name}] must be a table")

    run = _Section("run", raw.get("run", {}))
    seed = run.integer("seed", 0, minimum=0)
    out_dir = run.string("out_dir", "out")
    threads = run.integer("threads", 0, minimum=0)
    run.finish()
    if seed_override is not None:
        seed = int(seed_override)
    if out_override is not None:
        out_dir = str(out_override)

    iface_sec = _Section("interface", raw.get("interface", {}))
    n1 = iface_sec.number("n1", 1.75, strict_min=0.0)
    n2 = iface_sec.number("n2", 1.3305, strict_min=0.0)
    theta_deg = iface_sec.number("theta_deg", 52.0)
    iface_sec.finish()
    try:
        iface = InterfaceParams(n1=n1, n2=n2, theta=math.radians(theta_deg))
    except ValueError as exc:
        raise ConfigError(f"interface: {exc}") from None

    scheme_sec = _Section("scheme", raw.get("scheme", {}))
    variant = scheme_sec.enum("variant", "biased")
    tau = scheme_sec.number("tau_rad_per_nm", 2e-4, strict_min=0.0)
    epsilon = scheme_sec.number_or_auto("epsilon_rad", "auto")
    scheme_sec.finish()
    if variant is Variant.STANDARD and epsilon not in (None, 0.0):
        raise ConfigError(
            "scheme.epsilon_rad: the standard scheme takes no bias phase; "
            "use 0 or \"auto\""
        )

    source_sec = _Section("source", raw.get("source", {}))
    comps = source_sec.tables("component")
    source_sec.finish()
    if comps is None:
        comps = [dict(c) for c in DEFAULT_SOURCE_COMPONENTS]
    source = _parse_source(comps)

    grid_sec = _Section("grid", raw.get("grid", {}))
    pixel_count = grid_sec.integer("pixel_count", 3648, minimum=2)
    lambda_start = grid_sec.number("lambda_start_nm", 750.0, strict_min=0.0)
    lambda_step = grid_sec.number("lambda_step_nm", 200.0 / 3647.0, strict_min=0.0)
    grid_sec.finish()
    grid = PixelGrid(pixel_count, lambda_start, lambda_step)

    noise_sec = _Section("noise", raw.get("noise", {}))
    noise = NoiseParams(
        dark_mean=noise_sec.number("dark_mean", 1040.0, minimum=0.0),
        dark_sigma=noise_sec.number("dark_sigma", 4.5, minimum=0.0),
        classical_a=noise_sec.number("classical_a", 0.46),
        classical_b=noise_sec.number("classical_b", -1.58),
        classical=noise_sec.enum("classical", "power_law"),
        poisson_variance=noise_sec.enum("poisson_variance", "mean"),
        rng_seed=seed,
        poisson_enabled=noise_sec.boolean("poisson_enabled", True),
        classical_enabled=noise_sec.boolean("classical_enabled", True),
    )
    noise_sec.finish()

    render_sec = _Section("render", raw.get("render", {}))
    peak_counts = render_sec.number("peak_counts", 12000.0, strict_min=0.0)
    saturation = render_sec.maybe_number("saturation", strict_min=0.0)
    render_sec.finish()

    cal_sec = _Section("calibrate", raw.get("calibrate", {}))
    settle = cal_sec.number("settle_fraction", 0.1, minimum=0.0)
    raw_levels = cal_sec.tables("level")
    cal_sec.finish()
    if settle >= 1.0:
        raise ConfigError(f"calibrate.settle_fraction: must be < 1, got {settle!r}")
    schedule = _parse_schedule(raw_levels)

    mc_sec = _Section("mc", raw.get("mc", {}))
    mc_trials = mc_sec.integer("trials", 10000, minimum=100)
    mc_clamp = mc_sec.boolean("clamp_negative", False)
    mc_sec.finish()

    shift_sec = _Section("shift", raw.get("shift", {}))
    sweep_kind = shift_sec.string("sweep", "phi")
    if sweep_kind not in ("phi", "epsilon"):
        raise ConfigError(
            f"shift.sweep: must be \"phi\" or \"epsilon\", got {sweep_kind!r}"
        )
    shift_cfg = ShiftSettings(
        sweep=sweep_kind,
        half_range_rad=shift_sec.number("half_range_rad", 0.02, strict_min=0.0),
        points=shift_sec.integer("points", 201, minimum=3),
    )
    shift_sec.finish()

    res_sec = _Section("resolution", raw.get("resolution", {}))
    res_cfg = ResolutionSettings(
        n_frames=res_sec.integer_list(
            "n_frames", [1, 2, 5, 10, 20, 50, 100, 200, 500, 1000], minimum=1
        ),
        sigma_s_nm=res_sec.maybe_number("sigma_s_nm", minimum=0.0),
        sigma_c_nm=res_sec.number("sigma_c_nm", 0.0, minimum=0.0),
        s_ri_nm_per_riu=res_sec.maybe_number("s_ri_nm_per_riu", strict_min=0.0),
    )
    res_sec.finish()

    opt_sec = _Section("optimize", raw.get("optimize", {}))
    opt_cfg = OptimizeSettings(
        theta_min_deg=opt_sec.maybe_number("theta_min_deg"),
        theta_max_deg=opt_sec.maybe_number("theta_max_deg"),
        margin_deg=opt_sec.number("margin_deg", 0.3, strict_min=0.0),
        coarse_points=opt_sec.integer("coarse_points", 200, minimum=3),
        tol_rad=opt_sec.number("tol_rad", 1e-5, strict_min=0.0),
    )
    opt_sec.finish()
    if (opt_cfg.theta_min_deg is None) != (opt_cfg.theta_max_deg is None):
        raise ConfigError("optimize: give both theta_min_deg and theta_max_deg or neither")

    cmp_sec = _Section("compare", raw.get("compare", {}))
    compare_taus = cmp_sec.number_list(
        "tau_rad_per_nm", [5e-5, 1e-4, 2e-4, 5e-4, 1e-3], strict_min=0.0
    )
    cmp_sec.finish()

    kin_sec = _Section("kinetics", raw.get("kinetics", {}))
    kin_cfg = KineticsSettings(
        sigma_blank_nm=kin_sec.number("sigma_blank_nm", 5.3e-3, minimum=0.0),
        molar_mass_g_mol=kin_sec.maybe_number("molar_mass_g_mol", strict_min=0.0),
    )
    kin_sec.finish()

    sim_sec = _Section("simulate", raw.get("simulate", {}))
    sim_cfg = SimulateSettings(
        n_frames=sim_sec.integer("n_frames", 1, minimum=1),
        frame_time_s=sim_sec.number("frame_time_s", 1.0, strict_min=0.0),
    )
    sim_sec.finish()

    return RunConfig(
        seed=seed,
        out_dir=out_dir,
        threads=threads,
        interface=iface,
        variant=variant,
        tau=tau,
        epsilon=epsilon,
        source=source,
        grid=grid,
        noise=noise,
        peak_counts=peak_counts,
        saturation=saturation,
        settle_fraction=settle,
        schedule=schedule,
        mc_trials=mc_trials,
        mc_clamp_negative=mc_clamp,
        shift=shift_cfg,
        resolution=res_cfg,
        optimize=opt_cfg,
        compare_taus=compare_taus,
        kinetics=kin_cfg,
        simulate=sim_cfg,
        config_sha256=digest,
    )
