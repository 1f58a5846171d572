"""wmsense: weak-measurement refractive-index sensor simulation toolkit.

Simulates the spectral read-out of a total-internal-reflection RI
sensor interrogated by biased or standard weak measurement, propagates
detector noise to the centroid read-out, and optimises operating points
(bias phase, incidence angle, coupling strength).  Includes sensorgram
calibration, averaging/resolution analysis and Langmuir binding fits.
"""

from ._kernels import backend_name
from .calibration import (
    CalibrationModel,
    ScheduleLevel,
    StepSchedule,
    fit_sensitivity,
    nacl_ri,
    phase_sensitivity,
    segment_levels,
)
from .design import (
    AveragingModel,
    OperatingPoint,
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
from .kinetics import (
    BindingPoint,
    LangmuirFit,
    fit_langmuir,
    langmuir_equilibrium,
    limit_of_detection,
    molar_association_constant,
    specificity_report,
)
from .noise import (
    ClassicalNoise,
    NoiseParams,
    PoissonVariance,
    analytic_centroid_sigma,
    classical_sigma,
    monte_carlo_centroid_sigma,
    simulate_frame,
    subtract_dark,
)
from .optics import (
    InterfaceParams,
    SchemeParams,
    Variant,
    analytic_shift,
    critical_angle,
    dphase_dn,
    postselected_density,
    tir_phase,
)
from .spectral import (
    Baseline,
    CentroidModel,
    GaussianComponent,
    PixelGrid,
    Sensorgram,
    SourceSpectrum,
    SpectrumFrame,
    centroid,
    grid_source_centroid,
    render_ideal_frame,
    shift_series,
)

__version__ = "0.1.0"

__all__ = [
    "backend_name",
    "CalibrationModel",
    "ScheduleLevel",
    "StepSchedule",
    "fit_sensitivity",
    "nacl_ri",
    "phase_sensitivity",
    "segment_levels",
    "AveragingModel",
    "OperatingPoint",
    "angle_sensitivity_sweep",
    "bias_for_inverse_regime",
    "compare_schemes",
    "fit_noise_decomposition",
    "golden_section_max",
    "optimize_angle",
    "resolution",
    "sensitivity_ceiling",
    "standard_coupling",
    "BindingPoint",
    "LangmuirFit",
    "fit_langmuir",
    "langmuir_equilibrium",
    "limit_of_detection",
    "molar_association_constant",
    "specificity_report",
    "ClassicalNoise",
    "NoiseParams",
    "PoissonVariance",
    "analytic_centroid_sigma",
    "classical_sigma",
    "monte_carlo_centroid_sigma",
    "simulate_frame",
    "subtract_dark",
    "InterfaceParams",
    "SchemeParams",
    "Variant",
    "analytic_shift",
    "critical_angle",
    "dphase_dn",
    "postselected_density",
    "tir_phase",
    "Baseline",
    "CentroidModel",
    "GaussianComponent",
    "PixelGrid",
    "Sensorgram",
    "SourceSpectrum",
    "SpectrumFrame",
    "centroid",
    "grid_source_centroid",
    "render_ideal_frame",
    "shift_series",
    "__version__",
]
