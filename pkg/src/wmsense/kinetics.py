"""Equilibrium binding analysis for biosensing runs.

Langmuir adsorption links the equilibrium shift to analyte
concentration:

    R(C) = r_max * k_a * C / (1 + k_a * C)

``fit_langmuir`` estimates (r_max, k_a) from titration end points, with
a double-reciprocal initial guess refined by damped Gauss-Newton.
"""

import math
from dataclasses import dataclass
from typing import Dict, Mapping, NamedTuple, Optional, Sequence, Tuple

import numpy as np

_MAX_ITER = 200
_REL_TOL = 1e-8


@dataclass(frozen=True)
class BindingPoint:
    """Equilibrium response at one analyte concentration.

    Concentration in g/mL, response in nm.
    """

    concentration: float
    response: float

    def __post_init__(self):
        if self.concentration < 0.0:
            raise ValueError(
                f"concentration must be non-negative, got {self.concentration!r}"
            )


@dataclass(frozen=True)
class LangmuirFit:
    """Fitted Langmuir isotherm parameters.

    ``k_a`` is the association constant in (g/mL)^-1 when concentrations
    are in g/mL.  Standard errors come from the final Gauss-Newton
    linearisation; NaN when there are no residual degrees of freedom.
    """

    r_max: float
    k_a: float
    residual_rms: float
    converged: bool
    r_max_stderr: float = math.nan
    k_a_stderr: float = math.nan


def langmuir_equilibrium(concentration, r_max, k_a):
    """Equilibrium shift at the given concentration(s)."""
    c = np.asarray(concentration, dtype=np.float64)
    out = r_max * k_a * c / (1.0 + k_a * c)
    return float(out) if out.ndim == 0 else out


def _initial_guess(c, r):
    """Double-reciprocal (Lineweaver-Burk style) starting point.

    1/R = (1/(r_max k_a)) * (1/C) + 1/r_max on points with C>0, R>0.
    """
    mask = (c > 0.0) & (r > 0.0)
    if np.count_nonzero(mask) < 2:
        raise ValueError("need at least two points with positive C and response")
    x = 1.0 / c[mask]
    y = 1.0 / r[mask]
    slope, icept = np.polyfit(x, y, 1)
    if icept > 0.0 and slope > 0.0:
        r_max = 1.0 / icept
        k_a = icept / slope
        if r_max > 0.0 and k_a > 0.0:
            return r_max, k_a
    # fall back to a crude saturation guess
    r_top = float(np.max(r[mask]))
    c_mid = float(np.median(c[mask]))
    return 1.5 * r_top, 1.0 / c_mid


def fit_langmuir(points):
    """Least-squares Langmuir fit of equilibrium titration points.

    Requires at least three points spanning two distinct positive
    concentrations, with some curvature in the responses.  Returns a
    ``LangmuirFit``; ``converged`` is False when the damped Gauss-Newton
    refinement hits the iteration cap without meeting the relative
    tolerance (the best iterate is still returned).
    """
    pts = list(points)
    if len(pts) < 3:
        raise ValueError(f"need at least 3 binding points, got {len(pts)}")
    c = np.array([p.concentration for p in pts], dtype=np.float64)
    r = np.array([p.response for p in pts], dtype=np.float64)
    if np.unique(c[c > 0.0]).size < 2:
        raise ValueError("need at least two distinct positive concentrations")
    if float(np.ptp(r)) == 0.0:
        raise ValueError("responses are all equal; isotherm parameters not identifiable")

    r_max, k_a = _initial_guess(c, r)
    converged = False
    for _ in range(_MAX_ITER):
        kc = k_a * c
        denom = 1.0 + kc
        model = r_max * kc / denom
        resid = r - model
        # Jacobian of the model w.r.t. (r_max, k_a)
        j_r = kc / denom
        j_k = r_max * c / (denom * denom)
        jac = np.column_stack([j_r, j_k])
        jtj = jac.T @ jac
        jtr = jac.T @ resid
        lam = 1e-10 * float(np.trace(jtj))
        step_ok = False
        sse = float(np.dot(resid, resid))
        for _ in range(25):
            try:
                delta = np.linalg.solve(jtj + lam * np.eye(2), jtr)
            except np.linalg.LinAlgError:
                lam = max(lam * 10.0, 1e-12)
                continue
            r_new = r_max + delta[0]
            k_new = k_a + delta[1]
            if r_new > 0.0 and k_new > 0.0:
                model_new = langmuir_equilibrium(c, r_new, k_new)
                sse_new = float(np.sum((r - model_new) ** 2))
                if sse_new <= sse * (1.0 + 1e-12):
                    step_ok = True
                    break
            lam = max(lam * 10.0, 1e-12)
        if not step_ok:
            break
        rel = max(
            abs(r_new - r_max) / max(abs(r_max), 1e-300),
            abs(k_new - k_a) / max(abs(k_a), 1e-300),
        )
        r_max, k_a = float(r_new), float(k_new)
        if rel < _REL_TOL:
            converged = True
            break

    resid = r - langmuir_equilibrium(c, r_max, k_a)
    sse = float(np.dot(resid, resid))
    rms = math.sqrt(sse / len(pts))
    dof = len(pts) - 2
    r_err = k_err = math.nan
    if dof > 0:
        kc = k_a * c
        denom = 1.0 + kc
        jac = np.column_stack([kc / denom, r_max * c / (denom * denom)])
        try:
            cov = np.linalg.inv(jac.T @ jac) * (sse / dof)
            if cov[0, 0] >= 0.0 and cov[1, 1] >= 0.0:
                r_err = math.sqrt(cov[0, 0])
                k_err = math.sqrt(cov[1, 1])
        except np.linalg.LinAlgError:
            pass
    return LangmuirFit(
        r_max=r_max,
        k_a=k_a,
        residual_rms=rms,
        converged=converged,
        r_max_stderr=r_err,
        k_a_stderr=k_err,
    )


def limit_of_detection(fit, sigma_blank):
    """Concentration whose expected response equals 3x the blank noise.

    Solves R(C) = 3*sigma_blank for C:
        C = 3*sigma / (k_a * (r_max - 3*sigma)).
    """
    if not fit.converged:
        raise ValueError("refusing to derive a detection limit from an unconverged fit")
    if sigma_blank < 0.0:
        raise ValueError(f"sigma_blank must be >= 0, got {sigma_blank!r}")
    floor = 3.0 * sigma_blank
    if floor >= fit.r_max:
        raise ValueError(
            f"3*sigma_blank={floor!r} reaches the saturation response r_max={fit.r_max!r}"
        )
    return floor / (fit.k_a * (fit.r_max - floor))


def molar_association_constant(k_a_per_g_ml, molar_mass_g_mol):
    """Convert k_a from (g/mL)^-1 to M^-1 for a given molar mass."""
    if not molar_mass_g_mol > 0.0:
        raise ValueError(f"molar mass must be positive, got {molar_mass_g_mol!r}")
    return k_a_per_g_ml * molar_mass_g_mol / 1000.0


class SpecificityRow(NamedTuple):
    label: str
    mean_shift_nm: float
    n_samples: int


class SpecificityReport(NamedTuple):
    rows: Tuple[SpecificityRow, ...]
    ratio: float
    ratio_finite: bool


def specificity_report(sensorgrams, window, required=("specific", "nonspecific")):
    """End-window mean shifts per labeled run, plus specific/nonspecific ratio.

    ``sensorgrams`` maps labels to shift series; ``window`` is the
    (start, stop) time interval over which end points are averaged.
    Labels listed in ``required`` must be present; the ratio divides the
    first required label's mean by the second's and is flagged
    non-finite when the denominator is zero.
    """
    start, stop = window
    if not stop > start:
        raise ValueError(f"window stop must exceed start ({start!r} .. {stop!r})")
    for lab in required:
        if lab not in sensorgrams:
            raise ValueError(f"missing required sensorgram label {lab!r}")
    rows = []
    means: Dict[str, float] = {}
    for label, sg in sensorgrams.items():
        mask = (sg.times >= start) & (sg.times <= stop)
        if not np.any(mask):
            raise ValueError(f"run {label!r} has no samples in the end window")
        mean = float(np.mean(sg.shifts[mask]))
        means[label] = mean
        rows.append(SpecificityRow(label, mean, int(np.count_nonzero(mask))))
    num = means[required[0]]
    den = means[required[1]]
    if den == 0.0:
        return SpecificityReport(tuple(rows), math.inf, False)
    return SpecificityReport(tuple(rows), num / den, True)


def pseudo_first_order_series(times, concentration, r_max, k_a, k_off):
    """Idealised association transient R(t) for demos and synthetic tests.

    Pseudo-first-order kinetics dR/dt = k_on*C*(r_max - R) - k_off*R
    relaxes exponentially to the Langmuir equilibrium with observed rate
    k_obs = k_off * (1 + k_a*C), where k_a = k_on/k_off:

        R(t) = R_eq * (1 - exp(-k_obs * t))
    """
    if not k_off > 0.0:
        raise ValueError(f"k_off must be positive, got {k_off!r}")
    t = np.asarray(times, dtype=np.float64)
    if np.any(t < 0.0):
        raise ValueError("times must be non-negative")
    r_eq = langmuir_equilibrium(concentration, r_max, k_a)
    k_obs = k_off * (1.0 + k_a * concentration)
    return r_eq * (1.0 - np.exp(-k_obs * t))
