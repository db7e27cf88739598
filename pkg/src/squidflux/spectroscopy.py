"""Spin-echo dephasing math and the measurement-extraction pipeline.

A flux-tunable qubit with spectrum h f(Phi) = sqrt(Delta^2 + eps(Phi)^2)
dephases under 1/f flux noise of power amplitude A.  The echo sequence
filters the noise with g_E(omega, t) = (sin^2(omega t/4) / (omega t/4))^2,
whose logarithmic integral is ln 2, so the echo envelope is Gaussian
with pure dephasing rate

    Gamma_phi = sqrt(A ln2) |d omega / d Phi|.

The extraction pipeline mirrors the experiment: fit the spectrum
hyperbola, fit every echo trace to exp(-Gamma_exp t - (Gamma_phi t)^2),
then fit Gamma_phi against the spectrum slope on each side of the sweet
spot with a forced zero intercept, and combine the two branches by
their inverse variances.  A seeded generator produces synthetic
datasets for round-trip validation since raw traces are not shipped.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

from .errors import FitError, ValidationError

LN2 = math.log(2)
HBAR = 1.054571817e-34
HPLANCK = 6.62607015e-34

_GHZ = 1e9


@dataclass(frozen=True)
class SpectrumPoint:
    flux: float           # Phi0 units
    omega: float          # rad/s
    sigma_omega: float    # rad/s

    def __post_init__(self):
        if self.omega <= 0:
            raise ValidationError("omega must be positive")
        if self.sigma_omega <= 0:
            raise ValidationError("sigma_omega must be positive")


@dataclass(frozen=True)
class HyperbolaFit:
    """Spectrum fit h_bar omega(Phi) = sqrt(Delta^2 + c^2 (Phi - Phi_ss)^2)."""

    Delta: float              # J
    slope_coeff: float        # J per Phi0
    sweet_spot_flux: float    # Phi0 units
    covariance: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.Delta <= 0:
            raise ValidationError("Delta must be positive")

    def omega(self, flux) -> np.ndarray:
        eps = self.slope_coeff * (np.asarray(flux, dtype=float) - self.sweet_spot_flux)
        return np.sqrt(self.Delta**2 + eps**2) / HBAR


@dataclass(frozen=True)
class DecayTrace:
    times: np.ndarray = field(repr=False)
    populations: np.ndarray = field(repr=False)
    sigma: np.ndarray | None = field(default=None, repr=False)
    flux: float | None = None

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        p = np.asarray(self.populations, dtype=float)
        if t.ndim != 1 or t.shape != p.shape:
            raise ValidationError("times and populations must be 1-d and equal length")
        if np.any(np.diff(t) <= 0):
            raise ValidationError("times must be strictly increasing")
        if np.any(~np.isfinite(p)):
            raise ValidationError("populations must be finite")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "populations", p)
        if self.sigma is not None:
            s = np.asarray(self.sigma, dtype=float)
            if s.shape != t.shape or np.any(s <= 0):
                raise ValidationError("sigma must be positive and match times")
            object.__setattr__(self, "sigma", s)


@dataclass(frozen=True)
class DecayFit:
    Gamma_exp: float
    Gamma_phi: float
    Gamma_exp_err: float
    Gamma_phi_err: float
    amplitude: float
    offset: float


@dataclass(frozen=True)
class AmplitudeExtraction:
    """Noise amplitudes per slope branch and combined, micro-Phi0."""

    sqrtA_left: float | None
    sqrtA_left_err: float | None
    sqrtA_right: float | None
    sqrtA_right_err: float | None
    combined: float
    combined_err: float
    omitted_branches: tuple = ()


def echo_filter_function(omega, t: float):
    """Echo filter g_E = (sin^2(omega t / 4) / (omega t / 4))^2, g_E(0) = 0."""
    if t <= 0:
        raise ValidationError("t must be positive")
    u = np.asarray(omega, dtype=float) * t / 4
    with np.errstate(invalid="ignore", divide="ignore"):
        value = np.where(u == 0.0, 0.0, (np.sin(u) ** 2 / np.where(u == 0.0, 1.0, u)) ** 2)
    if np.ndim(omega) == 0:
        return float(value)
    return value


def echo_envelope(t, A_phi: float, slope: float):
    """Gaussian echo dephasing envelope exp(-t^2 slope^2 A ln2)."""
    t = np.asarray(t, dtype=float)
    value = np.exp(-(t**2) * slope**2 * A_phi * LN2)
    if value.ndim == 0:
        return float(value)
    return value


def pure_dephasing_rate(A_phi: float, slope: float) -> float:
    """Gamma_phi = sqrt(A ln2) |slope|; A in Phi0^2, slope in rad/s per Phi0."""
    if A_phi < 0:
        raise ValidationError("A_phi must be >= 0")
    return math.sqrt(A_phi * LN2) * abs(slope)


def fit_hyperbola(points) -> HyperbolaFit:
    """Weighted nonlinear fit of the spectrum hyperbola.

    Needs at least 4 points with the sweet spot inside the sampled flux
    range.  Initial guesses come from the minimum point and the
    outermost secant.
    """
    points = list(points)
    if len(points) < 4:
        raise ValidationError("need at least 4 spectrum points")
    flux = np.array([p.flux for p in points])
    omega = np.array([p.omega for p in points])
    sigma = np.array([p.sigma_omega for p in points])

    i_min = int(np.argmin(omega))
    phi0 = flux[i_min]
    if not (np.any(flux < phi0) and np.any(flux > phi0)):
        raise ValidationError("spectrum points must span both sides of the sweet spot")

    f = omega / (2 * np.pi * _GHZ)          # GHz
    sigma_f = sigma / (2 * np.pi * _GHZ)
    f_min = f[i_min]
    i_out = int(np.argmax(np.abs(flux - phi0)))
    df = max(abs(flux[i_out] - phi0), 1e-12)
    c0 = math.sqrt(max(f[i_out] ** 2 - f_min**2, 1e-6)) / df

    def residuals(params):
        fdelta, c, phiss = params
        model = np.sqrt(fdelta**2 + c**2 * (flux - phiss) ** 2)
        return (model - f) / sigma_f

    result = least_squares(
        residuals,
        x0=[f_min, c0, phi0],
        bounds=([1e-6, 1e-9, -np.inf], [np.inf, np.inf, np.inf]),
        x_scale="jac",
        max_nfev=2000,
    )
    if not result.success:
        raise FitError(
            f"hyperbola fit did not converge: {result.message}; "
            f"residual norm {np.linalg.norm(result.fun):.3g}"
        )

    dof = max(len(points) - 3, 1)
    jtj = result.jac.T @ result.jac
    try:
        cov = np.linalg.inv(jtj) * (2 * result.cost / dof)
    except np.linalg.LinAlgError:
        cov = np.full((3, 3), np.nan)
    # scale (GHz, GHz/Phi0, Phi0) parameters to (J, J/Phi0, Phi0)
    scale = np.diag([HPLANCK * _GHZ, HPLANCK * _GHZ, 1.0])
    cov = scale @ cov @ scale

    fdelta, c, phiss = result.x
    return HyperbolaFit(
        Delta=HPLANCK * _GHZ * fdelta,
        slope_coeff=HPLANCK * _GHZ * abs(c),
        sweet_spot_flux=phiss,
        covariance=cov,
    )


def spectrum_slope(fit: HyperbolaFit, flux: float) -> float:
    """Analytic d omega / d Phi of the fitted hyperbola, rad/s per Phi0."""
    delta = flux - fit.sweet_spot_flux
    energy = math.sqrt(fit.Delta**2 + (fit.slope_coeff * delta) ** 2)
    return fit.slope_coeff**2 * delta / (HBAR * energy)


def fit_echo_decay(trace: DecayTrace, T1_guess: float) -> DecayFit:
    """Fit p(t) = offset + amp exp(-Gamma_exp t - (Gamma_phi t)^2).

    Amplitude and offset are free nuisance parameters (readout
    visibility is below one), Gamma_exp starts at 1/(2 T1) and both
    rates are constrained non-negative.
    """
    if T1_guess <= 0:
        raise ValidationError("T1_guess must be positive")
    t = trace.times
    p = trace.populations
    if len(t) < 6:
        raise ValidationError("need at least 6 points in a decay trace")
    span = np.ptp(p)
    if span < 1e-6:
        raise FitError("decay trace is flat; nothing to fit")
    sigma = trace.sigma if trace.sigma is not None else np.full_like(t, 1.0)

    offset0 = float(np.min(p))
    amp0 = float(max(span, 1e-3))
    gamma_exp0 = 1.0 / (2 * T1_guess)
    # crude half-decay scale for the Gaussian rate guess
    half = offset0 + amp0 / 2
    below = np.nonzero(p <= half)[0]
    t_half = t[below[0]] if below.size else t[-1]
    gamma_phi0 = max(1.0 / (2 * t_half), 1e-3 * gamma_exp0)

    def residuals(params):
        amp, offset, g_exp, g_phi = params
        model = offset + amp * np.exp(-g_exp * t - (g_phi * t) ** 2)
        return (model - p) / sigma

    result = least_squares(
        residuals,
        x0=[amp0, offset0, gamma_exp0, gamma_phi0],
        bounds=([0.0, -0.5, 0.0, 0.0], [2.0, 1.5, np.inf, np.inf]),
        x_scale="jac",
        max_nfev=5000,
    )
    if not result.success:
        raise FitError(f"decay fit did not converge: {result.message}")

    dof = max(len(t) - 4, 1)
    jtj = result.jac.T @ result.jac
    try:
        cov = np.linalg.inv(jtj) * (2 * result.cost / dof)
        errs = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    except np.linalg.LinAlgError:
        errs = np.full(4, np.nan)
    amp, offset, g_exp, g_phi = result.x
    return DecayFit(
        Gamma_exp=g_exp,
        Gamma_phi=g_phi,
        Gamma_exp_err=errs[2],
        Gamma_phi_err=errs[3],
        amplitude=amp,
        offset=offset,
    )


def _branch_fit(slopes: np.ndarray, gammas: np.ndarray, errs: np.ndarray):
    """Zero-intercept weighted fit Gamma = k |slope|; returns (k, sigma_k)."""
    s = np.abs(slopes)
    w = 1.0 / errs**2
    denom = np.sum(w * s * s)
    k = float(np.sum(w * gammas * s) / denom)
    return k, math.sqrt(1.0 / denom)


def extract_noise_amplitude(pairs, min_slope: float = 0.0) -> AmplitudeExtraction:
    """Combine (slope, Gamma_phi +/- err) pairs into sqrt(A) in micro-Phi0.

    Separate zero-intercept fits for the positive and negative slope
    branches; a branch with fewer than two points is omitted and
    flagged.  Points with |slope| <= min_slope are excluded.
    """
    slopes, gammas, errs = [], [], []
    for slope, gamma, err in pairs:
        if err is None or not err > 0:
            err = 1.0
        slopes.append(slope)
        gammas.append(gamma)
        errs.append(err)
    slopes = np.array(slopes, dtype=float)
    gammas = np.array(gammas, dtype=float)
    errs = np.array(errs, dtype=float)

    results = {}
    omitted = []
    for name, mask in (
        ("left", slopes < -min_slope),
        ("right", slopes > min_slope),
    ):
        if np.count_nonzero(mask) < 2:
            omitted.append(name)
            results[name] = (None, None)
            continue
        k, k_err = _branch_fit(slopes[mask], gammas[mask], errs[mask])
        results[name] = (k / math.sqrt(LN2) * 1e6, k_err / math.sqrt(LN2) * 1e6)
    if len(omitted) == 2:
        raise FitError("both slope branches have fewer than two usable points")

    values = [v for v, _ in results.values() if v is not None]
    errors = [e for _, e in results.values() if e is not None]
    weights = [1.0 / e**2 for e in errors]
    combined = sum(w * v for w, v in zip(weights, values)) / sum(weights)
    combined_err = math.sqrt(1.0 / sum(weights))
    return AmplitudeExtraction(
        sqrtA_left=results["left"][0],
        sqrtA_left_err=results["left"][1],
        sqrtA_right=results["right"][0],
        sqrtA_right_err=results["right"][1],
        combined=combined,
        combined_err=combined_err,
        omitted_branches=tuple(omitted),
    )


@dataclass(frozen=True)
class QubitTruth:
    """Ground-truth parameters for the synthetic-data generator."""

    sqrtA: float              # Phi0 units
    Delta: float              # J
    slope_coeff: float        # J per Phi0
    T1: float                 # s
    sweet_spot_flux: float = 0.5

    def __post_init__(self):
        if min(self.sqrtA, self.Delta, self.slope_coeff, self.T1) <= 0:
            raise ValidationError("truth parameters must be positive")


@dataclass(frozen=True)
class SamplingPlan:
    """Flux and time sampling used by the generator."""

    spectrum_window: float = 3e-3         # Phi0 units, half width
    spectrum_points: int = 25
    spectrum_sigma: float = 2 * math.pi * 100e3   # rad/s, reported error bar
    spectrum_jitter: float = 0.0                  # rad/s, noise added to omega
    trace_offsets: tuple = (-2.5e-3, -1.75e-3, -1.25e-3, -0.75e-3, 0.75e-3, 1.25e-3, 1.75e-3, 2.5e-3)
    trace_points: int = 81
    time_span_factor: float = 4.0
    population_noise: float = 0.0
    readout_amplitude: float = 0.45
    readout_offset: float = 0.5

    def __post_init__(self):
        if self.spectrum_points < 4 or not self.trace_offsets or self.trace_points < 6:
            raise ValidationError("sampling plan too small to drive the pipeline")
        if self.spectrum_window <= 0 or self.time_span_factor <= 0:
            raise ValidationError("sampling plan values must be positive")
        if self.spectrum_sigma <= 0:
            raise ValidationError("spectrum_sigma must be positive")


def _true_slope(truth: QubitTruth, flux: float) -> float:
    delta = flux - truth.sweet_spot_flux
    energy = math.sqrt(truth.Delta**2 + (truth.slope_coeff * delta) ** 2)
    return truth.slope_coeff**2 * delta / (HBAR * energy)


def synthesize_qubit_dataset(truth: QubitTruth, plan: SamplingPlan, seed: int):
    """Deterministic synthetic (spectrum points, decay traces) for one qubit."""
    rng = np.random.default_rng(seed)
    A_phi = truth.sqrtA**2
    gamma_exp = 1.0 / (2 * truth.T1)

    fluxes = truth.sweet_spot_flux + np.linspace(
        -plan.spectrum_window, plan.spectrum_window, plan.spectrum_points
    )
    spectrum = []
    for phi in fluxes:
        eps = truth.slope_coeff * (phi - truth.sweet_spot_flux)
        omega = math.sqrt(truth.Delta**2 + eps**2) / HBAR
        jitter = rng.normal(0.0, plan.spectrum_jitter) if plan.spectrum_jitter > 0 else 0.0
        spectrum.append(
            SpectrumPoint(flux=phi, omega=omega + jitter, sigma_omega=plan.spectrum_sigma)
        )

    traces = []
    for offset in plan.trace_offsets:
        phi = truth.sweet_spot_flux + offset
        slope = _true_slope(truth, phi)
        gamma_phi = pure_dephasing_rate(A_phi, slope)
        t_end = plan.time_span_factor / (gamma_exp + gamma_phi)
        times = np.linspace(t_end / plan.trace_points, t_end, plan.trace_points)
        clean = plan.readout_offset + plan.readout_amplitude * np.exp(
            -gamma_exp * times - (gamma_phi * times) ** 2
        )
        noise = rng.normal(0.0, plan.population_noise, size=times.shape) if plan.population_noise > 0 else 0.0
        sigma = np.full_like(times, max(plan.population_noise, 1e-4))
        traces.append(DecayTrace(times=times, populations=clean + noise, sigma=sigma, flux=phi))
    return spectrum, traces


def run_extraction(spectrum, traces, T1_guess: float, min_slope: float = 0.0):
    """Full pipeline: hyperbola fit, per-trace decay fits, amplitude extraction.

    Returns (HyperbolaFit, list[DecayFit], AmplitudeExtraction).
    """
    hyperbola = fit_hyperbola(spectrum)
    decay_fits = []
    pairs = []
    for trace in traces:
        if trace.flux is None:
            raise ValidationError("decay trace carries no flux value")
        decay = fit_echo_decay(trace, T1_guess)
        decay_fits.append(decay)
        slope = spectrum_slope(hyperbola, trace.flux)
        pairs.append((slope, decay.Gamma_phi, decay.Gamma_phi_err))
    extraction = extract_noise_amplitude(pairs, min_slope=min_slope)
    return hyperbola, decay_fits, extraction
