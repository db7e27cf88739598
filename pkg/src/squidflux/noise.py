"""Flux variance and 1/f noise amplitude from surface spin defects.

Uncorrelated magnetic moments of areal density sigma and moment m sit in
the interfaces around the loop.  Averaging over random spin orientations
gives a total flux variance

    <Phi^2> = (1/3) m^2 sigma * sum_arms length * integral(width)

where integral(width) = int dx (B(x)/I)^2 runs across the interfaces of
one arm cross-section.  Two routes provide the integral:

* analytic_top: a closed form for the top surface of a thin film, built
  on the inverse-square-root sheet current profile with an exponential
  edge patch,

      integral = mu0^2/(pi W) * [ln(2 b W / lam^2) + e - 1] / (2 pi)

* numeric_top / numeric_all: trapezoidal integration of |B|/I profiles
  computed from the solved volume current distribution, for the top
  surface only or for all six interfaces (top, bottom, both side faces,
  and the two substrate strips beside the wire).

The echo experiment infers a flux variance of 2 A ln2 from a 1/f power
spectral density of amplitude A, which converts variance to the quoted
noise amplitude sqrt(A).
"""

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .constants import MU0, MU_B, PHI0
from .errors import FitError, NumericsError, ValidationError
from .fields import (
    INTERFACE_KINDS,
    SUBSTRATE_KINDS,
    FieldProfile,
    InterfaceSpec,
    interface_profiles,
)
from .geometry import SquidGeometry, arm_segments
from .strip import (
    DEFAULT_PATCH_CAP,
    CurrentDistribution,
    SolverParams,
    discretize_cross_section,
    solve_current_distribution,
)

TWO_LN2 = 2 * math.log(2)


class ModelVariant(str, Enum):
    ANALYTIC_TOP = "analytic_top"
    NUMERIC_TOP = "numeric_top"
    NUMERIC_ALL = "numeric_all"


VARIANT_INTERFACES = {
    ModelVariant.ANALYTIC_TOP: ("top",),
    ModelVariant.NUMERIC_TOP: ("top",),
    ModelVariant.NUMERIC_ALL: INTERFACE_KINDS,
}


@dataclass(frozen=True)
class DefectParams:
    """Moment and areal density of the surface spins, or their product m^2 sigma."""

    m: float | None = None                 # J/T
    sigma: float | None = None             # m^-2
    m2sigma: float | None = None           # J^2/T^2 m^-2
    per_interface_weights: dict | None = None

    def __post_init__(self):
        if self.m2sigma is None and (self.m is None or self.sigma is None):
            raise ValidationError("provide m2sigma or both m and sigma")
        if self.combined < 0:
            raise ValidationError("m^2 sigma must be >= 0")
        if self.per_interface_weights is not None:
            for kind, weight in self.per_interface_weights.items():
                if kind not in INTERFACE_KINDS:
                    raise ValidationError(f"unknown interface kind {kind!r} in weights")
                if weight < 0:
                    raise ValidationError("interface weights must be >= 0")

    @property
    def combined(self) -> float:
        if self.m2sigma is not None:
            return self.m2sigma
        return self.m**2 * self.sigma

    def weight(self, kind: str) -> float:
        if self.per_interface_weights is None:
            return 1.0
        return self.per_interface_weights.get(kind, 1.0)


@dataclass(frozen=True)
class VarianceBreakdown:
    """Per-interface field-variance integrals, T^2 m / A^2."""

    per_interface: dict
    total: float
    width: float
    geometry: SquidGeometry | None = None

    def __post_init__(self):
        if any(v < 0 for v in self.per_interface.values()):
            raise ValidationError("variance contributions must be >= 0")
        if not math.isclose(self.total, sum(self.per_interface.values()), rel_tol=1e-9):
            raise ValidationError("total must equal the sum of the per-interface entries")


@dataclass
class PipelineConfig:
    """Everything the numeric route needs: material, grid and sampling knobs.

    Solves and profiles are cached per distinct wire width, so a fit over
    many records pays for each width only once.
    """

    b: float = 190e-9
    lam: float = 40e-9
    target_patch: float | None = None       # default lam / 2
    patch_cap: int = DEFAULT_PATCH_CAP
    strip_length: float | None = None       # default max(100 um, 200 max(W, b))
    standoff: float = 1e-9
    substrate_extent_factor: float = 20.0
    resolution_top: int = 512
    resolution_side: int = 128
    resolution_substrate: int = 1024
    stagger: float = 0.5
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def patch_target(self) -> float:
        return self.lam / 2 if self.target_patch is None else self.target_patch

    def length_for(self, width: float) -> float:
        if self.strip_length is not None:
            return self.strip_length
        return max(100e-6, 200 * max(width, self.b))

    def interface_specs(self, width: float, kinds=INTERFACE_KINDS) -> list[InterfaceSpec]:
        specs = []
        for kind in kinds:
            if kind in ("top", "bottom"):
                resolution = self.resolution_top
                extent = None
            elif kind in SUBSTRATE_KINDS:
                resolution = self.resolution_substrate
                extent = self.substrate_extent_factor * width
            else:
                resolution = self.resolution_side
                extent = None
            specs.append(
                InterfaceSpec(
                    kind=kind,
                    resolution=resolution,
                    standoff=self.standoff,
                    extent=extent,
                    stagger=self.stagger,
                )
            )
        return specs

    def solve_width(self, width: float) -> CurrentDistribution:
        key = ("solve", width)
        if key not in self._cache:
            grid = discretize_cross_section(width, self.b, self.patch_target(), self.patch_cap)
            params = SolverParams(strip_length=self.length_for(width), lam=self.lam)
            self._cache[key] = solve_current_distribution(grid, params)
        return self._cache[key]

    def width_profiles(self, width: float) -> list[FieldProfile]:
        key = ("profiles", width)
        if key not in self._cache:
            dist = self.solve_width(width)
            self._cache[key] = interface_profiles(dist, self.interface_specs(width))
        return self._cache[key]

    def width_breakdown(self, width: float, variant: ModelVariant) -> VarianceBreakdown:
        key = ("breakdown", width, variant)
        if key not in self._cache:
            self._cache[key] = numeric_variance_integral(self.width_profiles(width), variant, width)
        return self._cache[key]


def surface_current_profile(xbar, eps: float):
    """Normalized sheet current K/K0 across the strip, xbar = x / W in [-1/2, 1/2].

    Inverse-square-root bulk profile joined to an exponential edge patch
    at |xbar| = (1 - eps)/2, with eps = lam^2 / (b W).
    """
    if not 0 < eps < 0.5:
        raise ValidationError("eps must lie strictly between 0 and 1/2")
    x = np.asarray(xbar, dtype=float)
    if np.any(np.abs(x) > 0.5):
        raise ValidationError("xbar must lie within [-1/2, 1/2]")
    ax = np.abs(x)
    edge = ax > (1 - eps) / 2
    bulk_value = 1.0 / np.sqrt(np.clip(1.0 - (2 * x) ** 2, eps * eps, None))
    edge_value = np.sqrt(np.e / (2 * eps)) * np.exp((ax - 0.5) / eps)
    value = np.where(edge, edge_value, bulk_value)
    if np.ndim(xbar) == 0:
        return float(value)
    return value


def analytic_variance_integral(W: float, b: float, lam: float) -> float:
    """Closed-form int dx (B/I)^2 for the top surface of a thin film (T^2 m / A^2)."""
    if W <= 0 or b <= 0 or lam <= 0:
        raise ValidationError("W, b and lam must be positive")
    eps = lam**2 / (b * W)
    if eps >= 0.5:
        raise ValidationError("lam^2/(b W) must stay below 1/2 for the analytic regime")
    return MU0**2 / (math.pi * W) * (math.log(2 * b * W / lam**2) + math.e - 1) / (2 * math.pi)


def numeric_variance_integral(
    profiles, variant: ModelVariant, width: float | None = None
) -> VarianceBreakdown:
    """Trapezoidal integral of (B/I)^2 per interface, summed per variant."""
    variant = ModelVariant(variant)
    by_kind = {p.spec.kind: p for p in profiles}
    required = VARIANT_INTERFACES[variant]
    missing = [kind for kind in required if kind not in by_kind]
    if missing:
        raise ValidationError(f"missing interface profile(s) {missing} for {variant.value}")
    per_interface = {}
    for kind in required:
        profile = by_kind[kind]
        per_interface[kind] = float(
            np.trapezoid(profile.field_over_current**2, profile.coordinates)
        )
    if width is None:
        top = by_kind.get("top") or next(iter(by_kind.values()))
        width = float(top.coordinates[-1] - top.coordinates[0])
    return VarianceBreakdown(
        per_interface=per_interface,
        total=sum(per_interface.values()),
        width=width,
    )


def _arm_integral(
    width: float,
    variant: ModelVariant,
    defects: DefectParams,
    config: PipelineConfig | None,
    b: float,
    lam: float,
) -> float:
    if variant is ModelVariant.ANALYTIC_TOP:
        return defects.weight("top") * analytic_variance_integral(width, b, lam)
    if config is None:
        raise ValidationError("numeric variants need a PipelineConfig")
    breakdown = config.width_breakdown(width, variant)
    return sum(
        defects.weight(kind) * value for kind, value in breakdown.per_interface.items()
    )


def flux_variance(
    g: SquidGeometry,
    defects: DefectParams,
    variant: ModelVariant = ModelVariant.ANALYTIC_TOP,
    config: PipelineConfig | None = None,
) -> float:
    """Total flux variance <Phi^2> of the loop in Wb^2.

    Each arm contributes its length times the field-variance integral at
    its own width; the factor 1/3 averages over random spin orientations.
    """
    variant = ModelVariant(variant)
    if config is not None and not (
        math.isclose(config.b, g.b, rel_tol=1e-12) and math.isclose(config.lam, g.lam, rel_tol=1e-12)
    ):
        raise ValidationError("geometry and pipeline disagree on film thickness or lam")
    total = 0.0
    for arm in arm_segments(g):
        total += arm.length * _arm_integral(arm.width, variant, defects, config, g.b, g.lam)
    return defects.combined * total / 3.0


def variance_to_amplitude(var: float) -> float:
    """sqrt(A) in Phi0 units from a flux variance in Wb^2, via <Phi^2> = 2 A ln2."""
    if var < 0:
        raise ValidationError("variance must be >= 0")
    return math.sqrt(var / TWO_LN2) / PHI0


def amplitude_to_variance(sqrtA: float) -> float:
    """Inverse of variance_to_amplitude; sqrtA in Phi0 units, result in Wb^2."""
    if sqrtA < 0:
        raise ValidationError("amplitude must be >= 0")
    return (sqrtA * PHI0) ** 2 * TWO_LN2


def geometry_factor(
    g: SquidGeometry,
    variant: ModelVariant,
    config: PipelineConfig | None = None,
    per_interface_weights: dict | None = None,
) -> float:
    """Power amplitude A per unit m^2 sigma (Wb^2): A = m2sigma * G."""
    unit = DefectParams(m2sigma=1.0, per_interface_weights=per_interface_weights)
    return flux_variance(g, unit, variant, config) / TWO_LN2


def predict_amplitude(
    g: SquidGeometry,
    variant: ModelVariant,
    m2sigma: float,
    config: PipelineConfig | None = None,
    per_interface_weights: dict | None = None,
) -> float:
    """Predicted sqrt(A) in micro-Phi0 for one loop geometry."""
    G = geometry_factor(g, variant, config, per_interface_weights)
    return math.sqrt(m2sigma * G) / PHI0 * 1e6


@dataclass(frozen=True)
class FitRecordResult:
    sample: str
    qubit: int
    geometry_factor: float
    measured_uPhi0: float
    predicted_uPhi0: float

    @property
    def residual_uPhi0(self) -> float:
        return self.measured_uPhi0 - self.predicted_uPhi0


@dataclass(frozen=True)
class NoiseFitResult:
    """Outcome of the single-parameter m^2 sigma fit."""

    variant: ModelVariant
    space: str
    m2sigma: float
    sigma_for_muB: float
    sigma_for_1p8muB: float
    chi2: float
    records: tuple

    @property
    def residuals(self) -> np.ndarray:
        return np.array([r.residual_uPhi0 for r in self.records])

    def as_dict(self) -> dict:
        return {
            "variant": self.variant.value,
            "space": self.space,
            "m2sigma_J2_per_T2_per_m2": self.m2sigma,
            "sigma_muB_per_m2": self.sigma_for_muB,
            "sigma_1p8muB_per_m2": self.sigma_for_1p8muB,
            "chi2": self.chi2,
            "records": [
                {
                    "sample": r.sample,
                    "qubit": r.qubit,
                    "geometry_factor_Wb2": r.geometry_factor,
                    "measured_uPhi0": r.measured_uPhi0,
                    "predicted_uPhi0": r.predicted_uPhi0,
                    "residual_uPhi0": r.residual_uPhi0,
                }
                for r in self.records
            ],
        }


def measured_power_wb2(record) -> float:
    """Mean of the available squared amplitudes, in Wb^2."""
    amps = record.amplitudes
    if not amps:
        raise ValidationError("record has no measured amplitudes")
    return float(np.mean([(a * PHI0) ** 2 for a in amps]))


def fit_defect_density(
    records,
    variant: ModelVariant = ModelVariant.ANALYTIC_TOP,
    config: PipelineConfig | None = None,
    *,
    space: str = "power",
    weights=None,
    shadow_offset: float = 350e-9,
    per_interface_weights: dict | None = None,
) -> NoiseFitResult:
    """Fit the single parameter m^2 sigma to measured noise amplitudes.

    Per record the measured power A is the mean of the available squared
    amplitudes and the model gives A = m^2 sigma * G.  The default power
    space fit has the closed-form optimum

        m^2 sigma = sum(w A G) / sum(w G^2)

    with equal weights unless given.  space="amplitude" instead fits
    sqrt(A) against sqrt(m^2 sigma * G).  The reported densities assume
    a moment of one (and 1.8) Bohr magneton.
    """
    variant = ModelVariant(variant)
    if space not in ("power", "amplitude"):
        raise ValidationError("space must be 'power' or 'amplitude'")
    if config is None:
        config = PipelineConfig()
    eligible = [r for r in records if r.eligible]
    if len(eligible) < 2:
        raise FitError("need at least 2 records with measured amplitudes")
    if weights is None:
        w = np.ones(len(eligible))
    else:
        w = np.asarray(weights, dtype=float)
        if w.shape != (len(eligible),) or np.any(w < 0):
            raise FitError("weights must be one non-negative value per eligible record")

    G = np.empty(len(eligible))
    A = np.empty(len(eligible))
    for i, record in enumerate(eligible):
        g = SquidGeometry(
            X=record.X,
            Y=record.Y,
            W=record.W,
            b=config.b,
            lam=config.lam,
            shadow_offset=shadow_offset,
        )
        G[i] = geometry_factor(g, variant, config, per_interface_weights)
        A[i] = measured_power_wb2(record)
    if np.any(G <= 0):
        raise NumericsError("geometry factors must be positive")

    if space == "power":
        m2sigma = float(np.sum(w * A * G) / np.sum(w * G * G))
        chi2 = float(np.sum(w * (A - m2sigma * G) ** 2))
    else:
        sqrtA = np.sqrt(A)
        sqrtG = np.sqrt(G)
        k = float(np.sum(w * sqrtA * sqrtG) / np.sum(w * G))
        m2sigma = k * k
        chi2 = float(np.sum(w * (sqrtA - k * sqrtG) ** 2))

    fit_records = tuple(
        FitRecordResult(
            sample=r.sample,
            qubit=r.qubit,
            geometry_factor=G[i],
            measured_uPhi0=math.sqrt(A[i]) / PHI0 * 1e6,
            predicted_uPhi0=math.sqrt(m2sigma * G[i]) / PHI0 * 1e6,
        )
        for i, r in enumerate(eligible)
    )
    return NoiseFitResult(
        variant=variant,
        space=space,
        m2sigma=m2sigma,
        sigma_for_muB=m2sigma / MU_B**2,
        sigma_for_1p8muB=m2sigma / (1.8 * MU_B) ** 2,
        chi2=chi2,
        records=fit_records,
    )
