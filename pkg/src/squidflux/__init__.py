"""squidflux: geometry-to-noise toolkit for rectangular SQUID loops.

Predicts 1/f flux-noise amplitudes from a microscopic surface-spin
model: a PEEC-style solve of the strip current distribution, Biot-Savart
evaluation of the surrounding interface fields, flux-variance assembly,
and a single-parameter defect-density fit against measured noise tables.
A spin-echo spectroscopy module mirrors the measurement-extraction
pipeline the tables were produced with.
"""

from .constants import CONSTANTS, MU0, MU_B, PHI0, PhysicalConstants
from .dataset import QubitRecord, dump_dataset, load_dataset, packaged_table
from .errors import FitError, NumericsError, SquidFluxError, ValidationError
from .fields import FieldProfile, InterfaceSpec, biot_savart_at_points, interface_profiles
from .geometry import ArmSegment, SquidGeometry, arm_segments, mean_width, perimeter
from .noise import (
    DefectParams,
    ModelVariant,
    NoiseFitResult,
    PipelineConfig,
    VarianceBreakdown,
    amplitude_to_variance,
    analytic_variance_integral,
    fit_defect_density,
    flux_variance,
    geometry_factor,
    numeric_variance_integral,
    predict_amplitude,
    surface_current_profile,
    variance_to_amplitude,
)
from .spectroscopy import (
    AmplitudeExtraction,
    DecayTrace,
    HyperbolaFit,
    QubitTruth,
    SamplingPlan,
    SpectrumPoint,
    echo_envelope,
    echo_filter_function,
    extract_noise_amplitude,
    fit_echo_decay,
    fit_hyperbola,
    pure_dephasing_rate,
    run_extraction,
    spectrum_slope,
    synthesize_qubit_dataset,
)
from .strip import (
    CrossSectionGrid,
    CurrentDistribution,
    SolverParams,
    discretize_cross_section,
    kinetic_diagonal,
    partial_inductance_matrix,
    solve_current_distribution,
    surface_current_density,
)

__version__ = "0.1.0"
