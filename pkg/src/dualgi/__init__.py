"""Dual-arm ghost imaging: photon-pair acquisition simulation, minimax
reconstruction of the object transmittance, and photon-budget analysis."""

from .errors import (
    BisectionFailure,
    ConfigError,
    DimensionMismatch,
    InfeasibleProblem,
    InsufficientSamples,
    NonConvergence,
    NonDivisibleGeometry,
)
from .imaging import (
    AcquisitionParams,
    DetectorGeometry,
    TransmittanceMap,
    build_binning_operator,
    forward_mean,
    stacked_forward_operator,
)
from .noise import (
    covariance_degraded,
    covariance_unit_efficiency,
    noise_photon_covariance,
    poisson_statistics,
)
from .simulate import (
    MeasurementPair,
    SimulationConfig,
    accumulate,
    empirical_moments,
    simulate_acquisition,
    simulate_frame,
)
from .reduction import (
    ReductionProblem,
    ReductionResult,
    estimate_pipeline,
    feasibility,
    haar_basis,
    linear_reduction,
    pixel_basis,
    project_box,
    pseudo_inverse,
    reduction_operator,
    sparsity_denoise,
    suppressed_components,
)
from .gain import (
    GainPoint,
    default_grid,
    gain_surface,
    mse_combined,
    mse_gain,
    mse_ghost_only,
    photon_number_gain,
    write_gain_csv,
)
from .experiment import ExperimentProblems, build_problems, make_basis, slit_object

__version__ = "0.1.0"

__all__ = [
    "AcquisitionParams",
    "BisectionFailure",
    "ConfigError",
    "DetectorGeometry",
    "DimensionMismatch",
    "ExperimentProblems",
    "GainPoint",
    "InfeasibleProblem",
    "InsufficientSamples",
    "MeasurementPair",
    "NonConvergence",
    "NonDivisibleGeometry",
    "ReductionProblem",
    "ReductionResult",
    "SimulationConfig",
    "TransmittanceMap",
    "accumulate",
    "build_binning_operator",
    "build_problems",
    "covariance_degraded",
    "covariance_unit_efficiency",
    "default_grid",
    "empirical_moments",
    "estimate_pipeline",
    "feasibility",
    "forward_mean",
    "gain_surface",
    "haar_basis",
    "linear_reduction",
    "make_basis",
    "mse_combined",
    "mse_gain",
    "mse_ghost_only",
    "noise_photon_covariance",
    "photon_number_gain",
    "pixel_basis",
    "poisson_statistics",
    "project_box",
    "pseudo_inverse",
    "reduction_operator",
    "simulate_acquisition",
    "simulate_frame",
    "slit_object",
    "sparsity_denoise",
    "stacked_forward_operator",
    "suppressed_components",
    "write_gain_csv",
]
