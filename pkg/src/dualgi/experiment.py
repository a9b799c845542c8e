"""Assembly of end-to-end experiments: objects, problems, reconstructions.

Glue shared by the CLI, the demos and the test suite. An acquisition of
`frames` exposures at illumination n is estimated from the summed counts,
which is statistically identical to a single exposure at frames * n (all
noise terms are linear in the photon numbers), so the reduction problem is
built at the frame-scaled parameters.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .imaging import (
    AcquisitionParams,
    DetectorGeometry,
    TransmittanceMap,
    build_binning_operator,
    stacked_forward_operator,
)
from .noise import covariance_degraded, noise_photon_covariance
from .reduction import ReductionProblem, haar_basis, pixel_basis


def slit_object(
    width: int = 24,
    height: int = 24,
    slit_width: int = 4,
    background: float = 0.05,
) -> TransmittanceMap:
    """Transparent vertical slit on a nearly opaque background.

    The faint background keeps the noise covariance nonsingular even without
    noise photons.
    """
    grid = np.full((height, width), background)
    start = (width - slit_width) // 2
    grid[:, start : start + slit_width] = 1.0
    return TransmittanceMap.from_grid(grid)


@dataclass(frozen=True)
class ExperimentProblems:
    """Reduction problems for one acquisition: both arms, and the ghost arm alone."""

    a0: np.ndarray = field(repr=False)
    combined: ReductionProblem
    ghost_only: ReductionProblem
    total_params: AcquisitionParams


def build_problems(
    f: TransmittanceMap,
    geom: DetectorGeometry,
    params: AcquisitionParams,
    frames: int = 1,
) -> ExperimentProblems:
    """Build the stacked and ghost-only reduction problems for summed counts.

    The noise covariance is evaluated at the true object, as in a simulation
    study where the generating model is known.
    """
    total = params.scaled(frames)
    a0 = build_binning_operator(f.width, f.height, geom.bin_factor)
    sigma_eps = noise_photon_covariance(total.n_eps, geom)
    sigma = covariance_degraded(a0, f, total, sigma_eps)
    a = stacked_forward_operator(a0, total)

    m = geom.num_pixels
    combined = ReductionProblem(a=a, sigma_nu=sigma)
    ghost_only = ReductionProblem(a=a[m:], sigma_nu=sigma[m:, m:])
    return ExperimentProblems(a0=a0, combined=combined, ghost_only=ghost_only, total_params=total)


def make_basis(name: str, width: int, height: int) -> np.ndarray | None:
    """Resolve a basis name ("haar" | "pixel" | "none") for a width x height grid."""
    if name == "haar":
        return haar_basis(width, height)
    if name == "pixel":
        return pixel_basis(width * height)
    if name == "none":
        return None
    raise ValueError(f"unknown basis {name!r} (expected haar, pixel or none)")
