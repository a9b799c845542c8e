"""Seeded Monte Carlo simulator of dual-arm photon-pair acquisition.

Generative model per frame, per object pixel i:

    pairs transmitted      k_i ~ Poisson(n * f_i)
    object-arm detections  d_i ~ Binomial(k_i, eta0)
    coincidences           c_i ~ Binomial(d_i, eta1)

The coincidence draw thins the object-arm detections (a ghost count exists
only where both photons of a pair are registered), which reproduces the
cross-covariance structure of the analytic noise model. d and c are then
binned into detector pixels, and the object arm additionally receives a
noise-photon count per detector pixel drawn as Poisson(eta0^2 * n_eps *
bin_factor^2), matching the covariance convention of the noise module.

Each frame uses its own RNG stream keyed by (seed, frame_index), so results
are bit-identical across runs and independent of evaluation order; frames may
safely be computed in parallel. The simulator doubles as the independent
oracle for the analytic covariance and MSE formulas: empirical moments of the
stacked counts converge to forward_mean and covariance_degraded.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InsufficientSamples
from .imaging import AcquisitionParams, DetectorGeometry, TransmittanceMap, bin_counts


@dataclass(frozen=True)
class MeasurementPair:
    """One acquisition frame: integer counts per detector pixel in each arm."""

    xi0: np.ndarray  # object-arm counts (image + noise photons)
    xi1: np.ndarray  # restoring-arm coincidence counts (ghost image)

    def stacked(self) -> np.ndarray:
        return np.concatenate([self.xi0, self.xi1])


@dataclass(frozen=True)
class SimulationConfig:
    f: TransmittanceMap
    geom: DetectorGeometry
    params: AcquisitionParams
    frames: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.frames < 1:
            raise ValueError("frames must be >= 1")
        if (self.geom.object_width, self.geom.object_height) != (self.f.width, self.f.height):
            raise ValueError(
                f"geometry covers {self.geom.object_width}x{self.geom.object_height} "
                f"object pixels but the map is {self.f.width}x{self.f.height}"
            )


def _frame_rng(seed: int, frame_index: int) -> np.random.Generator:
    # Per-frame counter-based stream: reproducible regardless of evaluation order.
    return np.random.default_rng([seed, frame_index])


def simulate_frame(config: SimulationConfig, frame_index: int) -> MeasurementPair:
    """Simulate a single frame; deterministic given (config.seed, frame_index)."""
    if not 0 <= frame_index < config.frames:
        raise ValueError(f"frame_index {frame_index} outside [0, {config.frames})")
    rng = _frame_rng(config.seed, frame_index)
    p = config.params
    b = config.geom.bin_factor

    pair_rate = p.n * config.f.values
    k = rng.poisson(pair_rate)
    d = rng.binomial(k, p.eta0)
    c = rng.binomial(d, p.eta1)
    assert np.all(c <= d), "coincidences exceed object-arm detections"

    shape = (config.f.height, config.f.width)
    xi0 = bin_counts(d.reshape(shape), b).ravel()
    xi1 = bin_counts(c.reshape(shape), b).ravel()

    noise_rate = p.eta0**2 * p.n_eps * b**2
    if noise_rate > 0:
        xi0 = xi0 + rng.poisson(noise_rate, size=xi0.size)
    return MeasurementPair(xi0=xi0, xi1=xi1)


def simulate_acquisition(config: SimulationConfig) -> list[MeasurementPair]:
    """Simulate all frames of an acquisition.

    Returns `config.frames` independent MeasurementPair draws. Output is a
    pure function of the config (including the seed): equal configs give
    bit-identical sequences.
    """
    return [simulate_frame(config, i) for i in range(config.frames)]


def accumulate(samples: list[MeasurementPair]) -> tuple[np.ndarray, np.ndarray]:
    """Sum counts over frames: (total xi0, total xi1).

    The total ghost image is what the coincidence circuit delivers for
    estimation; the estimator consumes aggregate counts.
    """
    if not samples:
        raise InsufficientSamples("no frames to accumulate")
    xi0 = np.sum([s.xi0 for s in samples], axis=0)
    xi1 = np.sum([s.xi1 for s in samples], axis=0)
    return xi0, xi1


def empirical_moments(samples: list[MeasurementPair]) -> tuple[np.ndarray, np.ndarray]:
    """Unbiased sample mean and covariance (divisor N-1) of stacked frames."""
    if len(samples) < 2:
        raise InsufficientSamples(f"need >= 2 samples, got {len(samples)}")
    x = np.array([s.stacked() for s in samples], dtype=float)
    mean = x.mean(axis=0)
    cov = np.atleast_2d(np.cov(x, rowvar=False, ddof=1))
    return mean, cov
