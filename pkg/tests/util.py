"""Shared test helpers: random problem generators and Monte Carlo bands."""

from __future__ import annotations

import numpy as np

from dualgi import (
    AcquisitionParams,
    DetectorGeometry,
    SimulationConfig,
    TransmittanceMap,
    build_problems,
    simulate_acquisition,
)


def random_psd(rng: np.random.Generator, dim: int, rank: int | None = None) -> np.ndarray:
    """Random PSD matrix with controlled rank."""
    rank = dim if rank is None else rank
    a = rng.standard_normal((dim, rank))
    return a @ a.T


def random_small_setup(rng: np.random.Generator, max_detector_pixels: int = 8):
    """Random object/geometry/params with at most `max_detector_pixels` pixels."""
    choices = [(2, 2, 1), (2, 4, 1), (2, 2, 2), (4, 2, 2), (6, 3, 3), (4, 4, 2), (3, 2, 1)]
    w, h, b = choices[rng.integers(len(choices))]
    assert (w // b) * (h // b) <= max_detector_pixels
    f = TransmittanceMap(w, h, rng.uniform(0.05, 1.0, w * h))
    geom = DetectorGeometry.for_object(w, h, b)
    params = AcquisitionParams(
        n=float(rng.uniform(0.5, 2.0)),
        eta0=float(rng.uniform(0.3, 0.9)),
        eta1=float(rng.uniform(0.3, 0.9)),
        n_eps=float(rng.uniform(0.0, 0.3)),
    )
    return f, geom, params


def stacked_frames(f, geom, params, frames: int, seed: int) -> np.ndarray:
    """(frames, 2m) array of simulated stacked counts."""
    config = SimulationConfig(f=f, geom=geom, params=params, frames=frames, seed=seed)
    return np.array([s.stacked() for s in simulate_acquisition(config)], dtype=float)


def covariance_band_violations(x: np.ndarray, analytic: np.ndarray, n_se: float) -> float:
    """Fraction of covariance entries beyond n_se estimated standard errors."""
    n = x.shape[0]
    centered = x - x.mean(axis=0)
    emp = centered.T @ centered / (n - 1)
    second = (centered**2).T @ (centered**2) / n
    cross = (centered.T @ centered / n) ** 2
    se = np.maximum(np.sqrt(np.clip(second - cross, 0.0, None) / n), 1e-300)
    return float(np.mean(np.abs(emp - analytic) / se > n_se))


def analytic_covariance(f, geom, params) -> np.ndarray:
    return build_problems(f, geom, params).combined.sigma_nu
