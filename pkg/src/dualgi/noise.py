"""Analytic covariance of the stacked two-arm measurement noise.

The stacked measurement xi = (xi0; xi1) carries four noise sources: the photon
emission statistics common to both arms, the noise-photon background hitting
only the object arm, and the detection losses of each detector. They are never
materialized separately; only their joint 2m x 2m covariance is built, in two
flavors:

  covariance_unit_efficiency   both detectors ideal (eta0 = eta1 = 1)
  covariance_degraded          general efficiencies; adds the loss term
                               proportional to diag(A0 (n f))

For Poisson emission statistics S(f) = n diag(f). The noise-photon background
is modeled as uniform independent Poisson counts with mean n_eps per object
pixel, i.e. n_eps * bin_factor^2 per detector pixel; in the degraded case its
covariance enters with an eta0^2 prefactor, and the Monte Carlo simulator
injects counts drawn to match that same convention so the analytic and
empirical covariances agree by construction.

Constructors symmetrize their output, never error on singular results, and
are pure functions (thread-safe).
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionMismatch
from .imaging import AcquisitionParams, DetectorGeometry, _values


def _symmetrized(m: np.ndarray) -> np.ndarray:
    return (m + m.T) / 2.0


def poisson_statistics(f, n: float) -> np.ndarray:
    """Emission-count covariance for Poisson statistics: n * diag(f)."""
    if n < 0:
        raise ValueError("n must be non-negative")
    return n * np.diag(_values(f))


def noise_photon_covariance(n_eps: float, geom: DetectorGeometry) -> np.ndarray:
    """Covariance of the noise-photon counts on the object-arm detector.

    Uniform Poisson background, independent across detector pixels:
    (n_eps * bin_factor^2) * I, with n_eps the per-object-pixel rate.
    """
    if n_eps < 0:
        raise ValueError("n_eps must be non-negative")
    return n_eps * geom.bin_factor**2 * np.eye(geom.num_pixels)


def covariance_unit_efficiency(a0: np.ndarray, s: np.ndarray, sigma_eps: np.ndarray) -> np.ndarray:
    """Stacked noise covariance for ideal detectors.

    With G = A0 S A0*, the blocks are [[G + sigma_eps, G], [G, G]]: both arms
    see the same emission fluctuations, and the background adds to the
    object-arm block only.
    """
    a0 = np.asarray(a0, dtype=float)
    s = np.asarray(s, dtype=float)
    sigma_eps = np.asarray(sigma_eps, dtype=float)
    m = a0.shape[0]
    if s.shape != (a0.shape[1], a0.shape[1]):
        raise DimensionMismatch(f"S has shape {s.shape}, expected {(a0.shape[1],) * 2}")
    if sigma_eps.shape != (m, m):
        raise DimensionMismatch(f"sigma_eps has shape {sigma_eps.shape}, expected {(m, m)}")
    g = a0 @ s @ a0.T
    return _symmetrized(np.block([[g + sigma_eps, g], [g, g]]))


def covariance_degraded(
    a0: np.ndarray,
    f,
    params: AcquisitionParams,
    sigma_eps: np.ndarray,
) -> np.ndarray:
    """Stacked noise covariance with detector efficiencies eta0, eta1.

    Three contributions: the emission term eta0^2 [[1, eta1], [eta1, eta1^2]]
    (x) A0 S(f) A0*, the background term eta0^2 sigma_eps on the object-arm
    block, and the detection-loss term

        [[eta0 (1 - eta0),        eta0 (1 - eta0) eta1        ],
         [eta0 (1 - eta0) eta1,   eta0 eta1 (1 - eta0 eta1)   ]]  (x)  D,

    with D = diag(A0 (n f)). S(f) is the Poisson model n diag(f). At
    eta0 = eta1 = 1 this coincides with covariance_unit_efficiency.
    """
    a0 = np.asarray(a0, dtype=float)
    vals = _values(f)
    sigma_eps = np.asarray(sigma_eps, dtype=float)
    m = a0.shape[0]
    if a0.shape[1] != vals.size:
        raise DimensionMismatch(f"A0 has {a0.shape[1]} columns but f has {vals.size} pixels")
    if sigma_eps.shape != (m, m):
        raise DimensionMismatch(f"sigma_eps has shape {sigma_eps.shape}, expected {(m, m)}")
    eta0, eta1 = params.eta0, params.eta1

    s = poisson_statistics(vals, params.n)
    g = a0 @ s @ a0.T
    d = np.diag(a0 @ (params.n * vals))

    emission = eta0**2 * np.array([[1.0, eta1], [eta1, eta1**2]])
    loss = np.array(
        [
            [eta0 * (1 - eta0), eta0 * (1 - eta0) * eta1],
            [eta0 * (1 - eta0) * eta1, eta0 * eta1 * (1 - eta0 * eta1)],
        ]
    )
    sigma = np.kron(emission, g) + np.kron(loss, d)
    sigma[:m, :m] += eta0**2 * sigma_eps
    return _symmetrized(sigma)
