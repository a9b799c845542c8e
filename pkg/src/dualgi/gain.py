"""Photon-budget accounting: dual-image scheme versus ghost image alone.

Closed-form worst-case MSEs for the two schemes (this module) and the
estimator-based MSEs (reduction module) are independent code paths that
must agree; tests hold them to 1e-8 relative. The headline quantity is the
relative photon gain: the fraction by which the illumination can be cut,
at unchanged reconstruction error, when the object-arm image is recorded
alongside the ghost image. With no noise photons it equals 1 - eta.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import BisectionFailure, InfeasibleProblem
from .imaging import AcquisitionParams, _values
from .noise import covariance_degraded, poisson_statistics
from .reduction import pseudo_inverse


def _ideal_operator(u, dim: int) -> np.ndarray:
    return np.eye(dim) if u is None else np.asarray(u, dtype=float)


def _traced_mse(normal: np.ndarray, u: np.ndarray, rtol: float = 1e-8) -> float:
    """tr U N^- U*, or +inf when U is not covered by the range of N."""
    n_inv = pseudo_inverse(normal)
    u_norm = np.linalg.norm(u)
    if u_norm > 0:
        residual = np.linalg.norm(u - u @ (n_inv @ normal))
        if residual > rtol * u_norm:
            return float("inf")
    return float(np.trace(u @ n_inv @ u.T))


def _uniform_noise_cov(a0: np.ndarray, n_eps: float) -> np.ndarray:
    # Per-detector-pixel background variance n_eps * (row sum of A0); equals
    # n_eps * bin_factor^2 * I for a pure binning operator.
    return n_eps * np.diag(a0 @ np.ones(a0.shape[1]))


def mse_ghost_only(a0: np.ndarray, f, params: AcquisitionParams, u=None) -> float:
    """Worst-case MSE of reduction from the ghost image alone.

    Closed form: the ghost-arm covariance factors as
    eta0 eta1 [eta0 eta1 A0 S A0* + (1 - eta0 eta1) diag(A0 n f)], giving
    normal matrix n^2 eta0 eta1 A0* K^- A0. Noise photons never enter: the
    coincidence circuit suppresses them. Returns +inf when infeasible.
    """
    a0 = np.asarray(a0, dtype=float)
    vals = _values(f)
    u = _ideal_operator(u, a0.shape[1])
    ee = params.eta0 * params.eta1
    g0 = a0 @ poisson_statistics(vals, params.n) @ a0.T
    d = np.diag(a0 @ (params.n * vals))
    k = ee * g0 + (1.0 - ee) * d
    normal = params.n**2 * ee * (a0.T @ pseudo_inverse(k) @ a0)
    return _traced_mse((normal + normal.T) / 2.0, u)


def mse_combined(a0: np.ndarray, f, params: AcquisitionParams, sigma_eps=None, u=None) -> float:
    """Worst-case MSE of reduction from both images.

    Closed form: with B = (A0; eta1 A0) and the full degraded-noise
    covariance S_nu, the normal matrix is n^2 eta0^2 B* S_nu^- B. Must agree
    with the reduction-module MSE on the stacked problem.
    """
    a0 = np.asarray(a0, dtype=float)
    vals = _values(f)
    u = _ideal_operator(u, a0.shape[1])
    if sigma_eps is None:
        sigma_eps = _uniform_noise_cov(a0, params.n_eps)
    sigma = covariance_degraded(a0, vals, params, sigma_eps)
    b = np.vstack([a0, params.eta1 * a0])
    normal = params.n**2 * params.eta0**2 * (b.T @ pseudo_inverse(sigma) @ b)
    return _traced_mse((normal + normal.T) / 2.0, u)


def mse_gain(a0: np.ndarray, f, params: AcquisitionParams, sigma_eps=None, u=None) -> float:
    """MSE reduction bought by recording the object-arm image: ghost - combined."""
    ghost = mse_ghost_only(a0, f, params, u)
    combined = mse_combined(a0, f, params, sigma_eps, u)
    if np.isinf(ghost) or np.isinf(combined):
        raise InfeasibleProblem("MSE gain undefined: a scheme has infinite MSE")
    return ghost - combined


def photon_number_gain(
    a0: np.ndarray,
    f,
    eta: float,
    noise_ratio: float,
    u=None,
    n_ref: float = 1.0,
    rtol: float = 1e-6,
    max_iter: int = 200,
) -> float:
    """Relative photon saving of the dual-image scheme at equal error.

    Finds n' <= n_ref such that the combined scheme at illumination n' (with
    noise photons scaled proportionally, n_eps = noise_ratio * n') matches the
    ghost-only MSE at n_ref, by bisection on n' over (0, n_ref] to relative
    tolerance `rtol`; returns (n_ref - n') / n_ref. The MSE is monotone
    decreasing in n', which guarantees bracketing; a failure to bracket raises
    BisectionFailure.
    """
    if not 0.0 < eta <= 1.0:
        raise ValueError(f"eta must lie in (0, 1], got {eta}")
    if noise_ratio < 0.0:
        raise ValueError(f"noise_ratio must be non-negative, got {noise_ratio}")
    a0 = np.asarray(a0, dtype=float)
    vals = _values(f)

    target = mse_ghost_only(a0, vals, AcquisitionParams(n_ref, eta, eta, noise_ratio * n_ref), u)
    if np.isinf(target):
        raise InfeasibleProblem("ghost-only scheme is infeasible for this geometry")

    def combined(n_prime: float) -> float:
        params = AcquisitionParams(n_prime, eta, eta, noise_ratio * n_prime)
        return mse_combined(a0, vals, params, u=u)

    hi = n_ref
    gap_hi = combined(hi) - target
    if gap_hi >= 0.0:
        # Combined no better than ghost-only (eta = 1, up to round-off): no saving.
        if gap_hi > 1e-9 * target:
            raise BisectionFailure("combined MSE exceeds ghost-only MSE at n_ref")
        return 0.0

    lo = hi / 2.0
    for _ in range(max_iter):
        if combined(lo) - target >= 0.0:
            break
        hi = lo
        lo /= 2.0
        if lo < n_ref * 1e-12:
            raise BisectionFailure("could not bracket the matching illumination level")
    else:
        raise BisectionFailure("could not bracket the matching illumination level")

    for _ in range(max_iter):
        if hi - lo <= rtol * hi:
            break
        mid = (lo + hi) / 2.0
        if combined(mid) - target >= 0.0:
            lo = mid
        else:
            hi = mid
    else:
        raise BisectionFailure("bisection did not converge within its budget")
    n_prime = (lo + hi) / 2.0
    return (n_ref - n_prime) / n_ref


@dataclass(frozen=True)
class GainPoint:
    """One grid point of the photon-gain surface."""

    eta: float
    noise_ratio: float
    mse_ghost_only: float
    mse_combined: float
    mse_gain: float
    photon_gain: float

    def __post_init__(self):
        if abs(self.mse_gain - (self.mse_ghost_only - self.mse_combined)) > 1e-9 * max(
            1.0, abs(self.mse_ghost_only)
        ):
            raise ValueError("mse_gain must equal mse_ghost_only - mse_combined")
        if self.mse_gain < -1e-10:
            raise ValueError(f"combined scheme worse than ghost-only: gain {self.mse_gain}")
        if not 0.0 <= self.photon_gain <= 1.0:
            raise ValueError(f"photon_gain must lie in [0, 1], got {self.photon_gain}")


def gain_surface(
    a0: np.ndarray,
    f,
    eta_grid,
    noise_ratio_grid,
    u=None,
    n_ref: float = 1.0,
) -> list[GainPoint]:
    """Evaluate the photon gain on the Cartesian grid, sorted by (eta, ratio)."""
    eta_grid = sorted(float(e) for e in eta_grid)
    noise_ratio_grid = sorted(float(r) for r in noise_ratio_grid)
    if not eta_grid or not noise_ratio_grid:
        raise ValueError("grids must be non-empty")
    rows = []
    for eta in eta_grid:
        for ratio in noise_ratio_grid:
            params = AcquisitionParams(n_ref, eta, eta, ratio * n_ref)
            ghost = mse_ghost_only(a0, f, params, u)
            combined = mse_combined(a0, f, params, u=u)
            gain = photon_number_gain(a0, f, eta, ratio, u, n_ref)
            rows.append(
                GainPoint(
                    eta=eta,
                    noise_ratio=ratio,
                    mse_ghost_only=ghost,
                    mse_combined=combined,
                    mse_gain=ghost - combined,
                    photon_gain=gain,
                )
            )
    return sorted(rows, key=lambda p: (p.eta, p.noise_ratio))


def default_grid() -> tuple[np.ndarray, np.ndarray]:
    """Figure grid: eta in [0.05, 1.0] and noise ratio in [0, 1], step 0.05."""
    return np.round(np.arange(1, 21) * 0.05, 10), np.round(np.arange(0, 21) * 0.05, 10)


def write_gain_csv(path, rows: list[GainPoint]) -> None:
    lines = ["eta,noise_ratio,mse_ghost,mse_combined,mse_gain,photon_gain"]
    for p in rows:
        lines.append(
            f"{p.eta:.10g},{p.noise_ratio:.10g},{p.mse_ghost_only:.10g},"
            f"{p.mse_combined:.10g},{p.mse_gain:.10g},{p.photon_gain:.10g}"
        )
    Path(path).write_text("\n".join(lines) + "\n")
