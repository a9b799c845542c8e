"""Minimax linear estimation from stacked measurements, with constraints.

Given the measurement model xi = A f + nu with zero-mean noise of known
covariance, the minimax linear estimator of the ideal output U f is

    R = U (A* S^- A)^- A* S^-          (S = noise covariance)

with error covariance U (A* S^- A)^- U* and worst-case mean squared error
equal to its trace; the MSE is finite iff the row space of the (whitened) A
covers everything U looks at. All inverses are Moore-Penrose pseudo-inverses,
so singular noise covariances and rank-deficient operators degrade gracefully
(minimum-norm estimates, +inf MSE when infeasible).

Two prior-information stages refine the raw linear estimate:

  sparsity_denoise  zero every coefficient of the estimate, in an orthogonal
                    basis, that is statistically indistinguishable from zero
                    (two-sided Gaussian test at level tau per component);
  project_box       project onto [0, 1]^dim in the Mahalanobis metric of the
                    estimate covariance (a convex box-constrained QP).

Everything here is a pure function; no shared mutable state.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtri

from .errors import DimensionMismatch, NonConvergence


def pseudo_inverse(m: np.ndarray, rtol: float = 1e-10) -> np.ndarray:
    """Moore-Penrose pseudo-inverse of a symmetric matrix via eigendecomposition.

    Eigenvalues with magnitude below rtol * max|eigenvalue| are treated as
    exact zeros.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {m.shape}")
    scale = np.abs(m).max()
    if scale > 0 and np.abs(m - m.T).max() > 1e-8 * scale:
        raise ValueError("matrix is not symmetric")
    w, v = np.linalg.eigh((m + m.T) / 2.0)
    wmax = np.abs(w).max() if w.size else 0.0
    if wmax == 0.0:
        return np.zeros_like(m)
    inv_w = np.where(np.abs(w) > rtol * wmax, 1.0 / np.where(w == 0, 1.0, w), 0.0)
    out = (v * inv_w) @ v.T
    return (out + out.T) / 2.0


@dataclass(frozen=True)
class ReductionProblem:
    """Stacked forward operator, its noise covariance, and the ideal operator U."""

    a: np.ndarray
    sigma_nu: np.ndarray
    u: np.ndarray | None = None  # None means identity on object-pixel space

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        sigma = np.asarray(self.sigma_nu, dtype=float)
        u = np.eye(a.shape[1]) if self.u is None else np.asarray(self.u, dtype=float)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "sigma_nu", sigma)
        object.__setattr__(self, "u", u)
        if sigma.shape != (a.shape[0], a.shape[0]):
            raise DimensionMismatch(
                f"sigma_nu has shape {sigma.shape}, expected {(a.shape[0],) * 2}"
            )
        if u.shape[1] != a.shape[1]:
            raise DimensionMismatch(
                f"U has {u.shape[1]} columns but A has {a.shape[1]}"
            )


@dataclass(frozen=True)
class ReductionResult:
    estimate: np.ndarray
    estimate_cov: np.ndarray = field(repr=False)
    mse: float


def _normal_matrix(problem: ReductionProblem) -> tuple[np.ndarray, np.ndarray]:
    """Whitened normal matrix N = A* S^- A and the covariance pseudo-inverse."""
    sigma_inv = pseudo_inverse(problem.sigma_nu)
    n = problem.a.T @ sigma_inv @ problem.a
    return (n + n.T) / 2.0, sigma_inv


def feasibility(problem: ReductionProblem, rtol: float = 1e-8) -> bool:
    """True iff the worst-case MSE is finite: U (I - A^- A) vanishes.

    A^- is taken through the whitened normal equations, so A^- A equals the
    projector N^- N with N = A* S^- A.
    """
    n, _ = _normal_matrix(problem)
    projector = pseudo_inverse(n) @ n
    u = problem.u
    u_norm = np.linalg.norm(u)
    if u_norm == 0.0:
        return True
    residual = np.linalg.norm(u - u @ projector)
    return residual <= rtol * u_norm


def reduction_operator(problem: ReductionProblem) -> np.ndarray:
    """The minimax linear estimator R = U (A* S^- A)^- A* S^- as a matrix."""
    n, sigma_inv = _normal_matrix(problem)
    return problem.u @ pseudo_inverse(n) @ problem.a.T @ sigma_inv


def linear_reduction(problem: ReductionProblem, xi: np.ndarray) -> ReductionResult:
    """Apply the minimax linear estimator to a stacked measurement.

    Returns the estimate of U f, its covariance U N^- U*, and the worst-case
    MSE (trace of that covariance when the problem is feasible, +inf
    otherwise; infeasibility is not an error).
    """
    xi = np.asarray(xi, dtype=float).ravel()
    if xi.size != problem.a.shape[0]:
        raise DimensionMismatch(
            f"measurement has {xi.size} entries, operator has {problem.a.shape[0]} rows"
        )
    n, sigma_inv = _normal_matrix(problem)
    n_inv = pseudo_inverse(n)
    reducer = problem.u @ n_inv @ problem.a.T @ sigma_inv
    estimate = reducer @ xi
    cov = problem.u @ n_inv @ problem.u.T
    cov = (cov + cov.T) / 2.0
    projector = n_inv @ n
    u_norm = np.linalg.norm(problem.u)
    feasible = (
        u_norm == 0.0
        or np.linalg.norm(problem.u - problem.u @ projector) <= 1e-8 * u_norm
    )
    mse = float(np.trace(cov)) if feasible else float("inf")
    return ReductionResult(estimate=estimate, estimate_cov=cov, mse=mse)


# ---------------------------------------------------------------------------
# Box-constrained Mahalanobis projection
# ---------------------------------------------------------------------------

def _kkt_residual(u: np.ndarray, g: np.ndarray) -> float:
    """Sup-norm of the projected gradient of the box QP at u."""
    r = g.copy()
    at_lower = u <= 0.0
    at_upper = u >= 1.0
    r[at_lower] = np.minimum(g[at_lower], 0.0)
    r[at_upper] = np.maximum(g[at_upper], 0.0)
    return float(np.abs(r).max()) if r.size else 0.0


def _cauchy_point(x, hx, h, u0, g):
    """Exact minimizer of the quadratic along the projected steepest-descent path.

    x is updated in place along the piecewise-linear path clip(x - t g);
    hx = H (x - u0) is maintained incrementally (one H column read per frozen
    coordinate, one matvec total).
    """
    d = -g
    with np.errstate(divide="ignore", invalid="ignore"):
        t_bar = np.where(d > 0, (1.0 - x) / d, np.where(d < 0, -x / d, np.inf))
    t_bar = np.where(np.isnan(t_bar), np.inf, t_bar)

    p = np.where(t_bar > 0, d, 0.0)
    hp = h @ p
    t_prev = 0.0
    order = np.argsort(t_bar, kind="stable")
    pos = 0
    n_coords = x.size
    while True:
        f1 = 2.0 * float(hx @ p)
        f2 = 2.0 * float(p @ hp)
        if f1 >= 0.0 or f2 <= 0.0:
            return
        # next breakpoint strictly beyond t_prev
        while pos < n_coords and t_bar[order[pos]] <= t_prev:
            pos += 1
        t_next = t_bar[order[pos]] if pos < n_coords else np.inf
        dt_star = -f1 / f2
        dt_max = t_next - t_prev
        if dt_star < dt_max or not np.isfinite(t_next):
            x += dt_star * p
            hx += dt_star * hp
            np.clip(x, 0.0, 1.0, out=x)
            return
        x += dt_max * p
        hx += dt_max * hp
        # freeze every coordinate whose bound is reached at t_next
        while pos < n_coords and t_bar[order[pos]] <= t_next:
            i = order[pos]
            if p[i] != 0.0:
                x[i] = 1.0 if d[i] > 0 else 0.0
                hp -= h[:, i] * p[i]
                p[i] = 0.0
            pos += 1
        t_prev = t_next


def project_box(
    u0: np.ndarray,
    estimate_cov: np.ndarray,
    *,
    tol: float = 1e-8,
    max_iter: int = 10_000,
) -> np.ndarray:
    """Project u0 onto [0, 1]^dim in the Mahalanobis metric of estimate_cov.

    Minimizes (u - u0)* C^- (u - u0) over the unit box, with C^- the
    pseudo-inverse of the estimate covariance, by gradient projection with
    exact line search along the projected path, plus an exact solve on the
    current free set once it stabilizes. Diagonal covariances reduce to
    per-coordinate clamping. Raises NonConvergence if the KKT residual does
    not reach `tol` within `max_iter` iterations.
    """
    u0 = np.asarray(u0, dtype=float).ravel()
    c = np.asarray(estimate_cov, dtype=float)
    if c.shape != (u0.size, u0.size):
        raise DimensionMismatch(
            f"covariance has shape {c.shape}, expected {(u0.size,) * 2}"
        )
    if np.count_nonzero(c - np.diag(np.diag(c))) == 0:
        return np.clip(u0, 0.0, 1.0)

    h = pseudo_inverse(c)
    x = np.clip(u0, 0.0, 1.0)
    hx = h @ (x - u0)
    prev_free = None
    for _ in range(max_iter):
        g = 2.0 * hx
        if _kkt_residual(x, g) <= tol:
            return x
        _cauchy_point(x, hx, h, u0, g)
        free = (x > 0.0) & (x < 1.0)
        if prev_free is not None and free.any() and np.array_equal(free, prev_free):
            # Active set stabilized: solve the equality-constrained problem on
            # the free coordinates and step toward it as far as the box allows.
            rhs = -h[np.ix_(free, ~free)] @ (x[~free] - u0[~free])
            delta, *_ = np.linalg.lstsq(h[np.ix_(free, free)], rhs, rcond=None)
            target = u0[free] + delta
            step = target - x[free]
            with np.errstate(divide="ignore", invalid="ignore"):
                to_upper = np.where(step > 0, (1.0 - x[free]) / step, np.inf)
                to_lower = np.where(step < 0, -x[free] / step, np.inf)
            beta = min(1.0, float(np.min(np.minimum(to_upper, to_lower), initial=1.0)))
            if beta > 0:
                cand = x.copy()
                cand[free] = np.clip(x[free] + beta * step, 0.0, 1.0)
                hc = h @ (cand - u0)
                if float((cand - u0) @ hc) < float((x - u0) @ hx):
                    x, hx = cand, hc
        prev_free = free
    raise NonConvergence(
        f"box projection: KKT residual above {tol} after {max_iter} iterations"
    )


# ---------------------------------------------------------------------------
# Sparsity-based denoising
# ---------------------------------------------------------------------------

def pixel_basis(dim: int) -> np.ndarray:
    """Canonical (pixel) basis: the identity matrix."""
    return np.eye(dim)


def haar_levels(width: int, height: int) -> int:
    """Deepest multiresolution level: largest L with 2^L dividing both dims."""
    levels = 0
    w, h = width, height
    while w % 2 == 0 and h % 2 == 0 and w > 1 and h > 1:
        levels += 1
        w //= 2
        h //= 2
    return levels


def haar_basis(width: int, height: int, levels: int | None = None) -> np.ndarray:
    """Orthonormal 2-D Haar wavelet basis on a width x height pixel grid.

    Rows of the returned matrix are basis vectors; coefficients of a row-major
    image vector f are B @ f. The decomposition recurses on the low-pass band
    `levels` times (default: as deep as divisibility by 2 allows; for grids
    with an odd dimension this is 0 and the basis degenerates to the pixel
    basis).
    """
    max_levels = haar_levels(width, height)
    if levels is None:
        levels = max_levels
    if not 0 <= levels <= max_levels:
        raise ValueError(f"levels must lie in [0, {max_levels}] for a {width}x{height} grid")

    n = width * height
    basis = np.eye(n).reshape(n, height, width)
    inv_sqrt2 = 1.0 / np.sqrt(2.0)
    h, w = height, width
    for _ in range(levels):
        band = basis[:, :h, :w]
        lo = (band[:, :, 0::2] + band[:, :, 1::2]) * inv_sqrt2
        hi = (band[:, :, 0::2] - band[:, :, 1::2]) * inv_sqrt2
        band = np.concatenate([lo, hi], axis=2)
        lo = (band[:, 0::2, :] + band[:, 1::2, :]) * inv_sqrt2
        hi = (band[:, 0::2, :] - band[:, 1::2, :]) * inv_sqrt2
        basis[:, :h, :w] = np.concatenate([lo, hi], axis=1)
        h //= 2
        w //= 2
    # basis[:, i, j] currently maps input pixel -> coefficient plane; flatten
    # so that row k of B is the analysis vector of coefficient k.
    return basis.reshape(n, n).T.copy()


def _component_scores(result: ReductionResult, basis: np.ndarray):
    b = np.asarray(basis, dtype=float)
    est = np.asarray(result.estimate, dtype=float)
    if b.shape != (est.size, est.size):
        raise DimensionMismatch(f"basis has shape {b.shape}, expected {(est.size,) * 2}")
    coeffs = b @ est
    variances = np.einsum("ij,jk,ik->i", b, result.estimate_cov, b)
    sigmas = np.sqrt(np.clip(variances, 0.0, None))
    return b, coeffs, sigmas


def suppressed_components(result: ReductionResult, basis: np.ndarray, tau: float) -> np.ndarray:
    """Boolean mask of basis components the level-tau test would zero."""
    if not 0.0 <= tau < 1.0:
        raise ValueError(f"tau must lie in [0, 1), got {tau}")
    _, coeffs, sigmas = _component_scores(result, basis)
    threshold = ndtri((1.0 + tau) / 2.0)
    return np.abs(coeffs) <= threshold * sigmas


def sparsity_denoise(result: ReductionResult, basis: np.ndarray, tau: float) -> np.ndarray:
    """Zero statistically insignificant components of the estimate in `basis`.

    Each coefficient c_i of the estimate in the orthogonal basis is kept only
    if |c_i| exceeds t(tau) * sigma_i, where sigma_i is its standard deviation
    under the estimate covariance and t(tau) is the standard normal quantile
    at (1 + tau) / 2. tau = 0 gives t = 0 and returns the estimate unchanged:
    it encodes "no sparsity information".
    """
    if not 0.0 <= tau < 1.0:
        raise ValueError(f"tau must lie in [0, 1), got {tau}")
    b, coeffs, sigmas = _component_scores(result, basis)
    if tau == 0.0:
        return np.asarray(result.estimate, dtype=float).copy()
    threshold = ndtri((1.0 + tau) / 2.0)
    mask = np.abs(coeffs) <= threshold * sigmas
    if not mask.any():
        return np.asarray(result.estimate, dtype=float).copy()
    coeffs[mask] = 0.0
    return b.T @ coeffs


def estimate_pipeline(
    problem: ReductionProblem,
    xi: np.ndarray,
    basis: np.ndarray | None = None,
    tau: float = 0.0,
) -> np.ndarray:
    """Full reconstruction: linear reduction, optional denoising, box projection.

    The sparsity test runs on the unconstrained linear estimate (its Gaussian
    calibration does not survive clipping), then the result is projected onto
    [0, 1]^dim in the Mahalanobis metric. Output is exactly inside the box.
    """
    result = linear_reduction(problem, xi)
    estimate = result.estimate
    if basis is not None and tau > 0.0:
        estimate = sparsity_denoise(result, basis, tau)
    return project_box(estimate, result.estimate_cov)
