"""Self-contained consistency checks: simulator versus analytic formulas.

Each check pits two independent routes at the same quantity against each
other: Monte Carlo moments versus the analytic covariance, simulated
estimator error versus the closed-form MSE, and the photon-gain solver
versus its exact zero-noise anchor 1 - eta. The CLI `validate` subcommand
runs them all and reports measured/expected/tolerance per check.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .imaging import (
    AcquisitionParams,
    DetectorGeometry,
    TransmittanceMap,
    build_binning_operator,
)
from .gain import photon_number_gain
from .reduction import ReductionProblem, linear_reduction, reduction_operator
from .simulate import SimulationConfig, simulate_acquisition
from .experiment import build_problems


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    measured: float
    expected: float
    tolerance: float
    detail: str = ""

    def format_line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        line = (
            f"[{status}] {self.name}: measured {self.measured:.6g}, "
            f"expected {self.expected:.6g}, tolerance {self.tolerance:.3g}"
        )
        return line + (f" ({self.detail})" if self.detail else "")


def covariance_check(
    f: TransmittanceMap,
    geom: DetectorGeometry,
    params: AcquisitionParams,
    frames: int = 100_000,
    seed: int = 0,
    n_se: float = 3.0,
    allowed_fraction: float = 0.05,
    perturb: float = 0.0,
) -> CheckResult:
    """Empirical covariance of simulated frames versus the analytic model.

    Every entry must sit within n_se estimated standard errors, except for an
    `allowed_fraction` of entries (multiple-comparison allowance). `perturb`
    scales the analytic covariance by (1 + perturb) to fault-inject.
    """
    problems = build_problems(f, geom, params, frames=1)
    analytic = problems.combined.sigma_nu * (1.0 + perturb)

    config = SimulationConfig(f=f, geom=geom, params=params, frames=frames, seed=seed)
    x = np.array([s.stacked() for s in simulate_acquisition(config)], dtype=float)
    n = x.shape[0]
    centered = x - x.mean(axis=0)
    emp = centered.T @ centered / (n - 1)
    # Standard error of each covariance entry, estimated from the sample:
    # Var[(z_i z_j)] / n with z the centered frames.
    second = (centered**2).T @ (centered**2) / n
    cross = (centered.T @ centered / n) ** 2
    se = np.sqrt(np.clip(second - cross, 0.0, None) / n)
    se = np.maximum(se, 1e-300)

    deviations = np.abs(emp - analytic) / se
    frac_bad = float(np.mean(deviations > n_se))
    return CheckResult(
        name="covariance: Monte Carlo vs analytic",
        passed=frac_bad <= allowed_fraction,
        measured=frac_bad,
        expected=0.0,
        tolerance=allowed_fraction,
        detail=f"fraction of entries beyond {n_se:g} standard errors, {frames} frames",
    )


def mse_check(
    problem: ReductionProblem,
    f_true: np.ndarray,
    draws: int = 100_000,
    seed: int = 1,
    rtol: float = 0.05,
) -> CheckResult:
    """Empirical estimator MSE under Gaussian noise versus the closed form."""
    rng = np.random.default_rng(seed)
    f_true = np.asarray(f_true, dtype=float).ravel()
    reference = linear_reduction(problem, problem.a @ f_true)
    if not np.isfinite(reference.mse):
        raise ValueError("mse_check requires a feasible problem")
    w, v = np.linalg.eigh(problem.sigma_nu)
    root = v * np.sqrt(np.clip(w, 0.0, None))
    reducer = reduction_operator(problem)
    # error per draw: R (A f + root z) - U f = (R root) z + bias; bias ~ 0.
    bias = reducer @ (problem.a @ f_true) - problem.u @ f_true
    z = rng.standard_normal((draws, problem.sigma_nu.shape[0]))
    errors = z @ (reducer @ root).T + bias
    empirical = float(np.mean(np.sum(errors**2, axis=1)))
    rel = abs(empirical - reference.mse) / reference.mse
    return CheckResult(
        name="estimator MSE: Monte Carlo vs closed form",
        passed=rel <= rtol,
        measured=empirical,
        expected=reference.mse,
        tolerance=rtol,
        detail=f"relative deviation {rel:.3g}, {draws} Gaussian draws",
    )


def photon_gain_anchor_check(
    a0: np.ndarray,
    f,
    etas=(0.2, 0.4, 0.7),
    tol: float = 1e-3,
) -> CheckResult:
    """photon_number_gain at zero noise ratio must equal 1 - eta."""
    worst = 0.0
    for eta in etas:
        gain = photon_number_gain(a0, f, eta=eta, noise_ratio=0.0)
        worst = max(worst, abs(gain - (1.0 - eta)))
    return CheckResult(
        name="photon gain anchor: gain(eta, 0) = 1 - eta",
        passed=worst <= tol,
        measured=worst,
        expected=0.0,
        tolerance=tol,
        detail=f"worst |gain - (1 - eta)| over eta in {tuple(etas)}",
    )


def run_standard_checks(perturb_cov: float = 0.0, seed: int = 20240608) -> list[CheckResult]:
    """Built-in small-scale oracle suite used by the CLI validate subcommand."""
    f_small = TransmittanceMap(2, 2, np.array([0.9, 0.4, 0.7, 0.2]))
    geom_small = DetectorGeometry.for_object(2, 2, 1)
    params = AcquisitionParams(n=1.0, eta0=0.4, eta1=0.4, n_eps=0.1)

    checks = [
        covariance_check(
            f_small,
            geom_small,
            params,
            frames=30_000,
            seed=seed,
            n_se=4.0,
            perturb=perturb_cov,
        )
    ]

    f_mse = TransmittanceMap(4, 2, np.array([0.9, 0.3, 0.6, 0.8, 0.2, 0.7, 0.5, 0.4]))
    geom_mse = DetectorGeometry.for_object(4, 2, 1)
    problems = build_problems(f_mse, geom_mse, params, frames=1)
    checks.append(mse_check(problems.combined, f_mse.values, draws=30_000, seed=seed + 1))

    a0 = build_binning_operator(4, 4, 1)
    f_ones = TransmittanceMap.constant(4, 4, 1.0)
    checks.append(photon_gain_anchor_check(a0, f_ones))
    return checks
