import numpy as np
import pytest

from dualgi import (
    AcquisitionParams,
    DetectorGeometry,
    GainPoint,
    InfeasibleProblem,
    TransmittanceMap,
    build_binning_operator,
    build_problems,
    gain_surface,
    linear_reduction,
    mse_combined,
    mse_gain,
    mse_ghost_only,
    photon_number_gain,
    write_gain_csv,
)
from util import random_small_setup


def reference_params(n=1.0, eta=0.4, n_eps=0.1):
    return AcquisitionParams(n, eta, eta, n_eps)


class TestCrossPathConsistency:
    def test_closed_forms_match_reduction_on_random_configs(self):
        rng = np.random.default_rng(21)
        for _ in range(12):
            f, geom, params = random_small_setup(rng)
            problems = build_problems(f, geom, params)
            m = geom.num_pixels
            closed_combined = mse_combined(problems.a0, f, params)
            closed_ghost = mse_ghost_only(problems.a0, f, params)
            red_combined = linear_reduction(problems.combined, np.zeros(2 * m)).mse
            red_ghost = linear_reduction(problems.ghost_only, np.zeros(m)).mse
            if geom.bin_factor == 1:
                assert closed_combined == pytest.approx(red_combined, rel=1e-8)
                assert closed_ghost == pytest.approx(red_ghost, rel=1e-8)
            else:
                # binned geometry cannot resolve object pixels: both paths infinite
                assert np.isinf(closed_combined) and np.isinf(red_combined)
                assert np.isinf(closed_ghost) and np.isinf(red_ghost)

    def test_scalar_hand_evaluated_trace(self):
        # noise-model hand case (eta = 0.5): Sigma = [[0.5, 0.25], [0.25, 0.25]],
        # B = (1; 0.5), normal matrix n^2 eta0^2 B' Sigma^-1 B = 0.5,
        # so the combined MSE is 2; ghost-only: 0.25 / (0.25)^2 = 4
        params = AcquisitionParams(1.0, 0.5, 0.5, 0.0)
        a0 = np.eye(1)
        f = np.array([1.0])
        sigma = np.array([[0.5, 0.25], [0.25, 0.25]])
        b = np.array([[1.0], [0.5]])
        normal = 0.25 * float((b.T @ np.linalg.inv(sigma) @ b)[0, 0])
        assert mse_combined(a0, f, params) == pytest.approx(1.0 / normal, rel=1e-12)
        assert mse_ghost_only(a0, f, params) == pytest.approx(4.0, rel=1e-12)


class TestUnitEfficiencyNull:
    def test_object_arm_adds_nothing_at_unit_efficiency(self):
        rng = np.random.default_rng(22)
        for _ in range(5):
            f = TransmittanceMap(3, 2, rng.uniform(0.05, 1.0, 6))
            params = AcquisitionParams(float(rng.uniform(0.5, 2)), 1.0, 1.0, float(rng.uniform(0, 0.4)))
            a0 = build_binning_operator(3, 2, 1)
            ghost = mse_ghost_only(a0, f, params)
            combined = mse_combined(a0, f, params)
            assert combined == pytest.approx(ghost, rel=1e-10)


class TestMseGain:
    def test_zero_gain_at_unit_efficiency(self):
        f = TransmittanceMap.constant(2, 2, 0.8)
        a0 = build_binning_operator(2, 2, 1)
        gain = mse_gain(a0, f, AcquisitionParams(1.0, 1.0, 1.0, 0.2))
        assert abs(gain) <= 1e-10 * mse_ghost_only(a0, f, AcquisitionParams(1.0, 1.0, 1.0, 0.2))

    def test_non_negative_on_random_configs(self):
        rng = np.random.default_rng(23)
        for _ in range(30):
            f, geom, params = random_small_setup(rng)
            if geom.bin_factor != 1:
                continue
            a0 = build_binning_operator(f.width, f.height, 1)
            assert mse_gain(a0, f, params) >= -1e-10

    def test_infeasible_raises(self):
        f = TransmittanceMap.constant(2, 2, 1.0)
        a0 = build_binning_operator(2, 2, 1)
        with pytest.raises(InfeasibleProblem):
            mse_gain(a0, f, AcquisitionParams(1.0, 0.5, 0.0, 0.0))

    def test_dead_restoring_arm_means_infinite_ghost_mse(self):
        f = TransmittanceMap.constant(2, 2, 1.0)
        a0 = build_binning_operator(2, 2, 1)
        assert np.isinf(mse_ghost_only(a0, f, AcquisitionParams(1.0, 0.5, 0.0, 0.0)))

    def test_scalar_gain_against_brute_force_estimator_search(self):
        # scalar object, eta = 0.4, no noise photons: search unbiased linear
        # estimators (r0, r1) with r0 A0 + r1 A1 = 1 by brute force over r0
        params = AcquisitionParams(1.0, 0.4, 0.4, 0.0)
        a0 = np.eye(1)
        f = np.array([1.0])
        problems = build_problems(TransmittanceMap(1, 1, f), DetectorGeometry.for_object(1, 1, 1), params)
        sigma = problems.combined.sigma_nu
        a_col = problems.combined.a.ravel()  # (0.4, 0.16)
        r0 = np.linspace(-5.0, 8.0, 2_000_001)
        r1 = (1.0 - r0 * a_col[0]) / a_col[1]
        variances = (
            sigma[0, 0] * r0**2 + 2 * sigma[0, 1] * r0 * r1 + sigma[1, 1] * r1**2
        )
        brute_combined = variances.min()
        brute_ghost = sigma[1, 1] / a_col[1] ** 2
        gain = mse_gain(a0, f, params)
        assert gain > 0
        assert gain == pytest.approx(brute_ghost - brute_combined, rel=1e-6)

    def test_gap_shrinks_as_noise_grows(self):
        f = TransmittanceMap.constant(2, 2, 0.7)
        a0 = build_binning_operator(2, 2, 1)
        gaps = []
        for n_eps in (0.0, 0.2, 0.5, 1.0, 3.0, 10.0):
            params = AcquisitionParams(1.0, 0.4, 0.4, n_eps)
            ghost = mse_ghost_only(a0, f, params)
            combined = mse_combined(a0, f, params)
            assert combined <= ghost + 1e-12
            gaps.append(ghost - combined)
        assert all(g1 >= g2 - 1e-12 for g1, g2 in zip(gaps, gaps[1:]))


class TestPhotonNumberGain:
    def test_no_noise_anchor(self):
        a0 = build_binning_operator(3, 3, 1)
        f = TransmittanceMap.constant(3, 3, 1.0)
        for eta in (0.25, 0.4, 0.8):
            gain = photon_number_gain(a0, f, eta=eta, noise_ratio=0.0)
            assert gain == pytest.approx(1.0 - eta, abs=1e-4)

    def test_object_independence_of_anchor(self):
        rng = np.random.default_rng(24)
        a0 = build_binning_operator(3, 2, 1)
        f = TransmittanceMap(3, 2, rng.uniform(0.2, 1.0, 6))
        gain = photon_number_gain(a0, f, eta=0.4, noise_ratio=0.0)
        assert gain == pytest.approx(0.6, abs=1e-4)

    def test_unit_efficiency_no_saving(self):
        a0 = build_binning_operator(2, 2, 1)
        f = TransmittanceMap.constant(2, 2, 1.0)
        assert photon_number_gain(a0, f, eta=1.0, noise_ratio=0.3) == pytest.approx(0.0, abs=1e-6)

    def test_noise_reduces_the_saving(self):
        a0 = build_binning_operator(2, 2, 1)
        f = TransmittanceMap.constant(2, 2, 1.0)
        quiet = photon_number_gain(a0, f, eta=0.4, noise_ratio=0.0)
        noisy = photon_number_gain(a0, f, eta=0.4, noise_ratio=0.8)
        assert noisy < quiet

    def test_domain_validation(self):
        a0 = build_binning_operator(2, 2, 1)
        f = TransmittanceMap.constant(2, 2, 1.0)
        with pytest.raises(ValueError):
            photon_number_gain(a0, f, eta=0.0, noise_ratio=0.0)
        with pytest.raises(ValueError):
            photon_number_gain(a0, f, eta=0.5, noise_ratio=-0.1)


class TestGainSurface:
    def test_single_point_grid(self):
        a0 = build_binning_operator(2, 2, 1)
        f = TransmittanceMap.constant(2, 2, 1.0)
        rows = gain_surface(a0, f, [0.4], [0.0])
        assert len(rows) == 1
        assert rows[0].photon_gain == pytest.approx(0.6, abs=1e-4)
        assert rows[0].mse_gain == pytest.approx(rows[0].mse_ghost_only - rows[0].mse_combined)

    def test_unit_efficiency_row_is_zero(self):
        a0 = build_binning_operator(2, 2, 1)
        f = TransmittanceMap.constant(2, 2, 1.0)
        rows = gain_surface(a0, f, [1.0], [0.0, 0.5])
        assert all(r.photon_gain == 0.0 for r in rows)

    def test_grid_shape_and_order(self):
        a0 = build_binning_operator(2, 2, 1)
        f = TransmittanceMap.constant(2, 2, 1.0)
        rows = gain_surface(a0, f, [0.8, 0.4], [0.2, 0.0])
        assert len(rows) == 4
        assert [(r.eta, r.noise_ratio) for r in rows] == [
            (0.4, 0.0),
            (0.4, 0.2),
            (0.8, 0.0),
            (0.8, 0.2),
        ]

    def test_monotone_on_small_grid(self):
        a0 = build_binning_operator(2, 2, 1)
        f = TransmittanceMap.constant(2, 2, 1.0)
        etas = [0.2, 0.5, 0.8]
        ratios = [0.0, 0.3, 0.6]
        rows = gain_surface(a0, f, etas, ratios)
        table = {(r.eta, r.noise_ratio): r.photon_gain for r in rows}
        for ratio in ratios:
            column = [table[(eta, ratio)] for eta in etas]
            assert all(a >= b - 2e-6 for a, b in zip(column, column[1:]))
        for eta in etas:
            row = [table[(eta, ratio)] for ratio in ratios]
            assert all(a >= b - 2e-6 for a, b in zip(row, row[1:]))

    def test_empty_grid_rejected(self):
        a0 = build_binning_operator(2, 2, 1)
        f = TransmittanceMap.constant(2, 2, 1.0)
        with pytest.raises(ValueError):
            gain_surface(a0, f, [], [0.0])

    def test_csv_format(self, tmp_path):
        a0 = build_binning_operator(2, 2, 1)
        f = TransmittanceMap.constant(2, 2, 1.0)
        rows = gain_surface(a0, f, [0.4, 1.0], [0.0])
        path = tmp_path / "gain.csv"
        write_gain_csv(path, rows)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "eta,noise_ratio,mse_ghost,mse_combined,mse_gain,photon_gain"
        assert len(lines) == 3
        first = lines[1].split(",")
        assert float(first[0]) == 0.4
        assert float(first[5]) == pytest.approx(0.6, abs=1e-4)


class TestGainPoint:
    def test_invariants_enforced(self):
        with pytest.raises(ValueError):
            GainPoint(0.5, 0.0, 1.0, 2.0, -1.0, 0.5)  # combined worse than ghost
        with pytest.raises(ValueError):
            GainPoint(0.5, 0.0, 2.0, 1.0, 1.0, 1.5)  # photon gain outside [0, 1]
        with pytest.raises(ValueError):
            GainPoint(0.5, 0.0, 2.0, 1.0, 0.5, 0.5)  # inconsistent mse_gain
