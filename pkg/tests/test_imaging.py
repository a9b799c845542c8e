import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dualgi import (
    AcquisitionParams,
    DetectorGeometry,
    DimensionMismatch,
    NonDivisibleGeometry,
    TransmittanceMap,
    build_binning_operator,
    forward_mean,
    stacked_forward_operator,
)
from dualgi.imaging import bin_counts


class TestBinningOperator:
    def test_bin_of_one_is_identity(self):
        assert np.array_equal(build_binning_operator(4, 4, 1), np.eye(16))

    def test_six_by_six_bin_three(self):
        a0 = build_binning_operator(6, 6, 3)
        assert a0.shape == (4, 36)
        assert np.all(a0.sum(axis=1) == 9)  # nine 1-entries per row
        assert np.all(a0.sum(axis=0) == 1)  # each object pixel feeds one detector pixel
        assert set(np.unique(a0)) == {0.0, 1.0}

    def test_non_divisible_geometry_is_an_error(self):
        with pytest.raises(NonDivisibleGeometry):
            build_binning_operator(64, 64, 3)

    def test_block_layout(self):
        # top-left detector pixel of a 4x4 / bin-2 grid covers object pixels
        # (0,0), (0,1), (1,0), (1,1) in row-major order
        a0 = build_binning_operator(4, 4, 2)
        assert np.array_equal(np.flatnonzero(a0[0]), [0, 1, 4, 5])

    @given(
        dw=st.integers(1, 4),
        dh=st.integers(1, 4),
        b=st.integers(1, 3),
    )
    @settings(max_examples=30, deadline=None)
    def test_column_sums_and_ones_image(self, dw, dh, b):
        a0 = build_binning_operator(dw * b, dh * b, b)
        assert np.allclose(a0.sum(axis=0), 1.0)
        assert np.allclose(a0 @ np.ones(a0.shape[1]), b**2)

    def test_bin_counts_matches_operator(self):
        rng = np.random.default_rng(0)
        grid = rng.integers(0, 10, size=(6, 9))
        a0 = build_binning_operator(9, 6, 3)
        assert np.array_equal(bin_counts(grid, 3).ravel(), a0 @ grid.ravel())


class TestStackedOperator:
    def test_unit_parameters(self):
        a = stacked_forward_operator(np.eye(2), AcquisitionParams(1.0, 1.0, 1.0))
        assert np.array_equal(a, np.vstack([np.eye(2), np.eye(2)]))

    def test_scalar_arithmetic(self):
        a = stacked_forward_operator(np.eye(1), AcquisitionParams(2.0, 0.5, 0.5))
        assert np.allclose(a, [[1.0], [0.5]])

    def test_reference_efficiencies(self):
        # eta0 = eta1 = 0.4: top block 0.4 A0, bottom block 0.16 A0
        a0 = build_binning_operator(6, 6, 3)
        a = stacked_forward_operator(a0, AcquisitionParams(1.0, 0.4, 0.4))
        assert np.allclose(a[:4], 0.4 * a0)
        assert np.allclose(a[4:], 0.16 * a0)

    def test_linear_in_f_homogeneous_in_n(self):
        rng = np.random.default_rng(1)
        a0 = build_binning_operator(4, 4, 2)
        f1, f2 = rng.uniform(0, 1, 16), rng.uniform(0, 1, 16)
        params = AcquisitionParams(1.3, 0.7, 0.5)
        a = stacked_forward_operator(a0, params)
        assert np.allclose(a @ (0.3 * f1 + 0.5 * f2), 0.3 * (a @ f1) + 0.5 * (a @ f2))
        a_scaled = stacked_forward_operator(a0, AcquisitionParams(2.6, 0.7, 0.5))
        assert np.allclose(a_scaled, 2.0 * a)


class TestForwardMean:
    def test_full_transmission_unit_efficiency(self):
        a0 = build_binning_operator(6, 6, 3)
        f = TransmittanceMap.constant(6, 6, 1.0)
        m0, m1 = forward_mean(a0, f, AcquisitionParams(1.0, 1.0, 1.0, 0.0))
        assert np.allclose(m0, 9.0)
        assert np.allclose(m1, 9.0)

    def test_opaque_object(self):
        a0 = build_binning_operator(4, 4, 2)
        f = TransmittanceMap.constant(4, 4, 0.0)
        m0, m1 = forward_mean(a0, f, AcquisitionParams(1.7, 0.6, 0.3, 0.0))
        assert np.array_equal(m0, np.zeros(4))
        assert np.array_equal(m1, np.zeros(4))

    def test_noise_photons_hit_object_arm_only(self):
        a0 = build_binning_operator(2, 2, 1)
        f = TransmittanceMap.constant(2, 2, 0.0)
        params = AcquisitionParams(1.0, 0.4, 0.4, n_eps=0.5)
        m0, m1 = forward_mean(a0, f, params)
        assert np.allclose(m0, 0.4**2 * 0.5)
        assert np.array_equal(m1, np.zeros(4))

    def test_ghost_mean_is_eta1_times_noise_free_image(self):
        rng = np.random.default_rng(2)
        a0 = build_binning_operator(6, 4, 2)
        f = TransmittanceMap(6, 4, rng.uniform(0, 1, 24))
        params = AcquisitionParams(1.4, 0.55, 0.35, n_eps=0.2)
        m0, m1 = forward_mean(a0, f, params)
        clean = AcquisitionParams(params.n, params.eta0, params.eta1, 0.0)
        m0_clean, _ = forward_mean(a0, f, clean)
        assert np.allclose(m1, params.eta1 * m0_clean)

    def test_dimension_mismatch(self):
        a0 = build_binning_operator(4, 4, 2)
        with pytest.raises(DimensionMismatch):
            forward_mean(a0, np.ones(9), AcquisitionParams(1.0, 1.0, 1.0))


class TestTypes:
    def test_transmittance_range_enforced(self):
        with pytest.raises(ValueError):
            TransmittanceMap(2, 2, np.array([0.0, 0.5, 1.0, 1.2]))
        with pytest.raises(ValueError):
            TransmittanceMap(2, 2, np.array([-0.1, 0.5, 1.0, 0.2]))

    def test_transmittance_size_enforced(self):
        with pytest.raises(DimensionMismatch):
            TransmittanceMap(2, 2, np.zeros(5))

    def test_geometry_divisibility(self):
        geom = DetectorGeometry.for_object(24, 24, 3)
        assert (geom.detector_width, geom.detector_height) == (8, 8)
        assert geom.num_pixels == 64
        with pytest.raises(NonDivisibleGeometry):
            DetectorGeometry.for_object(25, 24, 3)

    def test_params_validation(self):
        with pytest.raises(ValueError):
            AcquisitionParams(-1.0, 0.5, 0.5)
        with pytest.raises(ValueError):
            AcquisitionParams(1.0, 1.5, 0.5)
        with pytest.raises(ValueError):
            AcquisitionParams(1.0, 0.5, 0.5, n_eps=-0.1)

    def test_pgm_round_trip(self, tmp_path):
        # values on the 8-bit lattice survive exactly; others within half a level
        rng = np.random.default_rng(3)
        exact = TransmittanceMap(4, 3, np.round(rng.uniform(0, 1, 12) * 255) / 255)
        exact.to_pgm(tmp_path / "exact.pgm")
        back = TransmittanceMap.from_pgm(tmp_path / "exact.pgm")
        assert np.allclose(back.values, exact.values, atol=1e-12)
        assert (back.width, back.height) == (4, 3)

        arbitrary = TransmittanceMap(5, 2, rng.uniform(0, 1, 10))
        arbitrary.to_pgm(tmp_path / "arb.pgm")
        back = TransmittanceMap.from_pgm(tmp_path / "arb.pgm")
        assert np.max(np.abs(back.values - arbitrary.values)) <= 0.5 / 255 + 1e-12
