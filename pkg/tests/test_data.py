"""Dataset generators: exact values, invariants, and serialization."""

import numpy as np
import pytest

from relu_landscape.data import (Dataset, DatasetKind,
                                 anchor_centers, covariance_spectrum,
                                 dataset_from_csv, dataset_to_csv,
                                 gen_assumption1, gen_gaussian_teacher,
                                 gen_orthogonal, teacher_vector,
                                 validate_general_position, zero_teacher)


class TestGaussianTeacher:
    def test_labels_are_teacher_outputs(self):
        ds = gen_gaussian_teacher(4, 2, teacher_width=10, seed=123)
        # reproduce the generator's draw order: points first, then teacher
        rng = np.random.default_rng(123)
        pts = rng.standard_normal((4, 2))
        inner = rng.standard_normal((10, 2))
        outer = rng.standard_normal(10)
        np.testing.assert_array_equal(ds.points, pts)
        expect = np.maximum(pts @ inner.T, 0.0) @ outer
        np.testing.assert_array_equal(ds.labels, expect)

    def test_zero_teacher_gives_zero_labels(self):
        t = zero_teacher(3, width=4)
        assert np.array_equal(t.predict(np.random.default_rng(0).standard_normal((5, 3))),
                              np.zeros(5))

    def test_same_seed_bit_identical(self):
        a = gen_gaussian_teacher(8, 4, seed=99)
        b = gen_gaussian_teacher(8, 4, seed=99)
        assert dataset_to_csv(a) == dataset_to_csv(b)

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            gen_gaussian_teacher(0, 2)


class TestOrthogonal:
    def test_gram_is_identity_square_case(self):
        ds = gen_orthogonal(3, 3, zero_teacher(3), seed=4)
        np.testing.assert_allclose(ds.points @ ds.points.T, np.eye(3), atol=1e-12)

    def test_tall_frame_unit_and_orthogonal(self):
        ds = gen_orthogonal(8, 20, zero_teacher(20), seed=11)
        gram = ds.points @ ds.points.T
        assert np.abs(gram - np.eye(8)).max() <= 1e-12
        np.testing.assert_allclose(np.linalg.norm(ds.points, axis=1), 1.0, atol=1e-12)

    def test_zero_labeler_zero_labels(self):
        ds = gen_orthogonal(4, 6, zero_teacher(6), seed=2)
        assert np.array_equal(ds.labels, np.zeros(4))

    def test_rejects_n_above_d(self):
        with pytest.raises(ValueError):
            gen_orthogonal(5, 3, zero_teacher(3), seed=0)


class TestAnchorCenters:
    def test_noiseless_points_are_exact_centers_d3(self):
        ds = gen_assumption1(3, noise_std=0.0, seed=0)
        expect = np.array([[1.0, 0.0, 0.0],
                           [8 / 9, -4 / 9, 1 / 9],
                           [8 / 9, 4 / 9, 1 / 9]])
        np.testing.assert_array_equal(ds.points, expect)

    def test_noiseless_labels_exact_fractions(self):
        # y2 = (4/5)(8/9) + (3/5)(1/9), evaluated directly
        ds = gen_assumption1(3, noise_std=0.0, seed=0)
        assert ds.labels[0] == 4 / 5
        assert ds.labels[1] == pytest.approx(7 / 9, abs=1e-16)
        assert ds.labels[2] == pytest.approx(7 / 9, abs=1e-16)

    def test_fourth_center_d4(self):
        c = anchor_centers(4)
        np.testing.assert_array_equal(c[3], [8 / 9, 0.0, 0.0, np.sqrt(17) / 9])
        assert abs(np.linalg.norm(c[3]) - 1.0) <= 1e-15

    def test_noiseless_center_dots_and_labels(self):
        for d in (3, 4, 5):
            ds = gen_assumption1(d, noise_std=0.0, seed=0)
            dots = np.einsum("kj,kj->k", ds.points, anchor_centers(d))
            np.testing.assert_allclose(dots, 1.0, atol=1e-15)
            np.testing.assert_allclose(ds.labels, anchor_centers(d) @ teacher_vector(d),
                                       atol=1e-15)

    def test_noisy_points_stay_near_centers(self):
        ds = gen_assumption1(5, eta=1e-3, noise_std=1e-3, seed=7)
        dots = np.einsum("kj,kj->k", ds.points, anchor_centers(5))
        assert (dots > 1 - 1e-3).all()
        np.testing.assert_allclose(np.linalg.norm(ds.points, axis=1), 1.0, atol=1e-12)

    def test_rejects_small_d(self):
        with pytest.raises(ValueError):
            gen_assumption1(2)

    def test_impossible_eta_raises(self):
        with pytest.raises(RuntimeError):
            gen_assumption1(3, eta=1e-9, noise_std=0.5, seed=0, max_attempts=5)


class TestCovarianceSpectrum:
    def test_orthonormal_frame_isotropic(self):
        ds = gen_orthogonal(4, 4, zero_teacher(4), seed=3)
        spec = covariance_spectrum(ds)
        assert spec.mu_min == pytest.approx(0.25, abs=1e-12)
        assert spec.mu_max == pytest.approx(0.25, abs=1e-12)
        np.testing.assert_allclose(spec.H, np.eye(4) / 4, atol=1e-12)

    def test_noiseless_centers_positive_definite(self):
        ds = gen_assumption1(3, noise_std=0.0, seed=0)
        spec = covariance_spectrum(ds)
        assert spec.mu_min > 0
        assert spec.eigen_distinct
        # the exact centers are a measure-zero case: the teacher direction
        # has no component on the middle eigenvector
        assert not spec.vstar_full_support

    def test_noisy_centers_full_support(self):
        ds = gen_assumption1(3, seed=5)
        spec = covariance_spectrum(ds)
        assert spec.eigen_distinct
        assert spec.vstar_full_support

    def test_rank_deficient_reports_zero(self):
        x = np.array([[1.0, 2.0], [2.0, 4.0], [0.5, 1.0]])
        ds = Dataset(x, np.zeros(3), DatasetKind.GAUSSIAN_TEACHER, 0)
        spec = covariance_spectrum(ds)
        assert spec.mu_min == 0.0
        assert not spec.eigen_distinct
        assert not spec.vstar_full_support


class TestGeneralPosition:
    def test_gaussian_data_passes(self, gaussian_4x2):
        rep = validate_general_position(gaussian_4x2)
        assert rep.in_general_position and rep.exhaustive

    def test_zero_point_fails(self):
        pts = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
        ds = Dataset(pts, np.zeros(3), DatasetKind.GAUSSIAN_TEACHER, 0)
        rep = validate_general_position(ds)
        assert rep.has_zero_point and not rep.in_general_position

    def test_collinear_points_fail(self):
        pts = np.array([[1.0, 1.0], [2.0, 2.0], [3.0, -1.0]])
        ds = Dataset(pts, np.zeros(3), DatasetKind.GAUSSIAN_TEACHER, 0)
        rep = validate_general_position(ds)
        assert not rep.in_general_position
        # cross-check with the raw 2x2 determinant of the dependent pair
        assert abs(np.linalg.det(pts[[0, 1]])) < 1e-12


class TestSerialization:
    def test_round_trip_bit_exact(self):
        for ds in (gen_gaussian_teacher(5, 3, seed=1),
                   gen_orthogonal(3, 6, zero_teacher(6), seed=2),
                   gen_assumption1(4, seed=3)):
            back = dataset_from_csv(dataset_to_csv(ds))
            np.testing.assert_array_equal(back.points, ds.points)
            np.testing.assert_array_equal(back.labels, ds.labels)
            assert back.kind == ds.kind and back.seed == ds.seed
            assert dataset_to_csv(back) == dataset_to_csv(ds)

    def test_header_and_metadata_format(self):
        ds = gen_assumption1(3, seed=3)
        text = dataset_to_csv(ds)
        lines = text.splitlines()
        assert lines[0].startswith("# kind=assumption1,seed=3,eta=0.001,noise_std=0.001")
        assert lines[1] == "k,x_1,x_2,x_3,y"
        assert len(lines) == 2 + ds.n

    def test_random_float_round_trip(self):
        rng = np.random.default_rng(0)
        vals = rng.standard_normal(200) * 10.0 ** rng.integers(-300, 300, 200)
        for v in vals:
            assert float(format(v, ".17g")) == v


class TestDatasetValidation:
    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            Dataset(np.array([[np.inf, 0.0]]), np.array([0.0]),
                    DatasetKind.GAUSSIAN_TEACHER, 0)

    def test_rejects_nonunit_orthogonal(self):
        with pytest.raises(ValueError):
            Dataset(np.array([[2.0, 0.0], [0.0, 1.0]]), np.zeros(2),
                    DatasetKind.ORTHOGONAL, 0)

    def test_rejects_tampered_labels(self):
        ds = gen_assumption1(3, seed=1)
        with pytest.raises(ValueError):
            Dataset(ds.points, ds.labels + 1e-9, DatasetKind.ASSUMPTION1, 1,
                    eta=1e-3, noise_std=1e-3)

    def test_points_are_immutable(self):
        ds = gen_gaussian_teacher(3, 2, seed=0)
        with pytest.raises(ValueError):
            ds.points[0, 0] = 5.0
