"""NMSE, CSIM and FID: hand examples and invariances."""

import numpy as np
import pytest
import torch

from evaluation.metrics import MetricError, csim, fid, frechet_distance, gaussian_stats, nmse, symmetric_sqrt
from geometry import DegenerateGeometryError, Layout, LayoutError, LandmarkSet


def _anchor5(points) -> LandmarkSet:
    return LandmarkSet(points=points, layout=Layout.ANCHOR5)


BASE = [(0.0, 0.0), (10.0, 0.0), (5.0, 5.0), (2.0, 9.0), (8.0, 9.0)]


class TestNMSE:

    def test_identical_sets(self):
        assert nmse(_anchor5(BASE), _anchor5(BASE)) == 0.0

    def test_single_displaced_landmark(self):
        # Five landmarks, one moved by (3, 4): 5 / (5 * 10) * 100
        moved = list(BASE)
        moved[2] = (8.0, 9.0)
        assert nmse(_anchor5(BASE), _anchor5(moved)) == pytest.approx(10.0, abs=1e-9)

    def test_uniform_displacement(self):
        # every landmark off by (3, 4), inter-ocular 10
        src = LandmarkSet(
            points=[(0.0, 0.0), (10.0, 0.0), (5.0, 5.0), (2.0, 9.0), (8.0, 9.0)],
            layout=Layout.ANCHOR5,
        )
        gen = src.with_points(src.points + np.array([3.0, 4.0]))
        assert nmse(src, gen) == pytest.approx(50.0, abs=1e-9)

    def test_two_errors(self):
        # errors (3, 0) and (0, 4) on two of five landmarks, the rest exact
        moved = list(BASE)
        moved[3] = (5.0, 9.0)
        moved[4] = (8.0, 13.0)
        assert nmse(_anchor5(BASE), _anchor5(moved)) == pytest.approx((3 + 4) / (5 * 10) * 100, abs=1e-9)

    def test_rigid_translation_and_scale_invariance(self, rng):
        src = LandmarkSet(points=rng.uniform(0, 100, size=(18, 2)), layout=Layout.SYNTHETIC18)
        gen = src.with_points(src.points + rng.normal(0, 2.0, size=(18, 2)))
        base = nmse(src, gen)
        shift = rng.uniform(-50, 50, size=2)
        assert nmse(src.with_points(src.points + shift), gen.with_points(gen.points + shift)) == pytest.approx(
            base, abs=1e-9
        )
        for s in (0.25, 3.0):
            assert nmse(src.with_points(src.points * s), gen.with_points(gen.points * s)) == pytest.approx(
                base, abs=1e-9
            )

    def test_layout_mismatch(self):
        synthetic = LandmarkSet(points=np.zeros((18, 2)), layout=Layout.SYNTHETIC18)
        with pytest.raises(LayoutError):
            nmse(_anchor5(BASE), synthetic)

    def test_zero_interocular_distance(self):
        degenerate = [(5.0, 5.0), (5.0, 5.0), (5.0, 8.0), (2.0, 9.0), (8.0, 9.0)]
        with pytest.raises(DegenerateGeometryError):
            nmse(_anchor5(degenerate), _anchor5(degenerate))


class TestCSIM:

    def test_examples(self):
        e = np.array([0.2, -1.0, 3.0])
        assert csim(e, e) == pytest.approx(1.0, abs=1e-12)
        assert csim(e, -e) == pytest.approx(-1.0, abs=1e-12)
        assert csim([1.0, 0.0], [0.0, 2.0]) == 0.0

    def test_positive_scale_invariance(self, rng):
        a, b = rng.normal(size=(2, 32))
        assert csim(2.5 * a, 0.01 * b) == pytest.approx(csim(a, b), abs=1e-12)

    def test_accepts_tensors(self):
        a = torch.tensor([1.0, 2.0, 3.0])
        assert csim(a, a) == pytest.approx(1.0, abs=1e-7)

    def test_zero_vector(self):
        with pytest.raises(MetricError, match="zero vector"):
            csim([0.0, 0.0], [1.0, 0.0])

    def test_dimension_mismatch(self):
        with pytest.raises(MetricError):
            csim([1.0, 0.0], [1.0, 0.0, 0.0])


class TestFID:

    def test_copy_is_zero(self, rng):
        features = rng.normal(size=(40, 8))
        assert fid(features, features.copy()) == pytest.approx(0.0, abs=1e-6)

    def test_mean_shift_with_identity_covariance(self):
        assert frechet_distance(np.zeros(2), np.eye(2), np.array([3.0, 4.0]), np.eye(2)) == pytest.approx(
            25.0, abs=1e-9
        )

    def test_one_dimension(self):
        assert frechet_distance(np.zeros(1), np.array([[4.0]]), np.zeros(1), np.array([[1.0]])) == pytest.approx(
            1.0, abs=1e-9
        )

    def test_symmetry(self, rng):
        a = rng.normal(size=(30, 6))
        b = rng.normal(1.0, 2.0, size=(25, 6))
        assert fid(a, b) == pytest.approx(fid(b, a), abs=1e-8)
        assert fid(a, b) > 0.0

    def test_rotation_invariance(self, rng):
        a = rng.normal(size=(30, 5))
        b = rng.normal(0.5, 1.5, size=(30, 5))
        q, _ = np.linalg.qr(rng.normal(size=(5, 5)))
        assert fid(a @ q.T, b @ q.T) == pytest.approx(fid(a, b), abs=1e-6)

    def test_rank_deficient_self_distance(self, rng):
        # fewer samples than dimensions: singular covariances
        features = rng.normal(size=(4, 16))
        assert fid(features, features) == pytest.approx(0.0, abs=1e-6)

    @pytest.mark.parametrize("shape, std", [((64, 8), 3e-3), ((64, 1), 1e-3), ((64, 8), 1e-4)])
    def test_self_distance_at_small_variance(self, rng, shape, std):
        features = rng.normal(scale=std, size=shape)
        assert fid(features, features) == pytest.approx(0.0, abs=1e-6)

    def test_square_root_keeps_small_eigenvalues(self):
        mat = np.diag([1e-12, 4e-12])
        np.testing.assert_allclose(symmetric_sqrt(mat), np.diag([1e-6, 2e-6]), rtol=1e-9, atol=0.0)

    def test_unbiased_covariance(self):
        mu, sigma = gaussian_stats(np.array([[0.0], [2.0]]))
        assert mu[0] == 1.0
        assert sigma[0, 0] == pytest.approx(2.0)

    def test_square_root_clips_negative_eigenvalues(self):
        mat = np.diag([4.0, -1e-3])
        np.testing.assert_allclose(symmetric_sqrt(mat), np.diag([2.0, 0.0]), atol=1e-12)

    def test_too_few_samples(self):
        with pytest.raises(MetricError):
            fid(np.zeros((1, 3)), np.zeros((5, 3)))

    def test_non_finite_features(self):
        features = np.ones((4, 2))
        features[0, 0] = np.inf
        with pytest.raises(MetricError, match="finite"):
            fid(features, np.ones((4, 2)))
