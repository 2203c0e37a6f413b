"""Extractor registry, frozen feature networks and reference landmark detection."""

import numpy as np
import pytest
import torch

from extractors import (
    DetectionError,
    ExtractorError,
    PixelExtractor,
    ReferenceDetector,
    build_extractor,
)
from extractors.roles.perceptual import VGG19_ALIASES, VGG19_CONV_LAYERS
from geometry import Layout, LandmarkSet


def _batch(seed: int = 0, size: int = 32) -> torch.Tensor:
    return torch.rand(2, 3, size, size, generator=torch.Generator().manual_seed(seed)) * 2 - 1


class TestRegistry:

    def test_unknown_descriptor(self):
        with pytest.raises(ExtractorError, match="Unknown extractor"):
            build_extractor("arcface")

    def test_role_is_checked(self):
        with pytest.raises(ExtractorError, match="role"):
            build_extractor("random-perceptual", role="identity")
        assert build_extractor("conv-identity", role="identity").role == "identity"

    def test_built_extractors_are_frozen(self):
        for name in ("conv-identity", "random-perceptual"):
            extractor = build_extractor(name)
            assert not extractor.training
            assert all(not p.requires_grad for p in extractor.parameters())

    def test_unknown_vgg_layer_is_rejected(self):
        with pytest.raises(ExtractorError, match="unknown VGG19 layer"):
            build_extractor("vgg19:conv9_9")

    def test_vgg_aliases_name_real_layers(self):
        assert VGG19_ALIASES["third-conv"] == "conv2_1"
        assert VGG19_ALIASES["third-block"] == "conv3_1"
        assert all(alias in VGG19_CONV_LAYERS for alias in VGG19_ALIASES.values())


class TestIdentityEmbedder:

    def test_output_dimension(self):
        embedder = build_extractor("conv-identity", embedding_dim=24)
        assert embedder(_batch()).shape == (2, 24)
        assert embedder.embed(_batch()).shape == (2, 24)

    def test_weights_depend_only_on_seed(self):
        a = build_extractor("conv-identity", seed=3)
        b = build_extractor("conv-identity", seed=3)
        c = build_extractor("conv-identity", seed=4)
        images = _batch(1)
        assert torch.equal(a(images), b(images))
        assert not torch.equal(a(images), c(images))

    def test_global_random_stream_is_untouched(self):
        torch.manual_seed(0)
        expected = torch.rand(3)
        torch.manual_seed(0)
        build_extractor("conv-identity", seed=11)
        assert torch.equal(torch.rand(3), expected)


class TestPerceptual:

    def test_random_features_are_maps(self):
        extractor = build_extractor("random-perceptual")
        features = extractor(_batch(size=64))
        assert features.shape == (2, 64, 16, 16)
        assert extractor.pooled(_batch(size=64)).shape == (2, 64)

    def test_pixel_extractor_is_identity(self):
        extractor = build_extractor("pixels")
        assert isinstance(extractor, PixelExtractor)
        images = _batch(2)
        assert torch.equal(extractor(images), images)
        torch.testing.assert_close(extractor.pooled(images), images.mean(dim=(2, 3)))

    @pytest.mark.slow
    def test_vgg19_third_block(self):
        extractor = build_extractor("vgg19:third-block")
        assert extractor(_batch(size=32)).shape == (2, 256, 8, 8)


class TestReferenceDetector:

    @staticmethod
    def _reference(seed: int):
        rng = np.random.default_rng(seed)
        image = rng.uniform(-1, 1, size=(16, 16, 3))
        landmarks = LandmarkSet(points=rng.uniform(0, 16, size=(18, 2)), layout=Layout.SYNTHETIC18)
        return image, landmarks

    def test_exact_match(self):
        references = [self._reference(i) for i in range(3)]
        detector = ReferenceDetector(references)
        assert len(detector) == 3
        for image, landmarks in references:
            assert detector(image) is landmarks

    def test_float32_round_trip_still_matches(self):
        references = [self._reference(i) for i in range(3)]
        detector = ReferenceDetector(references)
        image, landmarks = references[1]
        assert detector.detect(image.astype(np.float32).astype(np.float64)) is landmarks

    def test_nearest_image_fallback(self):
        references = [self._reference(i) for i in range(3)]
        detector = ReferenceDetector(references)
        image, landmarks = references[2]
        assert detector.detect(np.clip(image + 0.05, -1, 1)) is landmarks

    def test_empty_or_unmatched_shape(self):
        with pytest.raises(DetectionError):
            ReferenceDetector().detect(np.zeros((16, 16, 3)))
        detector = ReferenceDetector([self._reference(0)])
        with pytest.raises(DetectionError, match="shape"):
            detector.detect(np.zeros((8, 8, 3)))
