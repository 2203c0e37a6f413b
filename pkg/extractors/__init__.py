"""
Feature Extractors
Frozen identity embedders, perceptual feature stacks and landmark detectors
behind one descriptor-keyed registry.
"""

from typing import Dict, Optional, Type

from .base_extractor import ExtractorConfig, ExtractorError, FeatureExtractor, IdentityEmbedding, seeded
from .roles.identity import ConvIdentityEmbedder
from .roles.landmarks import DetectionError, LandmarkDetector, ReferenceDetector
from .roles.perceptual import PixelExtractor, RandomConvPerceptual, VGG19Perceptual

EXTRACTORS: Dict[str, Type[FeatureExtractor]] = {
    "conv-identity": ConvIdentityEmbedder,
    "random-perceptual": RandomConvPerceptual,
    "pixels": PixelExtractor,
    "vgg19": VGG19Perceptual,
}


def build_extractor(descriptor: str, seed: int = 0, embedding_dim: int = 128,
                    pretrained: bool = False, role: Optional[str] = None) -> FeatureExtractor:
    """
    Create an extractor from a descriptor string.

    Args:
        descriptor: "name" or "name:layer", e.g. "conv-identity", "vgg19:third-block"
        seed: seed for fixed random weights
        embedding_dim: output width of identity embedders
        pretrained: load published weights where the extractor has them
        role: if given, the extractor must have this role

    Returns:
        Frozen FeatureExtractor in eval mode
    """
    name, _, layer = descriptor.partition(":")
    if name not in EXTRACTORS:
        raise ExtractorError(f"Unknown extractor '{descriptor}'. Available: {sorted(EXTRACTORS)}")
    extractor_cls = EXTRACTORS[name]
    if role is not None and extractor_cls.role != role:
        raise ExtractorError(f"extractor '{descriptor}' has role {extractor_cls.role}, expected {role}")

    config = ExtractorConfig(
        descriptor=descriptor,
        seed=seed,
        embedding_dim=embedding_dim,
        pretrained=pretrained,
        layer=layer or None,
    )
    return extractor_cls(config).freeze()


__all__ = [
    "ExtractorConfig",
    "ExtractorError",
    "FeatureExtractor",
    "IdentityEmbedding",
    "seeded",
    "ConvIdentityEmbedder",
    "DetectionError",
    "LandmarkDetector",
    "ReferenceDetector",
    "PixelExtractor",
    "RandomConvPerceptual",
    "VGG19Perceptual",
    "EXTRACTORS",
    "build_extractor",
]
