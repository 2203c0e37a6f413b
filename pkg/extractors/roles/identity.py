"""
Identity Embedders
Networks mapping a face crop to an identity feature vector.
"""

import torch
from torch import nn

from ..base_extractor import ExtractorConfig, FeatureExtractor, seeded


class ConvIdentityEmbedder(FeatureExtractor):
    """
    Small fixed-seed convolutional encoder producing `embedding_dim` features.

    Stand-in for a pretrained face-recognition embedder; the weights are a
    deterministic function of the configured seed.
    """

    role = "identity"

    def __init__(self, config: ExtractorConfig):
        super().__init__(config)
        with seeded(config.seed):
            self.features = nn.Sequential(
                nn.Conv2d(3, 16, kernel_size=3, stride=2, padding=1),
                nn.LeakyReLU(0.2),
                nn.Conv2d(16, 32, kernel_size=3, stride=2, padding=1),
                nn.LeakyReLU(0.2),
                nn.Conv2d(32, 64, kernel_size=3, stride=2, padding=1),
                nn.LeakyReLU(0.2),
                nn.AdaptiveAvgPool2d(1),
                nn.Flatten(),
            )
            self.head = nn.Linear(64, config.embedding_dim)
        self.freeze()

    def extract(self, image: torch.Tensor) -> torch.Tensor:
        return self.head(self.features(image))
