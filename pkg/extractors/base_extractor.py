"""
Base Extractor Class
Common behaviour for the frozen networks the losses and metrics read
features from (identity embedders, perceptual feature stacks).
"""

from abc import ABC, abstractmethod
from contextlib import contextmanager
from typing import ClassVar, Literal, Optional

import torch
from pydantic import BaseModel
from torch import nn

Role = Literal["identity", "perceptual"]

# (B, d_e) identity feature vectors; not normalized
IdentityEmbedding = torch.Tensor


class ExtractorError(ValueError):
    """Raised for unknown descriptors or unusable extractor outputs."""


class ExtractorConfig(BaseModel):
    """Configuration for one extractor."""
    descriptor: str
    seed: int = 0
    embedding_dim: int = 128
    pretrained: bool = False
    layer: Optional[str] = None


@contextmanager
def seeded(seed: int):
    """Run a block under a private torch RNG seed, leaving the global stream untouched."""
    with torch.random.fork_rng(devices=[]):
        torch.manual_seed(seed)
        yield


class FeatureExtractor(nn.Module, ABC):
    """
    Base class for all feature extractors.

    Each extractor has:
    - A role ("identity" returns vectors, "perceptual" returns feature maps)
    - A descriptor string it was built from
    - Frozen parameters (never trained here)
    """

    role: ClassVar[Role]

    def __init__(self, config: ExtractorConfig):
        """
        Initialize the base extractor.

        Args:
            config: Extractor configuration
        """
        super().__init__()
        self.config = config

    @property
    def descriptor(self) -> str:
        return self.config.descriptor

    @abstractmethod
    def extract(self, image: torch.Tensor) -> torch.Tensor:
        """
        Compute features for a batch of images.

        Args:
            image: (B, 3, H, W) tensor in [-1, 1]

        Returns:
            (B, d) vectors for identity extractors, (B, C, h, w) maps otherwise
        """
        pass

    def forward(self, image: torch.Tensor) -> torch.Tensor:
        return self.extract(image)

    def embed(self, image: torch.Tensor) -> torch.Tensor:
        return self.extract(image)

    def pooled(self, image: torch.Tensor) -> torch.Tensor:
        """Fixed-length (B, d) vectors: global average of feature maps."""
        features = self.extract(image)
        if features.dim() == 4:
            return features.mean(dim=(2, 3))
        return features.flatten(start_dim=1)

    def freeze(self) -> "FeatureExtractor":
        for param in self.parameters():
            param.requires_grad_(False)
        return self.eval()

    def __repr__(self) -> str:
        """String representation of the extractor."""
        return f"{self.__class__.__name__}(role={self.role}, descriptor={self.descriptor})"
