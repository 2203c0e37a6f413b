"""
Landmark-Conditioned Discriminator
Five stride-2 convolutions over an image stacked with its boundary map,
globally averaged to one relativistic score.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional

import torch
import torch.nn.functional as F
from pydantic import BaseModel, Field, field_validator
from torch import nn

from .generator import ShapeError

logger = logging.getLogger(__name__)


class DiscriminatorConfig(BaseModel):
    """Configuration for the conditional critic."""
    channels: List[int] = [32, 64, 128, 256, 1]
    negative_slope: float = Field(0.2, ge=0.0)
    norm_eps: float = Field(1e-5, gt=0.0)
    norm_affine: bool = True
    kernel_size: int = 4

    @field_validator("channels")
    @classmethod
    def _five_layers(cls, value: List[int]) -> List[int]:
        if len(value) != 5 or any(c <= 0 for c in value):
            raise ValueError("the discriminator has exactly five positive layer widths")
        return value


@dataclass
class ConditionedSample:
    """An image (B, 3, N, N) stacked with a source boundary map (B, C_b, N, N)."""
    image: torch.Tensor
    condition: torch.Tensor

    def __post_init__(self):
        if self.image.dim() != 4 or self.image.shape[1] != 3:
            raise ShapeError(f"image must be (B, 3, N, N), got {tuple(self.image.shape)}")
        if self.condition.dim() != 4:
            raise ShapeError(f"condition must be (B, C_b, N, N), got {tuple(self.condition.shape)}")
        if self.image.shape[0] != self.condition.shape[0] or self.image.shape[-2:] != self.condition.shape[-2:]:
            raise ShapeError(
                f"image {tuple(self.image.shape)} and condition {tuple(self.condition.shape)} disagree"
            )

    def stacked(self) -> torch.Tensor:
        return torch.cat([self.image, self.condition.to(self.image.dtype)], dim=1)


def instance_norm(x: torch.Tensor, eps: float = 1e-5) -> torch.Tensor:
    """Per-sample, per-channel normalization without affine parameters."""
    return F.instance_norm(x, eps=eps)


class Discriminator(nn.Module):
    """
    Fully-convolutional critic.

    The first layer is not normalized; layers two to four use InstanceNorm;
    all but the last use LeakyReLU.
    """

    def __init__(self, config: Optional[DiscriminatorConfig] = None, condition_channels: int = 3):
        super().__init__()
        self.config = config or DiscriminatorConfig()
        self.condition_channels = condition_channels

        layers = []
        previous = 3 + condition_channels
        last = len(self.config.channels) - 1
        for i, width in enumerate(self.config.channels):
            block = [nn.Conv2d(previous, width, kernel_size=self.config.kernel_size, stride=2, padding=1)]
            if 0 < i < last:
                block.append(nn.InstanceNorm2d(width, eps=self.config.norm_eps, affine=self.config.norm_affine))
            if i < last:
                block.append(nn.LeakyReLU(self.config.negative_slope))
            layers.append(nn.Sequential(*block))
            previous = width
        self.layers = nn.Sequential(*layers)

    def forward(self, image: torch.Tensor, condition: torch.Tensor) -> torch.Tensor:
        return self.score(ConditionedSample(image, condition))

    def score(self, sample: ConditionedSample) -> torch.Tensor:
        """One score per batch element, shape (B,)."""
        if sample.condition.shape[1] != self.condition_channels:
            raise ShapeError(
                f"expected {self.condition_channels} condition channels, got {sample.condition.shape[1]}"
            )
        size = sample.image.shape[-1]
        if sample.image.shape[-2] != size or size % 32:
            raise ShapeError(f"input must be square with side divisible by 32, got {tuple(sample.image.shape)}")
        return self.layers(sample.stacked()).mean(dim=(1, 2, 3))
