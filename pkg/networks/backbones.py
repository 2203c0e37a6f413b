"""
Bottom-Up Backbones
Feature extractors producing five maps at strides 2, 4, 8, 16 and 32.
"""

import logging
from abc import ABC, abstractmethod
from typing import Dict, List, Sequence, Tuple, Type

import torch
from torch import nn

logger = logging.getLogger(__name__)

STRIDES: Tuple[int, ...] = (2, 4, 8, 16, 32)


class Backbone(nn.Module, ABC):
    """
    Base class for FPN backbones.

    Subclasses set `out_channels` (one width per stride) and return the five
    feature maps in increasing-stride order.
    """

    out_channels: Tuple[int, ...]

    @abstractmethod
    def forward(self, x: torch.Tensor) -> List[torch.Tensor]:
        pass


class PlainConvBackbone(Backbone):
    """Five stride-2 3x3 convolutions, each followed by LeakyReLU."""

    def __init__(self, widths: Sequence[int] = (16, 32, 64, 128, 256), in_channels: int = 3,
                 negative_slope: float = 0.2, pretrained: bool = False):
        super().__init__()
        if len(widths) != len(STRIDES):
            raise ValueError(f"plain backbone needs {len(STRIDES)} stage widths, got {len(widths)}")
        if pretrained:
            logger.warning("Plain backbone has no pretrained weights; using random initialization")

        stages = []
        previous = in_channels
        for width in widths:
            stages.append(nn.Sequential(
                nn.Conv2d(previous, width, kernel_size=3, stride=2, padding=1),
                nn.LeakyReLU(negative_slope),
            ))
            previous = width
        self.stages = nn.ModuleList(stages)
        self.out_channels = tuple(widths)

    def forward(self, x: torch.Tensor) -> List[torch.Tensor]:
        features = []
        for stage in self.stages:
            x = stage(x)
            features.append(x)
        return features


class ResNet18Backbone(Backbone):
    """torchvision ResNet-18 cut at its five natural strides."""

    def __init__(self, widths: Sequence[int] = (), in_channels: int = 3,
                 negative_slope: float = 0.2, pretrained: bool = False):
        super().__init__()
        from torchvision.models import ResNet18_Weights, resnet18

        if in_channels != 3:
            raise ValueError("ResNet-18 backbone expects 3 input channels")
        net = resnet18(weights=ResNet18_Weights.DEFAULT if pretrained else None)
        self.stages = nn.ModuleList([
            nn.Sequential(net.conv1, net.bn1, net.relu),
            nn.Sequential(net.maxpool, net.layer1),
            net.layer2,
            net.layer3,
            net.layer4,
        ])
        self.out_channels = (64, 64, 128, 256, 512)

    def forward(self, x: torch.Tensor) -> List[torch.Tensor]:
        features = []
        for stage in self.stages:
            x = stage(x)
            features.append(x)
        return features


BACKBONES: Dict[str, Type[Backbone]] = {
    "plain": PlainConvBackbone,
    "resnet18": ResNet18Backbone,
}


def build_backbone(name: str, widths: Sequence[int], negative_slope: float = 0.2,
                   pretrained: bool = False) -> Backbone:
    """
    Create a registered backbone.

    Args:
        name: registry key ("plain", "resnet18")
        widths: per-stage widths (used by the plain backbone)
        negative_slope: LeakyReLU slope for the plain backbone
        pretrained: load published weights when the backbone has them

    Returns:
        Backbone instance
    """
    if name not in BACKBONES:
        raise ValueError(f"Unknown backbone '{name}'. Available: {sorted(BACKBONES)}")
    return BACKBONES[name](widths=widths, negative_slope=negative_slope, pretrained=pretrained)
