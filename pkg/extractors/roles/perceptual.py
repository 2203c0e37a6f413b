"""
Perceptual Feature Extractors
Feature maps compared by the content loss and pooled for FID.
"""

import logging
from typing import Dict

import torch
from torch import nn

from ..base_extractor import ExtractorConfig, ExtractorError, FeatureExtractor, seeded

logger = logging.getLogger(__name__)

# Index of each conv layer inside torchvision's vgg19().features
VGG19_CONV_LAYERS: Dict[str, int] = {
    "conv1_1": 0, "conv1_2": 2,
    "conv2_1": 5, "conv2_2": 7,
    "conv3_1": 10, "conv3_2": 12, "conv3_3": 14, "conv3_4": 16,
    "conv4_1": 19, "conv4_2": 21, "conv4_3": 23, "conv4_4": 25,
    "conv5_1": 28, "conv5_2": 30, "conv5_3": 32, "conv5_4": 34,
}
VGG19_ALIASES = {
    "third-conv": "conv2_1",   # third convolution counted over the whole network
    "third-block": "conv3_1",  # first convolution of the third block
}

IMAGENET_MEAN = (0.485, 0.456, 0.406)
IMAGENET_STD = (0.229, 0.224, 0.225)


class PixelExtractor(FeatureExtractor):
    """Features are the raw pixels; turns the content loss into pixel MSE."""

    role = "perceptual"

    def extract(self, image: torch.Tensor) -> torch.Tensor:
        return image


class RandomConvPerceptual(FeatureExtractor):
    """Three fixed random-weight 3x3 convolutions with ReLU."""

    role = "perceptual"

    def __init__(self, config: ExtractorConfig):
        super().__init__(config)
        with seeded(config.seed):
            self.features = nn.Sequential(
                nn.Conv2d(3, 16, kernel_size=3, padding=1),
                nn.ReLU(),
                nn.Conv2d(16, 32, kernel_size=3, stride=2, padding=1),
                nn.ReLU(),
                nn.Conv2d(32, 64, kernel_size=3, stride=2, padding=1),
            )
        self.freeze()

    def extract(self, image: torch.Tensor) -> torch.Tensor:
        return self.features(image)


class VGG19Perceptual(FeatureExtractor):
    """
    Activations of one VGG19 convolution (optionally ImageNet-pretrained).

    The layer is named in the descriptor, e.g. "vgg19:conv2_1" or "vgg19:third-block".
    """

    role = "perceptual"

    def __init__(self, config: ExtractorConfig):
        super().__init__(config)
        from torchvision.models import VGG19_Weights, vgg19

        layer = VGG19_ALIASES.get(config.layer or "third-conv", config.layer or "third-conv")
        if layer not in VGG19_CONV_LAYERS:
            raise ExtractorError(
                f"unknown VGG19 layer '{config.layer}'. Available: {sorted(VGG19_CONV_LAYERS) + sorted(VGG19_ALIASES)}"
            )
        with seeded(config.seed):
            net = vgg19(weights=VGG19_Weights.DEFAULT if config.pretrained else None)
        self.features = net.features[: VGG19_CONV_LAYERS[layer] + 1]
        self.register_buffer("mean", torch.tensor(IMAGENET_MEAN).view(1, 3, 1, 1))
        self.register_buffer("std", torch.tensor(IMAGENET_STD).view(1, 3, 1, 1))
        logger.info(f"VGG19 perceptual features at {layer} (pretrained={config.pretrained})")
        self.freeze()

    def extract(self, image: torch.Tensor) -> torch.Tensor:
        x = ((image + 1.0) / 2.0 - self.mean) / self.std
        return self.features(x)
