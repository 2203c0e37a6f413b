"""
FPN Reenactment Generator
Two feature-pyramid encoders (source and target), a concatenating multi-scale
decoder and a residual add of the target image.
"""

import logging
from typing import List, Literal, Optional, Tuple

import torch
import torch.nn.functional as F
from pydantic import BaseModel, Field, field_validator
from torch import nn

from .backbones import STRIDES, build_backbone

logger = logging.getLogger(__name__)

EncoderId = Literal["source", "target"]


class ShapeError(ValueError):
    """Raised when a tensor does not have the shape a network expects."""


class GeneratorConfig(BaseModel):
    """Configuration for the FPN generator."""
    crop_size: int = 256
    lateral_channels: int = Field(64, gt=0)
    backbone: str = "plain"
    backbone_widths: List[int] = [16, 32, 64, 128, 256]
    pretrained_backbone: bool = False
    share_encoders: bool = False
    decoder_channels: List[int] = [128, 64, 32]
    negative_slope: float = Field(0.2, ge=0.0)

    @field_validator("crop_size")
    @classmethod
    def _crop_divisible(cls, value: int) -> int:
        if value <= 0 or value % STRIDES[-1]:
            raise ValueError(f"crop_size must be a positive multiple of {STRIDES[-1]}, got {value}")
        return value

    @field_validator("decoder_channels")
    @classmethod
    def _decoder_depth(cls, value: List[int]) -> List[int]:
        if len(value) < 2 or any(c <= 0 for c in value):
            raise ValueError("decoder_channels needs at least two positive widths")
        return value


class FeaturePyramid(tuple):
    """P1..P5 at strides 2..32, all with the same channel count."""

    def __new__(cls, levels):
        levels = tuple(levels)
        if len(levels) != len(STRIDES):
            raise ShapeError(f"a feature pyramid has {len(STRIDES)} levels, got {len(levels)}")
        return super().__new__(cls, levels)

    @property
    def channels(self) -> int:
        return self[0].shape[1]

    @property
    def shapes(self) -> List[Tuple[int, ...]]:
        return [tuple(level.shape) for level in self]


def check_image(image: torch.Tensor, crop_size: int, name: str = "image"):
    expected = (3, crop_size, crop_size)
    if image.dim() != 4 or tuple(image.shape[1:]) != expected:
        raise ShapeError(f"{name}: expected (B, {', '.join(map(str, expected))}), got {tuple(image.shape)}")


class FPNEncoder(nn.Module):
    """Bottom-up backbone, 1x1 laterals and a nearest-neighbour top-down path."""

    def __init__(self, config: GeneratorConfig):
        super().__init__()
        self.config = config
        self.backbone = build_backbone(
            config.backbone,
            config.backbone_widths,
            negative_slope=config.negative_slope,
            pretrained=config.pretrained_backbone,
        )
        self.laterals = nn.ModuleList([
            nn.Conv2d(width, config.lateral_channels, kernel_size=1)
            for width in self.backbone.out_channels
        ])

    def forward(self, image: torch.Tensor) -> FeaturePyramid:
        check_image(image, self.config.crop_size)
        bottom_up = self.backbone(image)
        lateral = [conv(feature) for conv, feature in zip(self.laterals, bottom_up)]

        merged = [lateral[-1]]
        for feature in reversed(lateral[:-1]):
            top = F.interpolate(merged[0], size=feature.shape[-2:], mode="nearest")
            merged.insert(0, feature + top)
        return FeaturePyramid(merged)


class PyramidDecoder(nn.Module):
    """
    Decodes source and target pyramids into a residual image.

    The top four levels of both pyramids are upsampled to stride 4 and
    concatenated; the target's stride-2 map is added after the first upsampling.
    """

    def __init__(self, config: GeneratorConfig):
        super().__init__()
        self.config = config
        d = config.lateral_channels
        widths = config.decoder_channels
        act = lambda: nn.LeakyReLU(config.negative_slope)

        self.head = nn.Sequential(nn.Conv2d(8 * d, widths[0], kernel_size=3, padding=1), act())
        self.skip = nn.Identity() if widths[0] == d else nn.Conv2d(d, widths[0], kernel_size=1)
        self.middle = nn.Sequential(*[
            nn.Sequential(nn.Conv2d(widths[i - 1], widths[i], kernel_size=3, padding=1), act())
            for i in range(1, len(widths) - 1)
        ])
        self.tail = nn.Sequential(nn.Conv2d(widths[-2], widths[-1], kernel_size=3, padding=1), act())
        self.output = nn.Conv2d(widths[-1], 3, kernel_size=3, padding=1)

    def forward(self, src_pyr: FeaturePyramid, tgt_pyr: FeaturePyramid,
                tgt_image: torch.Tensor) -> torch.Tensor:
        if src_pyr.shapes != tgt_pyr.shapes:
            raise ShapeError(f"pyramid mismatch: {src_pyr.shapes} vs {tgt_pyr.shapes}")
        if src_pyr.channels != self.config.lateral_channels:
            raise ShapeError(
                f"pyramid has {src_pyr.channels} channels, decoder expects {self.config.lateral_channels}"
            )
        check_image(tgt_image, self.config.crop_size, name="tgt_image")

        stride4 = src_pyr[1].shape[-2:]
        upsampled = [
            F.interpolate(level, size=stride4, mode="nearest")
            for level in list(src_pyr[1:]) + list(tgt_pyr[1:])
        ]
        x = self.head(torch.cat(upsampled, dim=1))
        x = F.interpolate(x, scale_factor=2, mode="nearest") + self.skip(tgt_pyr[0])
        x = self.middle(x)
        x = F.interpolate(x, scale_factor=2, mode="nearest")
        x = self.tail(x)
        return torch.clamp(self.output(x) + tgt_image, -1.0, 1.0)


class Generator(nn.Module):
    """
    End-to-end reenactment generator.

    With share_encoders the source and target images go through one encoder
    (siamese); otherwise each has its own parameters.
    """

    def __init__(self, config: Optional[GeneratorConfig] = None):
        super().__init__()
        self.config = config or GeneratorConfig()
        self.source_encoder = FPNEncoder(self.config)
        self.target_encoder = None if self.config.share_encoders else FPNEncoder(self.config)
        self.decoder = PyramidDecoder(self.config)

    def encoder(self, encoder_id: EncoderId) -> FPNEncoder:
        if encoder_id not in ("source", "target"):
            raise ValueError(f"encoder_id must be 'source' or 'target', got {encoder_id!r}")
        if encoder_id == "target" and self.target_encoder is not None:
            return self.target_encoder
        return self.source_encoder

    def encode_pyramid(self, image: torch.Tensor, encoder_id: EncoderId) -> FeaturePyramid:
        return self.encoder(encoder_id)(image)

    def decode(self, src_pyr: FeaturePyramid, tgt_pyr: FeaturePyramid,
               tgt_image: torch.Tensor) -> torch.Tensor:
        return self.decoder(src_pyr, tgt_pyr, tgt_image)

    def forward(self, src_image: torch.Tensor, tgt_image: torch.Tensor) -> torch.Tensor:
        """x_hat = decode(encode(src, source), encode(tgt, target), tgt)."""
        return self.decode(
            self.encode_pyramid(src_image, "source"),
            self.encode_pyramid(tgt_image, "target"),
            tgt_image,
        )

    def generate(self, src_image: torch.Tensor, tgt_image: torch.Tensor) -> torch.Tensor:
        return self(src_image, tgt_image)

    @torch.no_grad()
    def zero_output_projection(self) -> "Generator":
        """Zero the final projection so that generate(src, tgt) == tgt."""
        nn.init.zeros_(self.decoder.output.weight)
        nn.init.zeros_(self.decoder.output.bias)
        return self

    def parameter_count(self) -> int:
        return sum(p.numel() for p in self.parameters())
