"""
Training
Objectives, learning-rate schedule and (in training.trainer) the adversarial loop.
"""

from .losses import (
    LossBreakdown,
    LossWeights,
    NonFiniteLossError,
    identity_loss,
    perceptual_loss,
    ralsgan_discriminator_loss,
    ralsgan_generator_loss,
    total_loss,
)
from .schedule import lr_schedule

__all__ = [
    "LossBreakdown",
    "LossWeights",
    "NonFiniteLossError",
    "identity_loss",
    "perceptual_loss",
    "ralsgan_discriminator_loss",
    "ralsgan_generator_loss",
    "total_loss",
    "lr_schedule",
]
