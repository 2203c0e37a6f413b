"""
Training Objectives
Identity, perceptual and relativistic least-squares adversarial losses and
their weighted sum.
"""

import math
from dataclasses import dataclass
from typing import Dict, Mapping, Optional, Union

import torch
import torch.nn.functional as F
from pydantic import BaseModel, Field

from extractors import FeatureExtractor

Scalar = Union[torch.Tensor, float]

TERMS = ("identity", "content", "adversarial")


class NonFiniteLossError(RuntimeError):
    """Raised when a loss term is NaN or infinite."""

    def __init__(self, term: str, step: Optional[int] = None):
        self.term = term
        self.step = step
        where = f" at step {step}" if step is not None else ""
        super().__init__(f"non-finite {term} loss{where}")


class LossWeights(BaseModel):
    """Weights of the content, adversarial and identity terms."""
    content: float = Field(0.01, ge=0.0)
    adversarial: float = Field(0.001, ge=0.0)
    identity: float = Field(0.001, ge=0.0)


@dataclass
class LossBreakdown:
    """Per-term generator losses and their weighted total."""
    identity: torch.Tensor
    content: torch.Tensor
    adversarial: torch.Tensor
    total: torch.Tensor

    def to_floats(self) -> Dict[str, float]:
        return {
            "identity": float(self.identity),
            "content": float(self.content),
            "adversarial": float(self.adversarial),
            "total": float(self.total),
        }


def identity_loss(e_gen: torch.Tensor, e_tgt: torch.Tensor) -> torch.Tensor:
    """Sum of squared differences between two identity embeddings."""
    if e_gen.shape != e_tgt.shape:
        raise ValueError(f"embedding dimensions differ: {tuple(e_gen.shape)} vs {tuple(e_tgt.shape)}")
    return ((e_gen - e_tgt) ** 2).sum()


def perceptual_loss(extractor: FeatureExtractor, generated: torch.Tensor, target: torch.Tensor) -> torch.Tensor:
    """
    Mean squared difference of the extractor's features for two images.

    Args:
        extractor: frozen perceptual feature extractor
        generated: (B, 3, N, N) synthesized image
        target: (B, 3, N, N) target image

    Returns:
        Scalar tensor, zero when the images are equal
    """
    if generated.shape != target.shape:
        raise ValueError(f"image shapes differ: {tuple(generated.shape)} vs {tuple(target.shape)}")
    gen_features = extractor(generated)
    tgt_features = extractor(target)
    if gen_features.shape != tgt_features.shape:
        raise ValueError(
            f"extractor output shapes differ: {tuple(gen_features.shape)} vs {tuple(tgt_features.shape)}"
        )
    return F.mse_loss(gen_features, tgt_features)


def _check_scores(d_real: torch.Tensor, d_fake: torch.Tensor):
    if d_real.numel() == 0 or d_fake.numel() == 0:
        raise ValueError("score batches must be nonempty")


def ralsgan_generator_loss(d_real: torch.Tensor, d_fake: torch.Tensor) -> torch.Tensor:
    """E[(D(real) - E[D(fake)] + 1)^2] + E[(D(fake) - E[D(real)] - 1)^2]"""
    _check_scores(d_real, d_fake)
    return (
        torch.mean((d_real - d_fake.mean() + 1.0) ** 2)
        + torch.mean((d_fake - d_real.mean() - 1.0) ** 2)
    )


def ralsgan_discriminator_loss(d_real: torch.Tensor, d_fake: torch.Tensor) -> torch.Tensor:
    """E[(D(real) - E[D(fake)] - 1)^2] + E[(D(fake) - E[D(real)] + 1)^2]"""
    _check_scores(d_real, d_fake)
    return (
        torch.mean((d_real - d_fake.mean() - 1.0) ** 2)
        + torch.mean((d_fake - d_real.mean() + 1.0) ** 2)
    )


def _is_finite(value: Scalar) -> bool:
    if isinstance(value, torch.Tensor):
        return bool(torch.isfinite(value).all())
    return math.isfinite(value)


def total_loss(parts: Mapping[str, Scalar], w: LossWeights, step: Optional[int] = None) -> LossBreakdown:
    """
    Weighted sum of the identity, content and adversarial terms.

    Raises:
        NonFiniteLossError: naming the first non-finite term
    """
    values = {}
    for term in TERMS:
        value = parts[term]
        if not _is_finite(value):
            raise NonFiniteLossError(term, step)
        values[term] = value if isinstance(value, torch.Tensor) else torch.tensor(value, dtype=torch.float64)

    total = (
        w.content * values["content"]
        + w.adversarial * values["adversarial"]
        + w.identity * values["identity"]
    )
    return LossBreakdown(total=total, **values)
