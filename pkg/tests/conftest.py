"""
Shared fixtures: small configurations, a synthetic dataset and a sampled
central-difference gradient checker for network parameters.
"""

from typing import Callable

import numpy as np
import pytest
import torch

from data import build_synthetic_manifest, load_manifest
from settings import TrainingConfig


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def synthetic_dir(tmp_path_factory):
    """4 identities x 3 expressions at 64 px."""
    out = tmp_path_factory.mktemp("synthetic")
    build_synthetic_manifest(4, 3, out, seed=0, size=64)
    return out


@pytest.fixture
def synthetic_manifest(synthetic_dir):
    return load_manifest(synthetic_dir)


def tiny_config_data() -> dict:
    return {
        "geometry": {"crop_size": 64},
        "generator": {
            "crop_size": 64,
            "lateral_channels": 8,
            "backbone_widths": [4, 8, 8, 16, 16],
            "decoder_channels": [16, 8, 8],
        },
        "discriminator": {"channels": [8, 16, 16, 16, 1]},
        "extractors": {"embedding_dim": 16},
        "synthetic": {"identities": 4, "expressions": 3, "size": 64},
        "total_epochs": 1,
        "decay_start_epoch": 0,
        "log_interval": 1,
    }


@pytest.fixture
def tiny_config() -> TrainingConfig:
    """Desk-scale networks at N=64 for fast training tests."""
    return TrainingConfig.model_validate(tiny_config_data())


@pytest.fixture
def tiny_config_file(tmp_path):
    import yaml

    path = tmp_path / "tiny.yaml"
    path.write_text(yaml.safe_dump(tiny_config_data()), encoding="utf-8")
    return path


def _relative_error(analytic: float, numeric: float, floor: float = 1e-3) -> float:
    return abs(analytic - numeric) / max(abs(analytic), abs(numeric), floor)


@pytest.fixture
def parameter_gradient_error() -> Callable:
    """
    Worst relative error between autograd and central differences over a
    random sample of scalar parameters.

    Gradients below `floor` in magnitude are compared on an absolute scale.
    """

    def check(module: torch.nn.Module, loss_fn: Callable[[], torch.Tensor], samples: int = 100,
              h: float = 1e-6, seed: int = 0, floor: float = 1e-3) -> float:
        params = [p for p in module.parameters() if p.requires_grad]
        module.zero_grad()
        loss_fn().backward()
        analytic = [p.grad.detach().clone().view(-1) for p in params]

        sizes = np.array([p.numel() for p in params])
        offsets = np.concatenate([[0], np.cumsum(sizes)])
        picks = np.random.default_rng(seed).choice(offsets[-1], size=min(samples, offsets[-1]), replace=False)

        worst = 0.0
        with torch.no_grad():
            for flat_index in picks:
                k = int(np.searchsorted(offsets, flat_index, side="right") - 1)
                i = int(flat_index - offsets[k])
                view = params[k].view(-1)
                original = view[i].item()
                view[i] = original + h
                plus = loss_fn().item()
                view[i] = original - h
                minus = loss_fn().item()
                view[i] = original
                numeric = (plus - minus) / (2.0 * h)
                worst = max(worst, _relative_error(analytic[k][i].item(), numeric, floor))
        return worst

    return check
