"""Constant-then-linear learning-rate schedule."""

import numpy as np
import pytest

from settings import TrainingConfig
from training import lr_schedule


@pytest.fixture
def cfg() -> TrainingConfig:
    return TrainingConfig()


@pytest.mark.parametrize("epoch, expected", [
    (0, 1e-4),
    (20, 1e-4),
    (40, 1e-4),
    (70, 5.005e-5),
    (100, 1e-7),
])
def test_default_schedule(cfg, epoch, expected):
    assert lr_schedule(epoch, cfg) == pytest.approx(expected, rel=1e-12)


def test_continuous_and_non_increasing(cfg):
    epochs = np.linspace(0, 100, 2001)
    rates = np.array([lr_schedule(e, cfg) for e in epochs])
    assert np.all(np.diff(rates) <= 0.0)
    # steepest allowed step is the decay slope times the grid spacing
    slope = (cfg.lr_initial - cfg.lr_final) / (cfg.total_epochs - cfg.decay_start_epoch)
    assert np.max(np.abs(np.diff(rates))) <= slope * (epochs[1] - epochs[0]) * (1 + 1e-9)


def test_fractional_epochs(cfg):
    assert lr_schedule(40.5, cfg) == pytest.approx(1e-4 - (1e-4 - 1e-7) / 120, rel=1e-12)


def test_no_decay_window():
    cfg = TrainingConfig(total_epochs=0, decay_start_epoch=0, lr_initial=3e-4, lr_final=3e-4)
    assert lr_schedule(0, cfg) == 3e-4
