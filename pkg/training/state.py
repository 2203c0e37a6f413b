"""
Training State
Everything a run needs to continue exactly where it stopped.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, Optional

import torch

from networks import Discriminator, Generator

from .losses import LossBreakdown

RUNNING_TERMS = ("identity", "content", "adversarial", "total", "discriminator")


@dataclass
class RunningLosses:
    """Sums of every loss term since the start of the run."""
    sums: Dict[str, float] = field(default_factory=lambda: {term: 0.0 for term in RUNNING_TERMS})
    count: int = 0

    def add(self, breakdown: LossBreakdown, d_loss: torch.Tensor):
        values = breakdown.to_floats()
        values["discriminator"] = float(d_loss)
        for term in RUNNING_TERMS:
            self.sums[term] += values[term]
        self.count += 1

    @property
    def means(self) -> Dict[str, float]:
        if self.count == 0:
            return {term: 0.0 for term in RUNNING_TERMS}
        return {term: total / self.count for term, total in self.sums.items()}

    def to_dict(self) -> Dict[str, Any]:
        return {"sums": dict(self.sums), "count": self.count}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RunningLosses":
        return cls(sums={term: float(data["sums"][term]) for term in RUNNING_TERMS}, count=int(data["count"]))


@dataclass
class TrainState:
    """
    Networks, optimizers and counters of one run.

    Attributes:
        epoch: completed epochs
        step: completed optimization steps
        sampler_state: bit-generator state of the pair sampler
        running: running loss sums
    """
    generator: Generator
    discriminator: Discriminator
    opt_g: torch.optim.Optimizer
    opt_d: torch.optim.Optimizer
    epoch: int = 0
    step: int = 0
    sampler_state: Optional[Dict[str, Any]] = None
    running: RunningLosses = field(default_factory=RunningLosses)

    def set_lr(self, lr: float):
        for optimizer in (self.opt_g, self.opt_d):
            for group in optimizer.param_groups:
                group["lr"] = lr
