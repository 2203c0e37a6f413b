"""
Adversarial Trainer
One pair per propagation: discriminator update on the detached output, then
generator update on the weighted objective, under a per-epoch learning rate.
"""

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
import torch

from data import DatasetManifest, PairSampler, image_to_tensor, load_sample
from extractors import FeatureExtractor, build_extractor
from geometry import LandmarkSet, render_boundary_map
from networks import Discriminator, Generator
from settings import GeometryConfig, TrainingConfig

from .checkpoint import read_checkpoint, restore_state, save_checkpoint
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
from .state import TrainState

logger = logging.getLogger(__name__)

LOG_COLUMNS = ["step", "lr", "L_identity", "L_content", "L_adv", "L_total", "L_D"]
LOSS_LOG_FILE = "loss_log.csv"
CHECKPOINT_DIR = "checkpoint"


@dataclass
class Objective:
    """Frozen extractors, loss weights and conditioning-map settings."""
    embedder: FeatureExtractor
    perceptual: FeatureExtractor
    weights: LossWeights
    geometry: GeometryConfig

    @classmethod
    def from_config(cls, cfg: TrainingConfig) -> "Objective":
        ext = cfg.extractors
        return cls(
            embedder=build_extractor(ext.identity, seed=ext.seed, embedding_dim=ext.embedding_dim,
                                     pretrained=ext.pretrained, role="identity"),
            perceptual=build_extractor(ext.perceptual, seed=ext.seed, pretrained=ext.pretrained,
                                       role="perceptual"),
            weights=cfg.losses,
            geometry=cfg.geometry,
        )


def boundary_condition(landmarks: Union[LandmarkSet, Sequence[LandmarkSet]], geometry: GeometryConfig,
                       dtype: torch.dtype = torch.float32) -> torch.Tensor:
    """(B, C_b, N, N) boundary maps rendered from source landmarks."""
    if isinstance(landmarks, LandmarkSet):
        landmarks = [landmarks]
    maps = [
        render_boundary_map(
            lm,
            geometry.crop_size,
            line_width=geometry.line_width,
            num_channels=geometry.boundary_channels,
            density=geometry.density,
        ).channels
        for lm in landmarks
    ]
    return torch.from_numpy(np.stack(maps)).to(dtype)


def init_state(cfg: TrainingConfig) -> TrainState:
    """Freshly initialized networks and Adam optimizers, seeded by cfg.seed."""
    torch.manual_seed(cfg.seed)
    generator = Generator(cfg.generator)
    discriminator = Discriminator(cfg.discriminator, condition_channels=cfg.geometry.boundary_channels)
    betas = (cfg.optimizer.beta1, cfg.optimizer.beta2)
    return TrainState(
        generator=generator,
        discriminator=discriminator,
        opt_g=torch.optim.Adam(generator.parameters(), lr=cfg.lr_initial, betas=betas, eps=cfg.optimizer.eps),
        opt_d=torch.optim.Adam(discriminator.parameters(), lr=cfg.lr_initial, betas=betas, eps=cfg.optimizer.eps),
    )


def train_step(state: TrainState, src: torch.Tensor, tgt: torch.Tensor,
               src_landmarks: Union[LandmarkSet, Sequence[LandmarkSet]],
               objective: Objective) -> Tuple[TrainState, LossBreakdown, torch.Tensor]:
    """
    One discriminator update followed by one generator update.

    Args:
        state: training state, updated in place
        src: (B, 3, N, N) source images (expression donors)
        tgt: (B, 3, N, N) target images (identity donors)
        src_landmarks: landmarks of each source in crop coordinates
        objective: extractors, weights and boundary-map settings

    Returns:
        (state, generator LossBreakdown, discriminator loss)

    Raises:
        NonFiniteLossError: naming the term and the step
    """
    generator, discriminator = state.generator, state.discriminator
    step = state.step + 1
    condition = boundary_condition(src_landmarks, objective.geometry, dtype=src.dtype)

    generated = generator(src, tgt)

    state.opt_d.zero_grad(set_to_none=True)
    d_loss = ralsgan_discriminator_loss(
        discriminator(src, condition),
        discriminator(generated.detach(), condition),
    )
    if not torch.isfinite(d_loss):
        raise NonFiniteLossError("discriminator", step)
    d_loss.backward()
    state.opt_d.step()

    discriminator.requires_grad_(False)
    try:
        state.opt_g.zero_grad(set_to_none=True)
        adversarial = ralsgan_generator_loss(
            discriminator(src, condition),
            discriminator(generated, condition),
        )
        content = perceptual_loss(objective.perceptual, generated, tgt)
        with torch.no_grad():
            tgt_embedding = objective.embedder(tgt)
        identity = identity_loss(objective.embedder(generated), tgt_embedding)

        breakdown = total_loss(
            {"identity": identity, "content": content, "adversarial": adversarial},
            objective.weights,
            step=step,
        )
        if not torch.isfinite(breakdown.total):
            raise NonFiniteLossError("total", step)
        breakdown.total.backward()
        state.opt_g.step()
    finally:
        discriminator.requires_grad_(True)

    d_loss = d_loss.detach()
    state.step = step
    state.running.add(breakdown, d_loss)
    return state, breakdown, d_loss


class Trainer:
    """
    Owns the networks, optimizers, sampler and loss log of one run.

    Pairs are drawn from the configured scenario; an epoch is |manifest|
    pairs (rounded up to whole batches).
    """

    def __init__(self, manifest: DatasetManifest, cfg: TrainingConfig,
                 output_dir: Optional[Union[str, Path]] = None):
        self.manifest = manifest
        self.cfg = cfg
        self.output_dir = Path(output_dir) if output_dir is not None else None
        self.template = cfg.geometry.anchor_template() if cfg.geometry.align else None

        self.state = init_state(cfg)
        self.objective = Objective.from_config(cfg)
        self.sampler = PairSampler(manifest, cfg.scenario)
        self.steps_per_epoch = math.ceil(len(manifest) / cfg.batch_size)
        self.log: List[Dict[str, float]] = []
        self._cache: Dict[int, Tuple[torch.Tensor, LandmarkSet]] = {}

    @property
    def total_steps(self) -> int:
        steps = self.cfg.total_epochs * self.steps_per_epoch
        if self.cfg.max_steps is not None:
            steps = min(steps, self.cfg.max_steps)
        return steps

    @property
    def checkpoint_dir(self) -> Optional[Path]:
        return self.output_dir / CHECKPOINT_DIR if self.output_dir is not None else None

    def sample(self, index: int) -> Tuple[torch.Tensor, LandmarkSet]:
        """Normalized (1, 3, N, N) image and landmarks of one manifest entry, cached."""
        if index not in self._cache:
            image, landmarks = load_sample(
                self.manifest, self.manifest[index], self.template, tolerance=self.cfg.geometry.anchor_tolerance
            )
            self._cache[index] = (image_to_tensor(image), landmarks)
        return self._cache[index]

    def next_batch(self) -> Tuple[torch.Tensor, torch.Tensor, List[LandmarkSet]]:
        sources, targets, landmarks = [], [], []
        for _ in range(self.cfg.batch_size):
            i, j = self.sampler.sample_indices()
            src, src_landmarks = self.sample(i)
            tgt, _ = self.sample(j)
            sources.append(src)
            targets.append(tgt)
            landmarks.append(src_landmarks)
        return torch.cat(sources), torch.cat(targets), landmarks

    def resume(self, checkpoint_dir: Union[str, Path]):
        """Continue from a checkpoint written with the same configuration."""
        checkpoint = read_checkpoint(checkpoint_dir, expected=self.cfg)
        restore_state(checkpoint, self.state)
        if self.state.sampler_state is not None:
            self.sampler.state = self.state.sampler_state
        if self.output_dir is not None and (self.output_dir / LOSS_LOG_FILE).is_file():
            previous = pd.read_csv(self.output_dir / LOSS_LOG_FILE)
            self.log = previous[previous["step"] <= self.state.step].to_dict("records")
        logger.info(f"Resumed from {checkpoint_dir} at step {self.state.step}")

    def save(self):
        if self.output_dir is None:
            return
        self.state.sampler_state = self.sampler.state
        save_checkpoint(self.checkpoint_dir, self.state, self.cfg)
        self.loss_log().to_csv(self.output_dir / LOSS_LOG_FILE, index=False)

    def loss_log(self) -> pd.DataFrame:
        return pd.DataFrame(self.log, columns=LOG_COLUMNS)

    def train(self) -> Tuple[TrainState, pd.DataFrame]:
        """
        Run until total_epochs (or max_steps) is reached.

        Returns:
            (final TrainState, per-step loss log)
        """
        cfg, state = self.cfg, self.state
        logger.info(
            f"Training {self.total_steps} steps ({self.steps_per_epoch} per epoch), "
            f"generator parameters: {state.generator.parameter_count()}"
        )
        state.generator.train()
        state.discriminator.train()

        while state.step < self.total_steps:
            epoch = state.step // self.steps_per_epoch
            lr = lr_schedule(epoch, cfg)
            state.set_lr(lr)

            src, tgt, landmarks = self.next_batch()
            _, breakdown, d_loss = train_step(state, src, tgt, landmarks, self.objective)
            state.epoch = state.step // self.steps_per_epoch

            values = breakdown.to_floats()
            self.log.append({
                "step": state.step,
                "lr": lr,
                "L_identity": values["identity"],
                "L_content": values["content"],
                "L_adv": values["adversarial"],
                "L_total": values["total"],
                "L_D": float(d_loss),
            })
            if state.step % cfg.log_interval == 0:
                logger.info(
                    f"step {state.step} epoch {epoch} lr {lr:.3e} | L_total {values['total']:.5f} "
                    f"L_content {values['content']:.5f} L_adv {values['adversarial']:.5f} "
                    f"L_identity {values['identity']:.5f} L_D {float(d_loss):.5f}"
                )
            if cfg.checkpoint_interval and state.step % cfg.checkpoint_interval == 0:
                self.save()

        self.save()
        return state, self.loss_log()


def train(manifest: DatasetManifest, cfg: TrainingConfig, output_dir: Optional[Union[str, Path]] = None,
          resume_from: Optional[Union[str, Path]] = None) -> Tuple[TrainState, pd.DataFrame]:
    """
    Train on a manifest.

    Args:
        manifest: dataset supporting cfg.scenario
        cfg: full configuration
        output_dir: where the checkpoint and loss_log.csv go (nothing is written if None)
        resume_from: checkpoint directory to continue from

    Returns:
        (final TrainState, per-step loss log)
    """
    trainer = Trainer(manifest, cfg, output_dir)
    if resume_from is not None:
        trainer.resume(resume_from)
    return trainer.train()
