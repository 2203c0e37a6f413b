"""
Configuration
Typed configuration tree for every subsystem, loaded from YAML or from the
flat `key = value` text format, plus environment-driven runtime settings.
"""

import hashlib
import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Sequence, Tuple, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from data.scenarios import ScenarioSpec
from geometry.alignment import DEFAULT_TEMPLATE_FRACTIONS, AnchorTemplate
from networks import DiscriminatorConfig, GeneratorConfig
from training.losses import LossWeights

logger = logging.getLogger(__name__)

LOG_FORMAT = '%(asctime)s | %(levelname)-8s | %(name)s:%(funcName)s:%(lineno)d - %(message)s'


class GeometryConfig(BaseModel):
    """Normalization and boundary-map rendering."""
    model_config = ConfigDict(extra="forbid")

    crop_size: int = Field(256, gt=0)
    template: List[Tuple[float, float]] = [tuple(p) for p in DEFAULT_TEMPLATE_FRACTIONS]
    boundary_channels: int = Field(3, ge=1, le=3)
    line_width: float = Field(1.0, gt=0.0)
    density: float = Field(1.0, gt=0.0)
    anchor_tolerance: float = Field(0.5, gt=0.0)
    align: bool = True

    def anchor_template(self) -> AnchorTemplate:
        return AnchorTemplate.from_fractions(self.template, self.crop_size)


class ExtractorsConfig(BaseModel):
    """Descriptors of the frozen feature extractors."""
    model_config = ConfigDict(extra="forbid")

    identity: str = "conv-identity"
    perceptual: str = "random-perceptual"
    fid: str = "random-perceptual"
    embedding_dim: int = Field(128, gt=0)
    seed: int = 0
    pretrained: bool = False


class OptimizerConfig(BaseModel):
    """Adam hyperparameters shared by both networks."""
    model_config = ConfigDict(extra="forbid")

    beta1: float = Field(0.5, ge=0.0, lt=1.0)
    beta2: float = Field(0.999, ge=0.0, lt=1.0)
    eps: float = Field(1e-8, gt=0.0)


class EvaluationConfig(BaseModel):
    """Pair selection and parallelism for evaluation."""
    model_config = ConfigDict(extra="forbid")

    pairs: Literal["scenario", "self"] = "scenario"
    num_pairs: int = Field(16, ge=1)
    workers: int = Field(1, ge=1)


class SyntheticConfig(BaseModel):
    """Synthetic dataset generation."""
    model_config = ConfigDict(extra="forbid")

    identities: int = Field(4, ge=1)
    expressions: int = Field(3, ge=1)
    size: int = Field(256, gt=0)
    pose_jitter: float = Field(0.0, ge=0.0)


class TrainingConfig(BaseModel):
    """Root configuration."""
    model_config = ConfigDict(extra="forbid")

    geometry: GeometryConfig = GeometryConfig()
    generator: GeneratorConfig = GeneratorConfig()
    discriminator: DiscriminatorConfig = DiscriminatorConfig()
    losses: LossWeights = LossWeights()
    extractors: ExtractorsConfig = ExtractorsConfig()
    scenario: ScenarioSpec = ScenarioSpec()
    optimizer: OptimizerConfig = OptimizerConfig()
    evaluation: EvaluationConfig = EvaluationConfig()
    synthetic: SyntheticConfig = SyntheticConfig()

    lr_initial: float = Field(1e-4, ge=0.0)
    lr_final: float = Field(1e-7, ge=0.0)
    decay_start_epoch: int = Field(40, ge=0)
    total_epochs: int = Field(100, ge=0)
    max_steps: Optional[int] = Field(None, ge=0)
    batch_size: int = Field(1, ge=1)
    seed: int = 0
    checkpoint_interval: int = Field(0, ge=0)
    log_interval: int = Field(50, ge=1)

    @model_validator(mode="after")
    def _consistent(self) -> "TrainingConfig":
        if self.lr_final > self.lr_initial:
            raise ValueError(f"lr_final ({self.lr_final}) must not exceed lr_initial ({self.lr_initial})")
        if self.total_epochs > 0 and self.decay_start_epoch >= self.total_epochs:
            raise ValueError(
                f"decay_start_epoch ({self.decay_start_epoch}) must be below total_epochs ({self.total_epochs})"
            )
        if self.geometry.crop_size != self.generator.crop_size:
            raise ValueError(
                f"geometry.crop_size ({self.geometry.crop_size}) and generator.crop_size "
                f"({self.generator.crop_size}) must match"
            )
        return self


class RuntimeSettings(BaseSettings):
    """Process-level settings from ACTGAN_* environment variables."""
    model_config = SettingsConfigDict(env_prefix="ACTGAN_", extra="ignore")

    log_level: str = "INFO"
    num_threads: Optional[int] = None
    deterministic: bool = True


def configure_logging(level: Union[str, int] = "INFO"):
    logging.basicConfig(level=level, format=LOG_FORMAT)


def _set_dotted(data: Dict[str, Any], key: str, value: Any, strict: bool = False):
    parts = key.split(".")
    node = data
    for part in parts[:-1]:
        if part not in node or not isinstance(node[part], dict):
            if strict:
                raise ValueError(f"unknown config key '{key}'")
            node[part] = {}
        node = node[part]
    if strict and parts[-1] not in node:
        raise ValueError(f"unknown config key '{key}'")
    node[parts[-1]] = value


def _flatten(data: Dict[str, Any], prefix: str = "") -> Dict[str, Any]:
    flat = {}
    for key, value in data.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            flat.update(_flatten(value, name + "."))
        else:
            flat[name] = value
    return flat


def _yaml_value(value: Any) -> str:
    text = yaml.safe_dump(value, default_flow_style=True, width=math.inf)
    if text.endswith("\n...\n"):
        text = text[: -len("\n...\n")]
    return text.strip()


def parse_flat(text: str) -> Dict[str, Any]:
    """
    Parse `key = value` lines into a nested dict.

    Dotted keys open sections; values are YAML scalars or flow collections;
    blank lines and lines starting with '#' are ignored.
    """
    data: Dict[str, Any] = {}
    for number, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        key, sep, value = stripped.partition("=")
        if not sep or not key.strip():
            raise ValueError(f"line {number}: expected 'key = value', got {line!r}")
        _set_dotted(data, key.strip(), yaml.safe_load(value.strip()) if value.strip() else None)
    return data


def dump_flat(cfg: BaseModel) -> str:
    flat = _flatten(cfg.model_dump(mode="json"))
    return "".join(f"{key} = {_yaml_value(value)}\n" for key, value in flat.items())


def load_config(path: Optional[Union[str, Path]] = None) -> TrainingConfig:
    """
    Load a TrainingConfig.

    Args:
        path: .yaml/.yml file, flat key = value file, or None for defaults

    Returns:
        Validated TrainingConfig
    """
    if path is None:
        return TrainingConfig()
    path = Path(path)
    with open(path, "r", encoding="utf-8") as f:
        text = f.read()
    if path.suffix in (".yaml", ".yml"):
        data = yaml.safe_load(text) or {}
    else:
        data = parse_flat(text)
    logger.info(f"Configuration loaded from {path}")
    return TrainingConfig.model_validate(data)


def apply_overrides(cfg: TrainingConfig, overrides: Sequence[str]) -> TrainingConfig:
    """Apply `dotted.key=value` overrides; keys must already exist."""
    data = cfg.model_dump(mode="json")
    for item in overrides:
        key, sep, value = item.partition("=")
        if not sep:
            raise ValueError(f"override must look like key=value, got {item!r}")
        _set_dotted(data, key.strip(), yaml.safe_load(value.strip()) if value.strip() else None, strict=True)
    return TrainingConfig.model_validate(data)


def with_epochs(cfg: TrainingConfig, epochs: int) -> TrainingConfig:
    """
    Change total_epochs; if the decay start no longer fits it moves to 40% of
    the run, matching the default 40/100 proportion.
    """
    update: Dict[str, Any] = {"total_epochs": epochs}
    if epochs > 0 and cfg.decay_start_epoch >= epochs:
        update["decay_start_epoch"] = min(epochs - 1, round(0.4 * epochs))
        logger.info(f"decay_start_epoch rescaled to {update['decay_start_epoch']} for {epochs} epochs")
    return TrainingConfig.model_validate({**cfg.model_dump(mode="json"), **update})


def config_digest(cfg: BaseModel) -> str:
    """SHA-256 of the canonical JSON dump."""
    canonical = json.dumps(cfg.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
