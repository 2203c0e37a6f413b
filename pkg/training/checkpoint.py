"""
Checkpoints
A directory holding the named-tensor archive of both networks and their
optimizer moments, JSON metadata and the flat config file.
"""

import json
import logging
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, NamedTuple, Optional, Tuple, Union

import numpy as np
import torch

from networks import ArchiveError, Generator, load_archive, load_module_arrays, module_arrays, save_archive
from settings import TrainingConfig, config_digest, dump_flat, parse_flat

from .state import RunningLosses, TrainState

logger = logging.getLogger(__name__)

WEIGHTS_STEM = "weights"
METADATA_FILE = "metadata.json"
CONFIG_FILE = "config.txt"


class CheckpointError(RuntimeError):
    """Raised for missing, corrupt or mismatched checkpoints."""


class Checkpoint(NamedTuple):
    config: TrainingConfig
    arrays: Dict[str, np.ndarray]
    metadata: Dict[str, Any]


def _optimizer_arrays(optimizer: torch.optim.Optimizer, prefix: str) -> Tuple[Dict[str, Any], List[dict]]:
    state = optimizer.state_dict()
    arrays = {}
    for index, values in state["state"].items():
        for key, value in values.items():
            arrays[f"{prefix}.{index}.{key}"] = value if isinstance(value, torch.Tensor) else np.asarray(value)
    return arrays, state["param_groups"]


def _load_optimizer(optimizer: torch.optim.Optimizer, arrays: Dict[str, np.ndarray], prefix: str,
                    param_groups: List[dict]):
    marker = prefix + "."
    state: Dict[int, Dict[str, torch.Tensor]] = {}
    for name, value in arrays.items():
        if not name.startswith(marker):
            continue
        index, key = name[len(marker):].split(".", 1)
        state.setdefault(int(index), {})[key] = torch.from_numpy(np.array(value))
    try:
        optimizer.load_state_dict({"state": state, "param_groups": param_groups})
    except (ValueError, KeyError) as e:
        raise CheckpointError(f"optimizer state '{prefix}' does not fit: {e}") from e


def save_checkpoint(directory: Union[str, Path], state: TrainState, cfg: TrainingConfig) -> Path:
    """
    Write weights.bin/weights.json, metadata.json and config.txt.

    Returns:
        The checkpoint directory
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)

    tensors: Dict[str, Any] = {}
    tensors.update(module_arrays(state.generator, "generator"))
    tensors.update(module_arrays(state.discriminator, "discriminator"))
    opt_g, groups_g = _optimizer_arrays(state.opt_g, "optim.generator")
    opt_d, groups_d = _optimizer_arrays(state.opt_d, "optim.discriminator")
    tensors.update(opt_g)
    tensors.update(opt_d)
    tensors["rng.torch"] = torch.get_rng_state()
    save_archive(directory / WEIGHTS_STEM, tensors)

    metadata = {
        "epoch": state.epoch,
        "step": state.step,
        "config_digest": config_digest(cfg),
        "rng": {"sampler": state.sampler_state},
        "param_groups": {"generator": groups_g, "discriminator": groups_d},
        "running": state.running.to_dict(),
        "created_at": datetime.now(timezone.utc).isoformat(),
    }
    with open(directory / METADATA_FILE, "w", encoding="utf-8") as f:
        json.dump(metadata, f, indent=2, sort_keys=True)
        f.write("\n")
    (directory / CONFIG_FILE).write_text(dump_flat(cfg), encoding="utf-8")

    logger.info(f"Checkpoint written to {directory} (epoch {state.epoch}, step {state.step})")
    return directory


def read_checkpoint(directory: Union[str, Path], expected: Optional[TrainingConfig] = None) -> Checkpoint:
    """
    Read a checkpoint directory.

    Args:
        directory: checkpoint directory
        expected: if given, its digest must equal the recorded one

    Raises:
        CheckpointError: missing files, corrupt archive or config mismatch
    """
    directory = Path(directory)
    metadata_path, config_path = directory / METADATA_FILE, directory / CONFIG_FILE
    if not metadata_path.is_file() or not config_path.is_file():
        raise CheckpointError(f"not a checkpoint directory: {directory}")

    with open(metadata_path, "r", encoding="utf-8") as f:
        metadata = json.load(f)
    try:
        config = TrainingConfig.model_validate(parse_flat(config_path.read_text(encoding="utf-8")))
        arrays = load_archive(directory / WEIGHTS_STEM)
    except (ValueError, ArchiveError) as e:
        raise CheckpointError(f"unreadable checkpoint {directory}: {e}") from e

    digest = config_digest(config)
    if digest != metadata.get("config_digest"):
        raise CheckpointError(f"{CONFIG_FILE} does not match the recorded config digest")
    if expected is not None and config_digest(expected) != digest:
        raise CheckpointError("checkpoint was written with a different configuration")
    return Checkpoint(config=config, arrays=arrays, metadata=metadata)


def restore_state(checkpoint: Checkpoint, state: TrainState) -> TrainState:
    """Load networks, optimizer moments, RNG and counters into an existing state."""
    arrays, metadata = checkpoint.arrays, checkpoint.metadata
    try:
        load_module_arrays(state.generator, arrays, "generator")
        load_module_arrays(state.discriminator, arrays, "discriminator")
    except ArchiveError as e:
        raise CheckpointError(str(e)) from e
    _load_optimizer(state.opt_g, arrays, "optim.generator", metadata["param_groups"]["generator"])
    _load_optimizer(state.opt_d, arrays, "optim.discriminator", metadata["param_groups"]["discriminator"])
    if "rng.torch" in arrays:
        torch.set_rng_state(torch.from_numpy(np.array(arrays["rng.torch"])))

    state.epoch = int(metadata["epoch"])
    state.step = int(metadata["step"])
    state.sampler_state = metadata["rng"]["sampler"]
    state.running = RunningLosses.from_dict(metadata["running"])
    return state


def load_generator(directory: Union[str, Path], cfg: Optional[TrainingConfig] = None) -> Tuple[Generator, TrainingConfig]:
    """
    Generator of a checkpoint, in eval mode.

    Raises:
        CheckpointError: if `cfg` is given and its generator settings differ
    """
    checkpoint = read_checkpoint(directory)
    if cfg is not None and cfg.generator != checkpoint.config.generator:
        raise CheckpointError("generator configuration does not match the checkpoint")
    generator = Generator(checkpoint.config.generator)
    try:
        load_module_arrays(generator, checkpoint.arrays, "generator")
    except ArchiveError as e:
        raise CheckpointError(str(e)) from e
    return generator.eval(), checkpoint.config
