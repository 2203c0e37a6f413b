"""
Named-Tensor Archives
Raw little-endian tensor bytes plus a JSON manifest (name -> dtype, shape,
byte offset) so that any runtime can read the parameters back.
"""

import json
import logging
from pathlib import Path
from typing import Dict, Mapping, Union

import numpy as np
import torch
from torch import nn

logger = logging.getLogger(__name__)

ARCHIVE_VERSION = 1


class ArchiveError(ValueError):
    """Raised when an archive is missing, corrupt or does not fit a module."""


def _as_array(value) -> np.ndarray:
    if isinstance(value, torch.Tensor):
        value = value.detach().cpu().numpy()
    return np.ascontiguousarray(value)


def save_archive(stem: Union[str, Path], tensors: Mapping[str, object]) -> Path:
    """
    Write `<stem>.bin` and `<stem>.json`.

    Args:
        stem: path without suffix
        tensors: name -> numpy array or torch tensor

    Returns:
        Path of the manifest file
    """
    stem = Path(stem)
    stem.parent.mkdir(parents=True, exist_ok=True)

    manifest = {"version": ARCHIVE_VERSION, "tensors": {}}
    offset = 0
    with open(stem.with_suffix(".bin"), "wb") as f:
        for name in sorted(tensors):
            array = _as_array(tensors[name])
            data = array.astype(array.dtype.newbyteorder("<"), copy=False).tobytes()
            manifest["tensors"][name] = {
                "dtype": array.dtype.name,
                "shape": list(array.shape),
                "offset": offset,
                "nbytes": len(data),
            }
            f.write(data)
            offset += len(data)

    manifest_path = stem.with_suffix(".json")
    with open(manifest_path, "w", encoding="utf-8") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write("\n")
    return manifest_path


def load_archive(stem: Union[str, Path]) -> Dict[str, np.ndarray]:
    """Read an archive written by save_archive."""
    stem = Path(stem)
    manifest_path, blob_path = stem.with_suffix(".json"), stem.with_suffix(".bin")
    if not manifest_path.exists() or not blob_path.exists():
        raise ArchiveError(f"archive not found: {stem}")

    with open(manifest_path, "r", encoding="utf-8") as f:
        manifest = json.load(f)
    blob = blob_path.read_bytes()

    arrays = {}
    for name, meta in manifest["tensors"].items():
        start, end = meta["offset"], meta["offset"] + meta["nbytes"]
        if end > len(blob):
            raise ArchiveError(f"tensor '{name}' runs past the end of {blob_path.name}")
        dtype = np.dtype(meta["dtype"]).newbyteorder("<")
        arrays[name] = np.frombuffer(blob[start:end], dtype=dtype).reshape(meta["shape"]).copy()
    return arrays


def module_arrays(module: nn.Module, prefix: str) -> Dict[str, np.ndarray]:
    return {f"{prefix}.{name}": _as_array(value) for name, value in module.state_dict().items()}


def load_module_arrays(module: nn.Module, arrays: Mapping[str, np.ndarray], prefix: str):
    """Load `prefix.*` entries into a module's state dict (strict)."""
    marker = prefix + "."
    state = {
        name[len(marker):]: torch.from_numpy(np.asarray(value))
        for name, value in arrays.items()
        if name.startswith(marker)
    }
    try:
        module.load_state_dict(state, strict=True)
    except RuntimeError as e:
        raise ArchiveError(f"parameters under '{prefix}' do not fit the module: {e}") from e
