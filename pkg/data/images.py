"""
Image I/O
8-bit RGB PNG on disk, (H, W, 3) float64 in [-1, 1] in memory, (B, 3, H, W)
tensors for the networks.
"""

from pathlib import Path
from typing import Sequence, Union

import numpy as np
import torch
from PIL import Image


def from_uint8(pixels: np.ndarray) -> np.ndarray:
    return np.asarray(pixels, dtype=np.float64) / 127.5 - 1.0


def to_uint8(image: np.ndarray) -> np.ndarray:
    """[-1, 1] floats to uint8, rounding to nearest."""
    return np.clip(np.rint((np.asarray(image, dtype=np.float64) + 1.0) * 127.5), 0, 255).astype(np.uint8)


def load_image(path: Union[str, Path]) -> np.ndarray:
    with Image.open(path) as img:
        return from_uint8(np.asarray(img.convert("RGB")))


def save_image(path: Union[str, Path], image: np.ndarray) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(to_uint8(image)).save(path, format="PNG")
    return path


def image_to_tensor(image: np.ndarray, dtype: torch.dtype = torch.float32) -> torch.Tensor:
    """(H, W, 3) array -> (1, 3, H, W) tensor."""
    array = np.ascontiguousarray(np.asarray(image).transpose(2, 0, 1))
    return torch.from_numpy(array).to(dtype).unsqueeze(0)


def tensor_to_image(tensor: torch.Tensor) -> np.ndarray:
    """(1, 3, H, W) or (3, H, W) tensor -> (H, W, 3) float64 array."""
    if tensor.dim() == 4:
        if tensor.shape[0] != 1:
            raise ValueError(f"expected a single image, got batch of {tensor.shape[0]}")
        tensor = tensor[0]
    return tensor.detach().cpu().to(torch.float64).numpy().transpose(1, 2, 0)


def triptych(images: Sequence[np.ndarray]) -> np.ndarray:
    """Images of equal height side by side (target | output | source)."""
    heights = {img.shape[0] for img in images}
    if len(heights) != 1:
        raise ValueError(f"triptych panels need equal heights, got {sorted(heights)}")
    return np.concatenate(list(images), axis=1)
