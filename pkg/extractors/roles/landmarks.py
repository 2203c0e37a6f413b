"""
Landmark Detectors
Sources of landmarks for generated images, used by the NMSE evaluation.
"""

import hashlib
import logging
from abc import ABC, abstractmethod
from typing import Dict, Iterable, List, Tuple

import numpy as np

from data.images import to_uint8
from geometry import LandmarkSet

logger = logging.getLogger(__name__)


class DetectionError(RuntimeError):
    """Raised when a detector cannot produce landmarks for an image."""


def image_digest(image: np.ndarray) -> str:
    """SHA-256 of the uint8 quantization of a [-1, 1] image."""
    quantized = to_uint8(image)
    return hashlib.sha256(quantized.tobytes() + str(quantized.shape).encode()).hexdigest()


class LandmarkDetector(ABC):
    """Interface for anything that returns a LandmarkSet for an (H, W, 3) image in [-1, 1]."""

    @abstractmethod
    def detect(self, image: np.ndarray) -> LandmarkSet:
        pass

    def __call__(self, image: np.ndarray) -> LandmarkSet:
        return self.detect(image)


class ReferenceDetector(LandmarkDetector):
    """
    Looks landmarks up among known (image, landmarks) pairs.

    An exact pixel match (after uint8 quantization) returns that image's
    landmarks; otherwise the landmarks of the nearest known image by mean
    squared pixel distance are returned. With synthetic data the known pairs
    are the rendered faces and their ground truth.
    """

    def __init__(self, references: Iterable[Tuple[np.ndarray, LandmarkSet]] = ()):
        self._images: List[np.ndarray] = []
        self._landmarks: List[LandmarkSet] = []
        self._by_digest: Dict[str, int] = {}
        for image, landmarks in references:
            self.add(image, landmarks)

    def __len__(self) -> int:
        return len(self._images)

    def add(self, image: np.ndarray, landmarks: LandmarkSet):
        image = np.asarray(image, dtype=np.float64)
        self._by_digest.setdefault(image_digest(image), len(self._images))
        self._images.append(image)
        self._landmarks.append(landmarks)

    def detect(self, image: np.ndarray) -> LandmarkSet:
        if not self._images:
            raise DetectionError("reference detector has no known images")
        image = np.asarray(image, dtype=np.float64)
        index = self._by_digest.get(image_digest(image))
        if index is not None:
            return self._landmarks[index]

        best, best_distance = -1, np.inf
        for i, known in enumerate(self._images):
            if known.shape != image.shape:
                continue
            distance = float(np.mean((known - image) ** 2))
            if distance < best_distance:
                best, best_distance = i, distance
        if best < 0:
            raise DetectionError(f"no known image has shape {image.shape}")
        logger.debug(f"No exact match; nearest reference {best} at MSE {best_distance:.5f}")
        return self._landmarks[best]
