"""
Face Normalization
Five-point similarity alignment: estimate the transform, resample the crop,
carry the landmarks along.
"""

import logging
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence, Tuple

import numpy as np
from skimage import transform as trans

from .landmarks import (
    DegenerateGeometryError,
    LandmarkSet,
    LayoutError,
    Layout,
    anchor_points,
)

logger = logging.getLogger(__name__)

# Frontal-face proportions of the crop side N
DEFAULT_TEMPLATE_FRACTIONS: Tuple[Tuple[float, float], ...] = (
    (0.35, 0.40),  # left pupil
    (0.65, 0.40),  # right pupil
    (0.50, 0.58),  # nose tip
    (0.39, 0.76),  # left mouth corner
    (0.61, 0.76),  # right mouth corner
)


@dataclass(frozen=True)
class SimilarityTransform:
    """
    p -> scale * R(rotation) * p + translation, in pixel coordinates.
    """
    scale: float = 1.0
    rotation: float = 0.0
    tx: float = 0.0
    ty: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.scale) and self.scale > 0.0):
            raise DegenerateGeometryError(f"similarity scale must be positive, got {self.scale}")

    @property
    def translation(self) -> Tuple[float, float]:
        return (self.tx, self.ty)

    @property
    def matrix(self) -> np.ndarray:
        c = self.scale * math.cos(self.rotation)
        s = self.scale * math.sin(self.rotation)
        return np.array([[c, -s, self.tx], [s, c, self.ty], [0.0, 0.0, 1.0]])

    @classmethod
    def from_matrix(cls, matrix: np.ndarray) -> "SimilarityTransform":
        a, b = matrix[0, 0], matrix[1, 0]
        return cls(
            scale=float(math.hypot(a, b)),
            rotation=float(math.atan2(b, a)),
            tx=float(matrix[0, 2]),
            ty=float(matrix[1, 2]),
        )

    def apply(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=np.float64)
        m = self.matrix
        return points @ m[:2, :2].T + m[:2, 2]

    def inverse(self) -> "SimilarityTransform":
        inv_scale = 1.0 / self.scale
        c, s = math.cos(-self.rotation), math.sin(-self.rotation)
        tx = -inv_scale * (c * self.tx - s * self.ty)
        ty = -inv_scale * (s * self.tx + c * self.ty)
        return SimilarityTransform(scale=inv_scale, rotation=-self.rotation, tx=tx, ty=ty)

    def compose(self, inner: "SimilarityTransform") -> "SimilarityTransform":
        """self ∘ inner: apply `inner` first."""
        return SimilarityTransform.from_matrix(self.matrix @ inner.matrix)


@dataclass(frozen=True)
class AnchorTemplate:
    """Canonical anchor positions inside an N x N crop."""
    points: np.ndarray
    crop_size: int

    def __post_init__(self):
        points = np.asarray(self.points, dtype=np.float64)
        object.__setattr__(self, "points", points)
        if points.shape != (5, 2):
            raise LayoutError(f"anchor template needs 5 points, got shape {points.shape}")
        if self.crop_size <= 0:
            raise LayoutError("crop_size must be positive")
        if not points[0, 0] < points[1, 0]:
            raise LayoutError("left pupil must lie left of the right pupil")
        if np.any(points < 0) or np.any(points >= self.crop_size):
            raise LayoutError("template anchors must lie inside the crop")

    @classmethod
    def from_fractions(cls, fractions: Sequence[Sequence[float]], crop_size: int) -> "AnchorTemplate":
        return cls(points=np.asarray(fractions, dtype=np.float64) * crop_size, crop_size=crop_size)

    @classmethod
    def default(cls, crop_size: int = 256) -> "AnchorTemplate":
        return cls.from_fractions(DEFAULT_TEMPLATE_FRACTIONS, crop_size)

    def as_landmarks(self) -> LandmarkSet:
        return LandmarkSet(points=self.points, layout=Layout.ANCHOR5)


class AlignmentResult(NamedTuple):
    image: np.ndarray
    landmarks: LandmarkSet
    transform: SimilarityTransform
    residual: float


def _as_anchor_array(anchors) -> np.ndarray:
    points = anchors.points if isinstance(anchors, (LandmarkSet, AnchorTemplate)) else anchors
    points = np.asarray(points, dtype=np.float64)
    if points.shape != (5, 2):
        raise LayoutError(f"expected 5 anchor points, got shape {points.shape}")
    if not np.all(np.isfinite(points)):
        raise LayoutError("anchor coordinates must be finite")
    return points


def estimate_similarity(src_anchors, template) -> SimilarityTransform:
    """
    Least-squares similarity mapping source anchors onto the template.

    Args:
        src_anchors: anchor5 LandmarkSet or (5, 2) array
        template: AnchorTemplate or (5, 2) array

    Returns:
        SimilarityTransform T minimising sum ||T(src_i) - template_i||^2

    Raises:
        DegenerateGeometryError: if the scale cannot be recovered
    """
    src = _as_anchor_array(src_anchors)
    dst = _as_anchor_array(template)

    src_spread = float(np.sum((src - src.mean(axis=0)) ** 2))
    dst_spread = float(np.sum((dst - dst.mean(axis=0)) ** 2))
    if src_spread < 1e-12 or dst_spread < 1e-12:
        raise DegenerateGeometryError("anchor points are coincident; similarity scale is unrecoverable")

    tform = trans.SimilarityTransform()
    if not tform.estimate(src, dst) or not np.all(np.isfinite(tform.params)):
        raise DegenerateGeometryError("similarity estimation failed for the given anchors")
    return SimilarityTransform.from_matrix(tform.params)


def warp_crop(image: np.ndarray, t: SimilarityTransform, out_size: int) -> np.ndarray:
    """
    Resample `image` into an out_size x out_size crop through `t`.

    Output pixel (x, y) reads the source at t^-1(x, y) with bilinear
    interpolation; reads outside the source return 0.
    """
    if out_size <= 0:
        raise ValueError("out_size must be positive")
    image = np.asarray(image, dtype=np.float64)
    if image.size == 0:
        raise ValueError("image is empty")

    inverse_map = trans.AffineTransform(matrix=t.inverse().matrix)
    output_shape = (out_size, out_size) + image.shape[2:]
    return trans.warp(
        image,
        inverse_map,
        output_shape=output_shape,
        order=1,
        mode="constant",
        cval=0.0,
        clip=False,
        preserve_range=True,
    )


def align_face(image: np.ndarray, full_landmarks: LandmarkSet, template: AnchorTemplate,
               tolerance: float = 0.5) -> AlignmentResult:
    """Anchor extraction -> similarity estimate -> crop, keeping the transform and residual."""
    anchors = anchor_points(full_landmarks)
    t = estimate_similarity(anchors, template)
    crop = warp_crop(image, t, template.crop_size)
    mapped = full_landmarks.with_points(t.apply(full_landmarks.points))

    residual = float(np.max(np.linalg.norm(t.apply(anchors) - template.points, axis=1)))
    if residual > tolerance:
        logger.warning(f"Anchor residual {residual:.3f}px exceeds tolerance {tolerance:.3f}px")
    return AlignmentResult(image=crop, landmarks=mapped, transform=t, residual=residual)


def normalize_face(image: np.ndarray, full_landmarks: LandmarkSet, template: AnchorTemplate,
                   tolerance: float = 0.5) -> Tuple[np.ndarray, LandmarkSet]:
    """
    Align a face to the anchor template.

    Returns:
        (normalized crop, landmarks mapped through the same transform)
    """
    result = align_face(image, full_landmarks, template, tolerance)
    return result.image, result.landmarks
