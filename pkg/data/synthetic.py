"""
Synthetic Faces
Procedural cartoon faces with analytically exact synthetic18 landmarks,
standing in for a real expression dataset.
"""

import logging
import math
from pathlib import Path
from typing import List, Tuple, Union

import numpy as np
from PIL import Image, ImageDraw
from pydantic import BaseModel, Field

from geometry import LandmarkSet, Layout, SimilarityTransform, write_landmarks

from .images import from_uint8, save_image
from .manifest import MANIFEST_NAME, DatasetManifest, ManifestEntry, load_manifest, write_manifest

logger = logging.getLogger(__name__)

Color = Tuple[int, int, int]


class SyntheticFaceParams(BaseModel):
    """
    Face proportions as fractions of the canvas side, expression controls and pose.

    The defaults put the pupils, nose tip and mouth corners on the default
    alignment template.
    """
    head_center: Tuple[float, float] = (0.50, 0.52)
    head_axes: Tuple[float, float] = (0.34, 0.42)
    eye_spacing: float = Field(0.30, gt=0.0, lt=0.6)
    eye_height: float = Field(0.40, gt=0.0, lt=1.0)
    eye_radii: Tuple[float, float] = (0.055, 0.025)
    brow_gap: float = Field(0.07, gt=0.0)
    nose_height: float = Field(0.58, gt=0.0, lt=1.0)
    mouth_height: float = Field(0.76, gt=0.0, lt=1.0)
    mouth_half_width: float = Field(0.11, gt=0.0)

    brow_raise: float = Field(0.0, ge=-1.0, le=1.0)
    mouth_curvature: float = Field(0.0, ge=-1.0, le=1.0)
    mouth_openness: float = Field(0.0, ge=0.0, le=1.0)

    identity_seed: int = 0
    skin: Color = (224, 182, 150)
    background: Color = (70, 90, 120)

    pose_scale: float = Field(1.0, gt=0.0)
    pose_rotation: float = 0.0
    pose_translation: Tuple[float, float] = (0.0, 0.0)

    # displacement per unit of the expression controls
    brow_amplitude: float = 0.03
    curvature_amplitude: float = 0.04
    openness_amplitude: float = 0.06

    @classmethod
    def for_identity(cls, seed: int) -> "SyntheticFaceParams":
        """Proportions and colours fixed by an identity seed."""
        rng = np.random.default_rng(seed)
        jitter = lambda scale: float(rng.uniform(-scale, scale))
        return cls(
            head_axes=(0.34 + jitter(0.02), 0.42 + jitter(0.02)),
            eye_spacing=0.30 + jitter(0.02),
            eye_height=0.40 + jitter(0.015),
            eye_radii=(0.055 + jitter(0.01), 0.025 + jitter(0.005)),
            nose_height=0.58 + jitter(0.015),
            mouth_height=0.76 + jitter(0.015),
            mouth_half_width=0.11 + jitter(0.015),
            identity_seed=seed,
            skin=tuple(int(c) for c in rng.integers(120, 240, size=3)),
            background=tuple(int(c) for c in rng.integers(0, 110, size=3)),
        )

    def with_expression(self, brow_raise: float = 0.0, mouth_curvature: float = 0.0,
                        mouth_openness: float = 0.0) -> "SyntheticFaceParams":
        return self.model_copy(update={
            "brow_raise": brow_raise,
            "mouth_curvature": mouth_curvature,
            "mouth_openness": mouth_openness,
        })

    def with_pose(self, pose: SimilarityTransform) -> "SyntheticFaceParams":
        return self.model_copy(update={
            "pose_scale": pose.scale,
            "pose_rotation": pose.rotation,
            "pose_translation": pose.translation,
        })

    @property
    def pose(self) -> SimilarityTransform:
        tx, ty = self.pose_translation
        return SimilarityTransform(scale=self.pose_scale, rotation=self.pose_rotation, tx=tx, ty=ty)


def expression_for(index: int, seed: int = 0) -> Tuple[float, float, float]:
    """(brow_raise, mouth_curvature, mouth_openness) of expression `index`; index 0 is neutral."""
    if index == 0:
        return 0.0, 0.0, 0.0
    rng = np.random.default_rng([seed, index])
    return (
        float(rng.uniform(-1.0, 1.0)),
        float(rng.uniform(-1.0, 1.0)),
        float(rng.uniform(0.0, 1.0)),
    )


def pose_about_center(size: int, scale: float = 1.0, rotation: float = 0.0,
                      shift: Tuple[float, float] = (0.0, 0.0)) -> SimilarityTransform:
    """Similarity that scales and rotates about the canvas centre, then shifts."""
    c = (size - 1) / 2.0
    to_origin = SimilarityTransform(tx=-c, ty=-c)
    spin = SimilarityTransform(scale=scale, rotation=rotation)
    back = SimilarityTransform(tx=c + shift[0], ty=c + shift[1])
    return back.compose(spin.compose(to_origin))


def neutral_pose_landmarks(params: SyntheticFaceParams, size: int) -> np.ndarray:
    """(18, 2) synthetic18 landmarks at identity pose, in pixels."""
    cx = params.head_center[0]
    ey = params.eye_height
    rx, ry = params.eye_radii
    half = params.eye_spacing / 2.0
    left_x, right_x = cx - half, cx + half
    brow_y = ey - params.brow_gap - params.brow_raise * params.brow_amplitude
    corner_y = params.mouth_height - params.mouth_curvature * params.curvature_amplitude
    lip = params.mouth_openness * params.openness_amplitude / 2.0
    mw = params.mouth_half_width
    chin_y = params.head_center[1] + params.head_axes[1]

    points = [
        # left eye: outer, top, inner, bottom
        (left_x - rx, ey), (left_x, ey - ry), (left_x + rx, ey), (left_x, ey + ry),
        # right eye: outer, top, inner, bottom
        (right_x + rx, ey), (right_x, ey - ry), (right_x - rx, ey), (right_x, ey + ry),
        # brows: outer, inner
        (left_x - rx, brow_y), (left_x + rx, brow_y),
        (right_x + rx, brow_y), (right_x - rx, brow_y),
        # nose tip
        (cx, params.nose_height),
        # mouth: left corner, upper lip, right corner, lower lip
        (cx - mw, corner_y), (cx, params.mouth_height - lip),
        (cx + mw, corner_y), (cx, params.mouth_height + lip),
        # chin
        (cx, chin_y),
    ]
    return np.asarray(points, dtype=np.float64) * size


def _ellipse(center: Tuple[float, float], axes: Tuple[float, float], n: int = 72) -> np.ndarray:
    t = np.linspace(0.0, 2.0 * math.pi, n, endpoint=False)
    return np.stack([center[0] + axes[0] * np.cos(t), center[1] + axes[1] * np.sin(t)], axis=1)


def _quadratic_through(a: np.ndarray, mid: np.ndarray, b: np.ndarray, n: int = 16) -> np.ndarray:
    """Quadratic curve from a to b passing through mid at t = 0.5."""
    control = 2.0 * mid - (a + b) / 2.0
    t = np.linspace(0.0, 1.0, n)[:, None]
    return (1 - t) ** 2 * a + 2 * (1 - t) * t * control + t ** 2 * b


def _xy(points: np.ndarray) -> List[Tuple[float, float]]:
    return [(float(x), float(y)) for x, y in points]


def render_synthetic_face(params: SyntheticFaceParams, size: int = 256) -> Tuple[np.ndarray, LandmarkSet]:
    """
    Draw a face and return it with its exact landmarks.

    Returns:
        ((size, size, 3) image in [-1, 1], synthetic18 LandmarkSet under params.pose)
    """
    pose = params.pose
    neutral = neutral_pose_landmarks(params, size)
    landmarks = LandmarkSet(points=pose.apply(neutral), layout=Layout.SYNTHETIC18)
    stroke = max(1, round(size / 96 * params.pose_scale))

    def shape(points: np.ndarray) -> List[Tuple[float, float]]:
        return _xy(pose.apply(points))

    canvas = Image.new("RGB", (size, size), params.background)
    draw = ImageDraw.Draw(canvas)

    head = _ellipse(
        (params.head_center[0] * size, params.head_center[1] * size),
        (params.head_axes[0] * size, params.head_axes[1] * size),
    )
    draw.polygon(shape(head), fill=params.skin)

    rx, ry = params.eye_radii[0] * size, params.eye_radii[1] * size
    for eye in (neutral[0:4], neutral[4:8]):
        center = eye.mean(axis=0)
        draw.polygon(shape(_ellipse(center, (rx, ry))), fill=(250, 250, 250))
        draw.polygon(shape(_ellipse(center, (ry * 0.8, ry * 0.8), n=24)), fill=(30, 30, 40))

    for brow in (neutral[8:10], neutral[10:12]):
        draw.line(shape(brow), fill=(60, 40, 30), width=2 * stroke)

    tip = neutral[12]
    nose = np.array([tip + [-0.03 * size, 0.0], tip + [0.0, -0.08 * size], tip + [0.03 * size, 0.0]])
    draw.polygon(shape(nose), fill=tuple(max(0, c - 40) for c in params.skin))

    left, upper, right, lower = neutral[13], neutral[14], neutral[15], neutral[16]
    mouth = np.concatenate([_quadratic_through(left, upper, right), _quadratic_through(right, lower, left)[1:-1]])
    draw.polygon(shape(mouth), fill=(120, 30, 40))
    draw.line(shape(_quadratic_through(left, (upper + lower) / 2.0, right)), fill=(120, 30, 40), width=stroke)

    return from_uint8(np.asarray(canvas)), landmarks


def build_synthetic_manifest(n_identities: int, n_expressions: int, out_dir: Union[str, Path],
                             seed: int = 0, size: int = 256, pose_jitter: float = 0.0) -> DatasetManifest:
    """
    Render every identity with every expression and write a dataset.

    Files: images/idXXX_exYY.png, landmarks/idXXX_exYY.json and manifest.jsonl.

    Args:
        n_identities: number of identities (>= 1)
        n_expressions: expressions per identity (>= 1); expression 0 is neutral
        out_dir: dataset directory
        seed: fixes identities, expressions and poses
        size: canvas side in pixels
        pose_jitter: 0 renders frontal faces; 1 allows rotations up to 10 degrees,
            5% scale changes and 3% shifts

    Returns:
        The written manifest, loaded back
    """
    if n_identities < 1 or n_expressions < 1:
        raise ValueError("need at least one identity and one expression")
    out_dir = Path(out_dir)

    entries = []
    for i in range(n_identities):
        identity = SyntheticFaceParams.for_identity(int(np.random.SeedSequence([seed, i]).generate_state(1)[0]))
        for j in range(n_expressions):
            params = identity.with_expression(*expression_for(j, seed))
            if pose_jitter > 0:
                rng = np.random.default_rng([seed, i, j])
                params = params.with_pose(pose_about_center(
                    size,
                    scale=1.0 + pose_jitter * float(rng.uniform(-0.05, 0.05)),
                    rotation=pose_jitter * math.radians(float(rng.uniform(-10.0, 10.0))),
                    shift=tuple(pose_jitter * 0.03 * size * rng.uniform(-1.0, 1.0, size=2)),
                ))
            image, landmarks = render_synthetic_face(params, size)

            name = f"id{i:03d}_ex{j:02d}"
            save_image(out_dir / "images" / f"{name}.png", image)
            write_landmarks(out_dir / "landmarks" / f"{name}.json", landmarks)
            entries.append(ManifestEntry(
                image_path=f"images/{name}.png",
                identity_id=f"id{i:03d}",
                expression_id=f"ex{j:02d}",
                landmarks_path=f"landmarks/{name}.json",
            ))

    write_manifest(out_dir / MANIFEST_NAME, entries)
    logger.info(f"Wrote {len(entries)} synthetic faces to {out_dir}")
    return load_manifest(out_dir / MANIFEST_NAME)

