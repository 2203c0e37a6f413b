"""
Landmark Sets
Ordered 2-D facial keypoints tagged with a point layout and semantic groups.
"""

import json
import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Dict, Mapping, Tuple, Union

import numpy as np

logger = logging.getLogger(__name__)


class LayoutError(ValueError):
    """Raised when points, layout and groups disagree."""


class DegenerateGeometryError(ValueError):
    """Raised when a geometric quantity cannot be recovered (zero spread, zero distance)."""


class Layout(str, Enum):
    """Point conventions understood by the pipeline."""
    CANONICAL68 = "canonical68"
    SYNTHETIC18 = "synthetic18"
    ANCHOR5 = "anchor5"


POINT_COUNTS: Dict[Layout, int] = {
    Layout.CANONICAL68: 68,
    Layout.SYNTHETIC18: 18,
    Layout.ANCHOR5: 5,
}

# Half-open [start, end) index ranges. "left" means smaller x in a frontal image.
DEFAULT_GROUPS: Dict[Layout, Dict[str, Tuple[int, int]]] = {
    Layout.CANONICAL68: {
        "jaw": (0, 17),
        "left_brow": (17, 22),
        "right_brow": (22, 27),
        "nose": (27, 36),
        "left_eye": (36, 42),
        "right_eye": (42, 48),
        "mouth_outer": (48, 60),
        "mouth_inner": (60, 68),
    },
    Layout.SYNTHETIC18: {
        "left_eye": (0, 4),
        "right_eye": (4, 8),
        "left_brow": (8, 10),
        "right_brow": (10, 12),
        "nose": (12, 13),
        "mouth_outer": (13, 17),
        "jaw": (17, 18),
    },
    Layout.ANCHOR5: {
        "left_eye": (0, 1),
        "right_eye": (1, 2),
        "nose": (2, 3),
        "mouth_outer": (3, 5),
    },
}

# (nose tip, left mouth corner, right mouth corner) indices per layout
ANCHOR_INDICES: Dict[Layout, Tuple[int, int, int]] = {
    Layout.CANONICAL68: (30, 48, 54),
    Layout.SYNTHETIC18: (12, 13, 15),
    Layout.ANCHOR5: (2, 3, 4),
}


@dataclass(frozen=True, eq=False)
class LandmarkSet:
    """
    Ordered facial keypoints in pixel coordinates.

    Attributes:
        points: (L, 2) float64 array of (x, y)
        layout: point convention tag
        groups: semantic region -> half-open index range
    """
    points: np.ndarray
    layout: Layout
    groups: Mapping[str, Tuple[int, int]] = field(default_factory=dict)

    def __post_init__(self):
        points = np.asarray(self.points, dtype=np.float64)
        if points.ndim != 2 or points.shape[1] != 2:
            raise LayoutError(f"points must have shape (L, 2), got {points.shape}")
        layout = Layout(self.layout)
        groups = dict(self.groups) if self.groups else dict(DEFAULT_GROUPS[layout])
        groups = {name: (int(start), int(end)) for name, (start, end) in groups.items()}

        object.__setattr__(self, "points", points)
        object.__setattr__(self, "layout", layout)
        object.__setattr__(self, "groups", groups)
        self._validate()

    def _validate(self):
        expected = POINT_COUNTS[self.layout]
        if len(self.points) != expected:
            raise LayoutError(
                f"layout {self.layout.value} expects {expected} points, got {len(self.points)}"
            )
        if not np.all(np.isfinite(self.points)):
            raise LayoutError("landmark coordinates must be finite")

        owners = np.zeros(len(self.points), dtype=int)
        for name, (start, end) in self.groups.items():
            if not 0 <= start < end <= len(self.points):
                raise LayoutError(f"group '{name}' has invalid range [{start}, {end})")
            owners[start:end] += 1
        if not np.all(owners == 1):
            bad = np.flatnonzero(owners != 1).tolist()
            raise LayoutError(f"indices {bad} do not belong to exactly one group")

    def __len__(self) -> int:
        return len(self.points)

    def group(self, name: str) -> np.ndarray:
        """Points of one semantic group, in order."""
        if name not in self.groups:
            raise LayoutError(f"layout {self.layout.value} has no group '{name}'")
        start, end = self.groups[name]
        return self.points[start:end]

    def centroid(self, name: str) -> np.ndarray:
        return self.group(name).mean(axis=0)

    def with_points(self, points: np.ndarray) -> "LandmarkSet":
        """Same layout and groups, new coordinates."""
        return LandmarkSet(points=points, layout=self.layout, groups=self.groups)

    def to_dict(self) -> dict:
        return {
            "layout": self.layout.value,
            "points": self.points.tolist(),
            "groups": {name: [start, end] for name, (start, end) in self.groups.items()},
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "LandmarkSet":
        try:
            return cls(
                points=np.asarray(data["points"], dtype=np.float64),
                layout=Layout(data["layout"]),
                groups={k: tuple(v) for k, v in (data.get("groups") or {}).items()},
            )
        except KeyError as e:
            raise LayoutError(f"landmark record is missing field {e}") from e


def read_landmarks(path: Union[str, Path]) -> LandmarkSet:
    """Load a landmark JSON file ({"layout", "points", "groups"})."""
    path = Path(path)
    with open(path, "r", encoding="utf-8") as f:
        data = json.load(f)
    return LandmarkSet.from_dict(data)


def write_landmarks(path: Union[str, Path], landmarks: LandmarkSet) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(landmarks.to_dict(), f, indent=2)
        f.write("\n")
    return path


def anchor_points(landmarks: LandmarkSet) -> np.ndarray:
    """
    Five alignment anchors: left pupil, right pupil, nose tip, left and right mouth corners.

    Pupils are the centroids of the eye groups.
    """
    nose, mouth_left, mouth_right = ANCHOR_INDICES[landmarks.layout]
    return np.stack([
        landmarks.centroid("left_eye"),
        landmarks.centroid("right_eye"),
        landmarks.points[nose],
        landmarks.points[mouth_left],
        landmarks.points[mouth_right],
    ])


def extract_anchors(landmarks: LandmarkSet) -> LandmarkSet:
    return LandmarkSet(points=anchor_points(landmarks), layout=Layout.ANCHOR5)


def interocular_distance(landmarks: LandmarkSet) -> float:
    """
    Distance between the left and right eye centroids, in pixels.

    Raises:
        DegenerateGeometryError: if the eye centroids coincide
    """
    distance = float(np.linalg.norm(landmarks.centroid("left_eye") - landmarks.centroid("right_eye")))
    if not distance > 0.0:
        raise DegenerateGeometryError("inter-ocular distance is zero")
    return distance
