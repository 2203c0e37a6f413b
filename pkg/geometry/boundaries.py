"""
Boundary Maps
Dense boundary lines from landmark groups, rasterized into the
discriminator's conditioning channels.
"""

import math
from dataclasses import dataclass
from typing import Dict, List, NamedTuple, Optional, Sequence

import numpy as np

from .landmarks import Layout, LandmarkSet

# Squared-distance slack so that points exactly on the line_width/2 boundary
# classify the same regardless of evaluation order.
RASTER_EPS = 1e-9

GROUP_CHANNELS: Dict[int, Dict[str, int]] = {
    1: {},
    2: {"left_eye": 0, "right_eye": 0, "left_brow": 0, "right_brow": 0, "nose": 0,
        "mouth_outer": 1, "mouth_inner": 1, "jaw": 1},
    3: {"left_eye": 0, "right_eye": 0, "left_brow": 0, "right_brow": 0, "nose": 1,
        "mouth_outer": 2, "mouth_inner": 2, "jaw": 2},
}


class Polyline(NamedTuple):
    group: str
    points: np.ndarray


@dataclass(frozen=True, eq=False)
class BoundaryMap:
    """(C_b, N, N) line maps with values in [0, 1]."""
    channels: np.ndarray
    source_layout: Optional[Layout] = None

    @property
    def size(self) -> int:
        return self.channels.shape[-1]


def channel_for_group(group: str, num_channels: int) -> int:
    if num_channels not in GROUP_CHANNELS:
        raise ValueError(f"boundary maps support 1, 2 or 3 channels, got {num_channels}")
    return GROUP_CHANNELS[num_channels].get(group, 0)


def interpolate_boundaries(landmarks: LandmarkSet, density: float = 1.0) -> List[Polyline]:
    """
    One piecewise-linear polyline per semantic group.

    Consecutive samples are at most 1/density pixels apart and the end points
    are the group's first and last landmarks.
    """
    if density <= 0:
        raise ValueError("density must be positive")

    polylines = []
    for name, (start, end) in landmarks.groups.items():
        pts = landmarks.points[start:end]
        if len(pts) == 1:
            polylines.append(Polyline(name, pts.copy()))
            continue

        samples = []
        for a, b in zip(pts[:-1], pts[1:]):
            n = max(1, math.ceil(float(np.linalg.norm(b - a)) * density))
            t = np.arange(n, dtype=np.float64)[:, None] / n
            samples.append(a + t * (b - a))
        samples.append(pts[-1:])
        polylines.append(Polyline(name, np.concatenate(samples)))
    return polylines


def _segment_distance_sq(px: np.ndarray, py: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    dx, dy = b[0] - a[0], b[1] - a[1]
    length_sq = dx * dx + dy * dy
    if length_sq == 0.0:
        return (px - a[0]) ** 2 + (py - a[1]) ** 2
    t = np.clip(((px - a[0]) * dx + (py - a[1]) * dy) / length_sq, 0.0, 1.0)
    return (px - (a[0] + t * dx)) ** 2 + (py - (a[1] + t * dy)) ** 2


def rasterize_boundary_map(polylines: Sequence[Polyline], size: int, line_width: float = 1.0,
                           num_channels: int = 3, source_layout: Optional[Layout] = None) -> BoundaryMap:
    """
    Hard-rasterize polylines: a pixel (centre at integer coordinates) is 1 when
    it lies within line_width / 2 of a polyline of its channel, else 0.
    """
    if size <= 0:
        raise ValueError("size must be positive")
    canvas = np.zeros((num_channels, size, size), dtype=np.float64)
    radius = line_width / 2.0
    threshold = radius * radius + RASTER_EPS
    reach = int(math.ceil(radius)) + 1

    for polyline in polylines:
        channel = canvas[channel_for_group(polyline.group, num_channels)]
        pts = np.asarray(polyline.points, dtype=np.float64).reshape(-1, 2)
        if len(pts) == 0:
            continue
        segments = zip(pts[:-1], pts[1:]) if len(pts) > 1 else [(pts[0], pts[0])]
        for a, b in segments:
            x0 = max(0, int(math.floor(min(a[0], b[0]))) - reach)
            x1 = min(size, int(math.ceil(max(a[0], b[0]))) + reach + 1)
            y0 = max(0, int(math.floor(min(a[1], b[1]))) - reach)
            y1 = min(size, int(math.ceil(max(a[1], b[1]))) + reach + 1)
            if x0 >= x1 or y0 >= y1:
                continue
            py, px = np.mgrid[y0:y1, x0:x1].astype(np.float64)
            hit = _segment_distance_sq(px, py, a, b) <= threshold
            channel[y0:y1, x0:x1][hit] = 1.0

    return BoundaryMap(channels=canvas, source_layout=source_layout)


def render_boundary_map(landmarks: LandmarkSet, size: int, line_width: float = 1.0,
                        num_channels: int = 3, density: float = 1.0) -> BoundaryMap:
    """Interpolate then rasterize: the conditioning map for one face."""
    return rasterize_boundary_map(
        interpolate_boundaries(landmarks, density),
        size,
        line_width=line_width,
        num_channels=num_channels,
        source_layout=landmarks.layout,
    )
