"""
Landmark Geometry
Similarity alignment, boundary interpolation and conditioning-map rasterization.
"""

from .landmarks import (
    DegenerateGeometryError,
    Layout,
    LayoutError,
    LandmarkSet,
    anchor_points,
    extract_anchors,
    interocular_distance,
    read_landmarks,
    write_landmarks,
)
from .alignment import (
    AlignmentResult,
    AnchorTemplate,
    SimilarityTransform,
    align_face,
    estimate_similarity,
    normalize_face,
    warp_crop,
)
from .boundaries import (
    BoundaryMap,
    Polyline,
    interpolate_boundaries,
    rasterize_boundary_map,
    render_boundary_map,
)

__all__ = [
    "DegenerateGeometryError",
    "Layout",
    "LayoutError",
    "LandmarkSet",
    "anchor_points",
    "extract_anchors",
    "interocular_distance",
    "read_landmarks",
    "write_landmarks",
    "AlignmentResult",
    "AnchorTemplate",
    "SimilarityTransform",
    "align_face",
    "estimate_similarity",
    "normalize_face",
    "warp_crop",
    "BoundaryMap",
    "Polyline",
    "interpolate_boundaries",
    "rasterize_boundary_map",
    "render_boundary_map",
]
