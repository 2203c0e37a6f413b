"""Boundary interpolation and hard rasterization against brute-force oracles."""

import numpy as np
import pytest

from geometry import Layout, LandmarkSet, Polyline, interpolate_boundaries, rasterize_boundary_map, render_boundary_map
from geometry.boundaries import GROUP_CHANNELS, RASTER_EPS, channel_for_group

GROUPS = ["left_eye", "right_eye", "left_brow", "right_brow", "nose", "mouth_outer", "jaw"]


def _point_segment_distance(p: np.ndarray, a: np.ndarray, b: np.ndarray) -> float:
    ab = b - a
    denom = float(ab @ ab)
    t = 0.0 if denom == 0.0 else min(1.0, max(0.0, float((p - a) @ ab) / denom))
    closest = a + t * ab
    return float(np.hypot(*(p - closest)))


def _brute_force_raster(polylines, size: int, line_width: float, num_channels: int) -> np.ndarray:
    """Test every pixel centre of the full canvas against every segment."""
    out = np.zeros((num_channels, size, size))
    threshold = (line_width / 2.0) ** 2 + RASTER_EPS
    ys, xs = np.mgrid[0:size, 0:size].astype(np.float64)
    pixels = np.stack([xs, ys], axis=-1)
    for polyline in polylines:
        channel = channel_for_group(polyline.group, num_channels)
        pts = polyline.points
        segments = list(zip(pts[:-1], pts[1:])) if len(pts) > 1 else [(pts[0], pts[0])]
        for a, b in segments:
            ab = b - a
            denom = float(ab @ ab)
            t = np.zeros((size, size)) if denom == 0.0 else np.clip(((pixels - a) @ ab) / denom, 0.0, 1.0)
            closest = a + t[..., None] * ab
            dist_sq = ((pixels - closest) ** 2).sum(axis=-1)
            out[channel][dist_sq <= threshold] = 1.0
    return out


def _two_point_line(a, b) -> LandmarkSet:
    """anchor5 set whose first two points form their own group."""
    return LandmarkSet(
        points=[a, b, (20.0, 20.0), (30.0, 30.0), (40.0, 40.0)],
        layout=Layout.ANCHOR5,
        groups={"line": (0, 2), "rest": (2, 5)},
    )


class TestInterpolateBoundaries:

    def test_unit_spacing_on_a_horizontal_segment(self):
        polylines = {p.group: p.points for p in interpolate_boundaries(_two_point_line((0, 0), (4, 0)), 1.0)}
        np.testing.assert_allclose(polylines["line"], [[0, 0], [1, 0], [2, 0], [3, 0], [4, 0]], atol=1e-12)

    def test_single_point_group(self, rng):
        landmarks = LandmarkSet(points=rng.uniform(0, 64, size=(18, 2)), layout=Layout.SYNTHETIC18)
        polylines = {p.group: p.points for p in interpolate_boundaries(landmarks)}
        np.testing.assert_array_equal(polylines["nose"], landmarks.points[12:13])
        np.testing.assert_array_equal(polylines["jaw"], landmarks.points[17:18])

    def test_collinear_points_stay_on_the_line(self):
        landmarks = LandmarkSet(
            points=[(0, 0), (3.5, 1.75), (10, 5), (20, 20), (30, 30)],
            layout=Layout.ANCHOR5,
            groups={"line": (0, 3), "rest": (3, 5)},
        )
        line = {p.group: p.points for p in interpolate_boundaries(landmarks)}["line"]
        direction = np.array([2.0, 1.0]) / np.sqrt(5.0)
        normal = np.array([-direction[1], direction[0]])
        np.testing.assert_allclose(line @ normal, 0.0, atol=1e-12)
        assert np.max(np.linalg.norm(np.diff(line, axis=0), axis=1)) <= 1.0 + 1e-12

    @pytest.mark.parametrize("density", [0.5, 1.0, 2.0, 3.7])
    def test_spacing_endpoints_and_hull(self, rng, density):
        landmarks = LandmarkSet(points=rng.uniform(0, 64, size=(18, 2)), layout=Layout.SYNTHETIC18)
        polylines = interpolate_boundaries(landmarks, density)
        assert [p.group for p in polylines] == list(landmarks.groups)

        for polyline in polylines:
            group = landmarks.group(polyline.group)
            np.testing.assert_array_equal(polyline.points[0], group[0])
            np.testing.assert_array_equal(polyline.points[-1], group[-1])
            if len(group) == 1:
                continue
            gaps = np.linalg.norm(np.diff(polyline.points, axis=0), axis=1)
            assert gaps.max() <= 1.0 / density + 1e-9
            for sample in polyline.points:
                nearest = min(_point_segment_distance(sample, a, b) for a, b in zip(group[:-1], group[1:]))
                assert nearest < 1e-9

    def test_density_must_be_positive(self):
        with pytest.raises(ValueError):
            interpolate_boundaries(_two_point_line((0, 0), (4, 0)), 0.0)


class TestRasterizeBoundaryMap:

    def test_empty_polyline_list(self):
        boundary = rasterize_boundary_map([], 16)
        assert boundary.channels.shape == (3, 16, 16)
        assert not boundary.channels.any()

    def test_empty_polyline_is_skipped(self):
        boundary = rasterize_boundary_map([Polyline("nose", np.zeros((0, 2)))], 8)
        assert not boundary.channels.any()

    def test_horizontal_segment(self):
        segment = Polyline("left_eye", np.array([[1.0, 4.0], [6.0, 4.0]]))
        boundary = rasterize_boundary_map([segment], 8, line_width=1.0, num_channels=1)
        expected = np.zeros((8, 8))
        expected[4, 1:7] = 1.0
        np.testing.assert_array_equal(boundary.channels[0], expected)
        np.testing.assert_array_equal(boundary.channels, _brute_force_raster([segment], 8, 1.0, 1))

    def test_channel_assignment(self):
        eye = Polyline("left_eye", np.array([[2.0, 2.0]]))
        nose = Polyline("nose", np.array([[5.0, 5.0]]))
        mouth = Polyline("mouth_outer", np.array([[7.0, 7.0]]))
        boundary = rasterize_boundary_map([eye, nose, mouth], 10, num_channels=3)
        assert boundary.channels[0, 2, 2] == 1.0
        assert boundary.channels[1, 5, 5] == 1.0
        assert boundary.channels[2, 7, 7] == 1.0
        assert boundary.channels.sum() == 3.0

        single = rasterize_boundary_map([eye, nose, mouth], 10, num_channels=1)
        assert single.channels.shape == (1, 10, 10)
        assert single.channels.sum() == 3.0

    def test_channel_count_is_limited(self):
        assert sorted(GROUP_CHANNELS) == [1, 2, 3]
        with pytest.raises(ValueError):
            rasterize_boundary_map([Polyline("nose", np.array([[1.0, 1.0]]))], 8, num_channels=4)

    def test_random_polylines_match_brute_force(self, rng):
        for _ in range(200):
            count = int(rng.integers(1, 6))
            polyline = Polyline(str(rng.choice(GROUPS)), rng.uniform(-3.0, 35.0, size=(count, 2)))
            width = float(rng.choice([0.5, 1.0, 1.5, 2.0, 3.0]))
            channels = int(rng.integers(1, 4))
            boundary = rasterize_boundary_map([polyline], 32, line_width=width, num_channels=channels)
            np.testing.assert_array_equal(
                boundary.channels, _brute_force_raster([polyline], 32, width, channels)
            )

    def test_rendered_map_is_binary_and_sized(self, rng):
        landmarks = LandmarkSet(points=rng.uniform(0, 64, size=(18, 2)), layout=Layout.SYNTHETIC18)
        boundary = render_boundary_map(landmarks, 64)
        assert boundary.size == 64
        assert boundary.source_layout == Layout.SYNTHETIC18
        assert set(np.unique(boundary.channels)) <= {0.0, 1.0}
        assert boundary.channels.any()
