"""
Data
Manifests, scenario pair sampling and the synthetic face generator.
"""

from .images import image_to_tensor, load_image, save_image, tensor_to_image, to_uint8, triptych
from .manifest import (
    DatasetManifest,
    ManifestEntry,
    ManifestError,
    load_image_folder,
    load_manifest,
    load_sample,
    write_manifest,
)
from .scenarios import PairSampler, ScenarioError, ScenarioKind, ScenarioSpec, sample_pair, valid_pairs
from .synthetic import (
    SyntheticFaceParams,
    build_synthetic_manifest,
    expression_for,
    pose_about_center,
    render_synthetic_face,
)

__all__ = [
    "image_to_tensor",
    "load_image",
    "save_image",
    "tensor_to_image",
    "to_uint8",
    "triptych",
    "DatasetManifest",
    "ManifestEntry",
    "ManifestError",
    "load_image_folder",
    "load_manifest",
    "load_sample",
    "write_manifest",
    "PairSampler",
    "ScenarioError",
    "ScenarioKind",
    "ScenarioSpec",
    "sample_pair",
    "valid_pairs",
    "SyntheticFaceParams",
    "build_synthetic_manifest",
    "expression_for",
    "pose_about_center",
    "render_synthetic_face",
]
