"""
Dataset Manifests
JSON Lines files listing face images with their identity, expression and
landmark file. Paths are relative to the manifest's directory.
"""

import json
import logging
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, ValidationError

from geometry import AnchorTemplate, LandmarkSet, normalize_face, read_landmarks

from .images import load_image

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.jsonl"


class ManifestError(ValueError):
    """Raised for missing, empty or malformed manifests."""


class ManifestEntry(BaseModel):
    """One face: fields exactly {image_path, identity_id, expression_id, landmarks_path}."""
    model_config = ConfigDict(extra="forbid", frozen=True)

    image_path: str
    identity_id: str
    expression_id: str
    landmarks_path: str


class DatasetManifest(BaseModel):
    """Ordered, nonempty list of entries resolved against `root`."""
    entries: List[ManifestEntry]
    root: Path

    def __len__(self) -> int:
        return len(self.entries)

    def __getitem__(self, index: int) -> ManifestEntry:
        return self.entries[index]

    def image_file(self, entry: ManifestEntry) -> Path:
        return self.root / entry.image_path

    def landmarks_file(self, entry: ManifestEntry) -> Path:
        return self.root / entry.landmarks_path

    @property
    def identities(self) -> List[str]:
        """Distinct identity ids in first-seen order."""
        return list(dict.fromkeys(e.identity_id for e in self.entries))

    def by_identity(self) -> Dict[str, List[ManifestEntry]]:
        groups: Dict[str, List[ManifestEntry]] = {}
        for entry in self.entries:
            groups.setdefault(entry.identity_id, []).append(entry)
        return groups


def load_manifest(path: Union[str, Path]) -> DatasetManifest:
    """
    Read and validate a manifest.

    Args:
        path: manifest file, or a directory containing manifest.jsonl

    Returns:
        DatasetManifest with entries in file order

    Raises:
        ManifestError: missing file, empty manifest, malformed row or dangling path
    """
    path = Path(path)
    if path.is_dir():
        path = path / MANIFEST_NAME
    if not path.is_file():
        raise ManifestError(f"manifest not found: {path}")

    root = path.parent
    resolved_root = root.resolve()
    entries = []
    with open(path, "r", encoding="utf-8") as f:
        for index, line in enumerate(f):
            if not line.strip():
                continue
            try:
                entry = ManifestEntry.model_validate(json.loads(line))
            except (json.JSONDecodeError, ValidationError) as e:
                raise ManifestError(f"row {index}: malformed entry ({e})") from e
            for field_name in ("image_path", "landmarks_path"):
                resolved = root / getattr(entry, field_name)
                if not resolved.resolve().is_relative_to(resolved_root):
                    raise ManifestError(f"row {index}: {field_name} escapes the manifest directory: "
                                        f"{getattr(entry, field_name)}")
                if not resolved.is_file():
                    raise ManifestError(f"row {index}: {field_name} does not exist: {resolved}")
            entries.append(entry)

    if not entries:
        raise ManifestError("empty manifest")
    logger.info(f"Loaded {len(entries)} manifest entries from {path}")
    return DatasetManifest(entries=entries, root=root)


def write_manifest(path: Union[str, Path], entries: Sequence[ManifestEntry]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        for entry in entries:
            f.write(json.dumps(entry.model_dump(), sort_keys=True) + "\n")
    return path


def load_image_folder(root: Union[str, Path]) -> DatasetManifest:
    """
    Manifest for a folder of pre-normalized faces laid out as
    `<identity>/<expression>.png` with `<identity>/<expression>.json` landmarks.
    """
    root = Path(root)
    if not root.is_dir():
        raise ManifestError(f"image folder not found: {root}")

    entries = []
    for image in sorted(root.glob("*/*.png")):
        landmarks = image.with_suffix(".json")
        if not landmarks.is_file():
            logger.warning(f"Skipping {image}: no landmark file")
            continue
        entries.append(ManifestEntry(
            image_path=image.relative_to(root).as_posix(),
            identity_id=image.parent.name,
            expression_id=image.stem,
            landmarks_path=landmarks.relative_to(root).as_posix(),
        ))
    if not entries:
        raise ManifestError("empty manifest")
    return DatasetManifest(entries=entries, root=root)


def load_sample(manifest: DatasetManifest, entry: ManifestEntry,
                template: Optional[AnchorTemplate] = None, tolerance: float = 0.5) -> Tuple[np.ndarray, LandmarkSet]:
    """
    Image and landmarks of one entry, aligned to `template` when one is given.

    Returns:
        ((N, N, 3) image in [-1, 1], landmarks in crop coordinates)
    """
    image = load_image(manifest.image_file(entry))
    landmarks = read_landmarks(manifest.landmarks_file(entry))
    if template is None:
        return image, landmarks
    return normalize_face(image, landmarks, template, tolerance=tolerance)
