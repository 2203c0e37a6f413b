"""
Reenactment Scenarios
Which (source, target) pairs a scenario allows, and seeded uniform sampling
over them.
"""

import logging
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, model_validator

from .manifest import DatasetManifest, ManifestEntry

logger = logging.getLogger(__name__)


class ScenarioError(ValueError):
    """Raised when a scenario is malformed or the manifest cannot satisfy it."""


class ScenarioKind(str, Enum):
    MANY_TO_MANY = "many-to-many"
    ONE_TO_ONE = "one-to-one"
    ONE_TO_ANOTHER = "one-to-another"


class ScenarioSpec(BaseModel):
    """
    Pairing rule plus its fixed identities.

    one-to-one needs `identity`; one-to-another needs `source_identity` and
    `target_identity`. With `distinct_expressions` the source and target
    expressions must also differ.
    """
    kind: ScenarioKind = ScenarioKind.MANY_TO_MANY
    identity: Optional[str] = None
    source_identity: Optional[str] = None
    target_identity: Optional[str] = None
    distinct_expressions: bool = False
    seed: int = 0

    @model_validator(mode="after")
    def _required_ids(self) -> "ScenarioSpec":
        if self.kind == ScenarioKind.ONE_TO_ONE and not self.identity:
            raise ValueError("one-to-one scenario needs 'identity'")
        if self.kind == ScenarioKind.ONE_TO_ANOTHER and not (self.source_identity and self.target_identity):
            raise ValueError("one-to-another scenario needs 'source_identity' and 'target_identity'")
        return self

    def fixed_identities(self) -> List[str]:
        if self.kind == ScenarioKind.ONE_TO_ONE:
            return [self.identity]
        if self.kind == ScenarioKind.ONE_TO_ANOTHER:
            return [self.source_identity, self.target_identity]
        return []


def allows(spec: ScenarioSpec, source: ManifestEntry, target: ManifestEntry) -> bool:
    """Whether the ordered pair (source, target) belongs to the scenario."""
    if spec.distinct_expressions and source.expression_id == target.expression_id:
        return False
    if spec.kind == ScenarioKind.MANY_TO_MANY:
        return source.identity_id != target.identity_id
    if spec.kind == ScenarioKind.ONE_TO_ONE:
        return (
            source.identity_id == spec.identity
            and target.identity_id == spec.identity
            and source.expression_id != target.expression_id
        )
    return source.identity_id == spec.source_identity and target.identity_id == spec.target_identity


def valid_pairs(manifest: DatasetManifest, spec: ScenarioSpec) -> List[Tuple[int, int]]:
    """
    All ordered (source index, target index) pairs the scenario allows, in
    manifest order.

    Raises:
        ScenarioError: if a fixed identity is absent or no pair qualifies
    """
    known = set(manifest.identities)
    missing = [i for i in spec.fixed_identities() if i not in known]
    if missing:
        raise ScenarioError(f"identities {missing} are not in the manifest")

    entries = manifest.entries
    pairs = [
        (i, j)
        for i, source in enumerate(entries)
        for j, target in enumerate(entries)
        if i != j and allows(spec, source, target)
    ]
    if not pairs:
        raise ScenarioError(f"manifest has no valid pairs for scenario {spec.kind.value}")
    return pairs


def sample_pair(manifest: DatasetManifest, scenario: ScenarioSpec,
                rng: Optional[np.random.Generator] = None) -> Tuple[ManifestEntry, ManifestEntry]:
    """One pair drawn uniformly from the valid pairs; `rng` defaults to a fresh generator seeded by the scenario."""
    pairs = valid_pairs(manifest, scenario)
    rng = rng if rng is not None else np.random.default_rng(scenario.seed)
    i, j = pairs[int(rng.integers(len(pairs)))]
    return manifest[i], manifest[j]


class PairSampler:
    """Seeded stream of scenario pairs with a restorable generator state."""

    def __init__(self, manifest: DatasetManifest, scenario: ScenarioSpec, seed: Optional[int] = None):
        self.manifest = manifest
        self.scenario = scenario
        self.pairs = valid_pairs(manifest, scenario)
        self.rng = np.random.default_rng(scenario.seed if seed is None else seed)
        logger.info(f"Scenario {scenario.kind.value}: {len(self.pairs)} valid pairs")

    def sample_indices(self) -> Tuple[int, int]:
        return self.pairs[int(self.rng.integers(len(self.pairs)))]

    def sample(self) -> Tuple[ManifestEntry, ManifestEntry]:
        i, j = self.sample_indices()
        return self.manifest[i], self.manifest[j]

    @property
    def state(self) -> Dict[str, Any]:
        return self.rng.bit_generator.state

    @state.setter
    def state(self, value: Dict[str, Any]):
        self.rng.bit_generator.state = value
