"""
Pair Evaluation
Runs the generator over (source, target) pairs and scores expression
transfer, identity preservation and realism.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
import torch
from torch import nn

from data import DatasetManifest, PairSampler, ScenarioSpec, image_to_tensor, load_sample, tensor_to_image
from extractors import FeatureExtractor, LandmarkDetector, ReferenceDetector
from geometry import AnchorTemplate, LandmarkSet

from .metrics import csim, fid, nmse
from .report import EvalReport, PairRecord

logger = logging.getLogger(__name__)


class EvaluationError(RuntimeError):
    """Raised when evaluation cannot produce a report (no pairs, or every pair failed)."""


@dataclass
class EvalPair:
    """Normalized source and target images with the source's landmarks."""
    pair_id: str
    source: np.ndarray
    source_landmarks: LandmarkSet
    target: np.ndarray
    source_id: str = ""
    target_id: str = ""


class IdentityGenerator(nn.Module):
    """Baseline that returns the target unchanged."""

    def forward(self, src_image: torch.Tensor, tgt_image: torch.Tensor) -> torch.Tensor:
        return tgt_image


_Outcome = Tuple[PairRecord, Optional[np.ndarray], Optional[np.ndarray]]


def _evaluate_one(pair: EvalPair, generator: nn.Module, landmark_source: LandmarkDetector,
                  embedder: FeatureExtractor, feature_extractor: FeatureExtractor) -> _Outcome:
    ids = {"pair_id": pair.pair_id, "source_id": pair.source_id, "target_id": pair.target_id}
    try:
        with torch.no_grad():
            src = image_to_tensor(pair.source)
            tgt = image_to_tensor(pair.target)
            generated = generator(src, tgt)
            gen_landmarks = landmark_source.detect(tensor_to_image(generated))
            record = PairRecord(
                nmse_percent=nmse(pair.source_landmarks, gen_landmarks),
                csim=csim(embedder(generated)[0], embedder(tgt)[0]),
                **ids,
            )
            real = feature_extractor.pooled(tgt)[0].double().numpy()
            fake = feature_extractor.pooled(generated)[0].double().numpy()
        return record, real, fake
    except Exception as e:
        logger.warning(f"Pair {pair.pair_id} failed: {e}")
        return PairRecord(error=f"{type(e).__name__}: {e}", **ids), None, None


def evaluate_pairs(pairs: Sequence[EvalPair], generator: nn.Module, landmark_source: LandmarkDetector,
                   embedder: FeatureExtractor, feature_extractor: FeatureExtractor,
                   scenario: str = "many-to-many", workers: int = 1) -> EvalReport:
    """
    Score every pair and aggregate.

    Args:
        pairs: normalized pairs, evaluated and reported in this order
        generator: module mapping (src, tgt) tensors to x_hat, used read-only
        landmark_source: detector run on each generated image
        embedder: identity embedder for CSIM
        feature_extractor: extractor whose pooled features feed FID (targets vs outputs)
        scenario: tag stored in the report
        workers: threads evaluating pairs concurrently

    Returns:
        EvalReport; fid is None when fewer than two pairs succeeded

    Raises:
        EvaluationError: if there are no pairs or all of them failed
    """
    if not pairs:
        raise EvaluationError("no pairs to evaluate")
    generator.eval()

    run = lambda pair: _evaluate_one(pair, generator, landmark_source, embedder, feature_extractor)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes: List[_Outcome] = list(pool.map(run, pairs))
    else:
        outcomes = [run(pair) for pair in pairs]

    records = [record for record, _, _ in outcomes]
    real = [r for _, r, _ in outcomes if r is not None]
    fake = [f for _, _, f in outcomes if f is not None]
    if not real:
        raise EvaluationError(f"all {len(pairs)} pairs failed")

    score = fid(np.stack(real), np.stack(fake)) if len(real) >= 2 else None
    report = EvalReport.from_records(scenario, records, fid=score)
    logger.info(
        f"Evaluated {report.sample_count}/{len(records)} pairs: "
        f"NMSE {report.mean_nmse:.3f}% CSIM {report.mean_csim:.4f} FID {score}"
    )
    return report


def build_eval_pairs(manifest: DatasetManifest, template: Optional[AnchorTemplate], mode: str,
                     num_pairs: int, scenario: ScenarioSpec, tolerance: float = 0.5) -> List[EvalPair]:
    """
    Pairs for evaluation.

    mode "self" pairs each entry with itself (first num_pairs entries);
    mode "scenario" draws num_pairs pairs from the scenario sampler.
    """
    cache = {}

    def sample(index: int) -> Tuple[np.ndarray, LandmarkSet]:
        if index not in cache:
            cache[index] = load_sample(manifest, manifest[index], template, tolerance=tolerance)
        return cache[index]

    if mode == "self":
        indices = [(i, i) for i in range(min(num_pairs, len(manifest)))]
    elif mode == "scenario":
        sampler = PairSampler(manifest, scenario)
        indices = [sampler.sample_indices() for _ in range(num_pairs)]
    else:
        raise EvaluationError(f"unknown pair mode '{mode}'")

    pairs = []
    for n, (i, j) in enumerate(indices):
        src, src_landmarks = sample(i)
        tgt, _ = sample(j)
        pairs.append(EvalPair(
            pair_id=f"{n:04d}",
            source=src,
            source_landmarks=src_landmarks,
            target=tgt,
            source_id=f"{manifest[i].identity_id}/{manifest[i].expression_id}",
            target_id=f"{manifest[j].identity_id}/{manifest[j].expression_id}",
        ))
    return pairs


def reference_detector(manifest: DatasetManifest, template: Optional[AnchorTemplate],
                       tolerance: float = 0.5) -> ReferenceDetector:
    """Detector that knows every (normalized) manifest face and its landmarks."""
    return ReferenceDetector(
        load_sample(manifest, entry, template, tolerance=tolerance) for entry in manifest.entries
    )
