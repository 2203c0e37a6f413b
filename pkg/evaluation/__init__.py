"""
Evaluation
NMSE, CSIM and FID over generated pairs, with JSON reports and console tables.
"""

from .evaluator import (
    EvalPair,
    EvaluationError,
    IdentityGenerator,
    build_eval_pairs,
    evaluate_pairs,
    reference_detector,
)
from .metrics import MetricError, csim, fid, frechet_distance, gaussian_stats, nmse, trace_sqrt_product
from .report import REFERENCE_RESULTS, EvalReport, PairRecord, reference_table, render_table

__all__ = [
    "EvalPair",
    "EvaluationError",
    "IdentityGenerator",
    "build_eval_pairs",
    "evaluate_pairs",
    "reference_detector",
    "MetricError",
    "csim",
    "fid",
    "frechet_distance",
    "gaussian_stats",
    "nmse",
    "trace_sqrt_product",
    "REFERENCE_RESULTS",
    "EvalReport",
    "PairRecord",
    "reference_table",
    "render_table",
]
