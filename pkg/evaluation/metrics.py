"""
Evaluation Metrics
Landmark NMSE normalized by inter-ocular distance, cosine identity
similarity, and the Frechet distance between Gaussian feature statistics.
"""

from typing import Tuple, Union

import numpy as np
import torch

from geometry import LandmarkSet, LayoutError, interocular_distance

ArrayLike = Union[np.ndarray, torch.Tensor]


class MetricError(ValueError):
    """Raised when a metric's inputs are unusable."""


def _as_float64(value: ArrayLike) -> np.ndarray:
    if isinstance(value, torch.Tensor):
        value = value.detach().cpu().numpy()
    return np.asarray(value, dtype=np.float64)


def nmse(src_landmarks: LandmarkSet, gen_landmarks: LandmarkSet) -> float:
    """
    Mean landmark displacement as a percentage of the source inter-ocular distance.

    Raises:
        LayoutError: layouts or point counts differ
        DegenerateGeometryError: source eye centroids coincide
    """
    if src_landmarks.layout != gen_landmarks.layout or len(src_landmarks) != len(gen_landmarks):
        raise LayoutError(
            f"cannot compare {src_landmarks.layout.value}/{len(src_landmarks)} "
            f"with {gen_landmarks.layout.value}/{len(gen_landmarks)}"
        )
    distances = np.linalg.norm(src_landmarks.points - gen_landmarks.points, axis=1)
    return float(distances.sum() / (len(distances) * interocular_distance(src_landmarks)) * 100.0)


def csim(e1: ArrayLike, e2: ArrayLike) -> float:
    """Cosine similarity of two identity embeddings."""
    a, b = _as_float64(e1).ravel(), _as_float64(e2).ravel()
    if a.shape != b.shape:
        raise MetricError(f"embedding dimensions differ: {a.shape} vs {b.shape}")
    norm_a, norm_b = np.linalg.norm(a), np.linalg.norm(b)
    if norm_a == 0.0 or norm_b == 0.0:
        raise MetricError("cosine similarity is undefined for a zero vector")
    return float(np.clip(np.dot(a, b) / (norm_a * norm_b), -1.0, 1.0))


def gaussian_stats(features: ArrayLike) -> Tuple[np.ndarray, np.ndarray]:
    """Mean and unbiased (n - 1) covariance of an (n, d) feature set."""
    features = _as_float64(features)
    if features.ndim != 2 or features.shape[0] < 2:
        raise MetricError(f"need at least 2 feature vectors of shape (n, d), got {features.shape}")
    if not np.all(np.isfinite(features)):
        raise MetricError("features must be finite")
    return features.mean(axis=0), np.atleast_2d(np.cov(features, rowvar=False, ddof=1))


def symmetric_sqrt(mat: np.ndarray, rtol: float = 1e-12) -> np.ndarray:
    """
    Square root of a symmetric PSD matrix by eigendecomposition.

    Negative eigenvalues are clipped to 0, and so is round-off at or below
    rtol * largest |eigenvalue|. The cutoff is relative to the matrix, so
    small but genuine variances survive.
    """
    s, u = np.linalg.eigh((mat + mat.T) / 2.0)
    cutoff = rtol * np.abs(s).max(initial=0.0)
    si = np.where(s > cutoff, np.sqrt(np.maximum(s, 0.0)), 0.0)
    return (u * si) @ u.T


def trace_sqrt_product(sigma1: np.ndarray, sigma2: np.ndarray) -> float:
    """
    tr(sqrt(sigma1 sigma2)) computed as tr(sqrt(A sigma2 A)) with A = sqrt(sigma1).

    Both A and A sigma2 A are symmetric, so only symmetric square roots are needed.
    """
    a = symmetric_sqrt(sigma1)
    return float(np.trace(symmetric_sqrt(a @ sigma2 @ a)))


def frechet_distance(mu1: np.ndarray, sigma1: np.ndarray, mu2: np.ndarray, sigma2: np.ndarray) -> float:
    """||mu1 - mu2||^2 + tr(sigma1 + sigma2 - 2 sqrt(sigma1 sigma2)), floored at 0."""
    mu1, mu2 = np.atleast_1d(mu1), np.atleast_1d(mu2)
    sigma1, sigma2 = np.atleast_2d(sigma1), np.atleast_2d(sigma2)
    if mu1.shape != mu2.shape or sigma1.shape != sigma2.shape:
        raise MetricError(f"statistics disagree: {mu1.shape}/{sigma1.shape} vs {mu2.shape}/{sigma2.shape}")
    diff = mu1 - mu2
    value = float(diff @ diff + np.trace(sigma1) + np.trace(sigma2) - 2.0 * trace_sqrt_product(sigma1, sigma2))
    return max(value, 0.0)


def fid(features_a: ArrayLike, features_b: ArrayLike) -> float:
    """
    Frechet distance between Gaussians fitted to two feature sets.

    Args:
        features_a: (n_a, d) feature vectors, n_a >= 2
        features_b: (n_b, d) feature vectors, n_b >= 2
    """
    mu_a, sigma_a = gaussian_stats(features_a)
    mu_b, sigma_b = gaussian_stats(features_b)
    return frechet_distance(mu_a, sigma_a, mu_b, sigma_b)
