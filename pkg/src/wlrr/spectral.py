"""Representation matrix to cluster labels.

The stages mirror standard spectral clustering practice: build a symmetric
non-negative affinity from Z, form the symmetric normalized Laplacian, embed
samples with the eigenvectors of its k smallest eigenvalues, then run a
fully deterministic k-means (no random restarts, no random seeding) so the
whole pipeline is reproducible bit for bit.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.linalg

__all__ = [
    "AffinityMode",
    "ClusterLabels",
    "affinity_from_representation",
    "normalized_laplacian",
    "laplacian_eigenpairs",
    "spectral_embed",
    "kmeans_deterministic",
    "cluster_from_representation",
]

# singular values below this fraction of the largest are dropped when
# factoring Z for the affinity
AFFINITY_RANK_TOL = 1e-8


class AffinityMode(Enum):
    SVD_BASED = "svd"
    SYMMETRIC_ABS = "abs"


@dataclass(frozen=True)
class ClusterLabels:
    """Integer labels in [0, k) for n samples."""

    labels: np.ndarray
    k: int

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=int)
        if labels.ndim != 1 or labels.size == 0:
            raise ValueError("labels must be a non-empty 1-D integer vector")
        if self.k < 1 or labels.min() < 0 or labels.max() >= self.k:
            raise ValueError(f"labels must lie in [0, {self.k})")
        object.__setattr__(self, "labels", labels)

    def __len__(self):
        return self.labels.size


def affinity_from_representation(
    Z: np.ndarray,
    mode: AffinityMode = AffinityMode.SVD_BASED,
    power: int = 4,
) -> np.ndarray:
    """Symmetric non-negative affinity built from a representation matrix.

    SVD_BASED keeps the significant left factor of Z scaled by sqrt of the
    singular values, row-normalizes it (zero rows stay zero), and raises the
    resulting Gram matrix entrywise to ``power``.  SYMMETRIC_ABS is the
    plain ``(|Z| + |Z'|)/2`` fallback.
    """
    Z = np.asarray(Z, dtype=float)
    if Z.ndim != 2 or Z.shape[0] != Z.shape[1]:
        raise ValueError("Z must be square")
    if not np.all(np.isfinite(Z)):
        raise ValueError("Z contains non-finite entries")
    mode = AffinityMode(mode)
    if mode == AffinityMode.SYMMETRIC_ABS:
        A = np.abs(Z)
        return (A + A.T) / 2
    U, s, _ = np.linalg.svd(Z, full_matrices=False)
    if s.size == 0 or s[0] <= 0:
        return np.zeros_like(Z)
    keep = s > AFFINITY_RANK_TOL * s[0]
    M = U[:, keep] * np.sqrt(s[keep])
    norms = np.linalg.norm(M, axis=1, keepdims=True)
    M = np.divide(M, norms, out=np.zeros_like(M), where=norms > 0)
    G = M @ M.T
    G = (G + G.T) / 2  # dgemm output is only symmetric up to roundoff
    W = np.maximum(G**power, 0.0)
    return (W + W.T) / 2


def normalized_laplacian(W: np.ndarray) -> np.ndarray:
    """``I - D^{-1/2} W D^{-1/2}``; zero-degree rows use the 0 convention."""
    W = np.asarray(W, dtype=float)
    if W.ndim != 2 or W.shape[0] != W.shape[1]:
        raise ValueError("W must be square")
    if not np.all(np.isfinite(W)) or np.any(W < 0):
        raise ValueError("W must be finite and non-negative")
    if np.max(np.abs(W - W.T)) > 1e-12 * max(1.0, np.max(np.abs(W))):
        raise ValueError("W must be symmetric")
    d = W.sum(axis=1)
    with np.errstate(divide="ignore"):
        dinv = np.where(d > 0, 1.0 / np.sqrt(np.where(d > 0, d, 1.0)), 0.0)
    L = np.eye(W.shape[0]) - dinv[:, None] * W * dinv[None, :]
    return (L + L.T) / 2


def laplacian_eigenpairs(W: np.ndarray, k: int):
    """(eigenvalues, eigenvectors) of the k smallest Laplacian eigenvalues.

    Sign convention: each eigenvector is flipped so its entry of largest
    magnitude is positive, lowest index winning ties.
    """
    W = np.asarray(W, dtype=float)
    n = W.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k = {k} out of range for {n} samples")
    L = normalized_laplacian(W)
    vals, vecs = scipy.linalg.eigh(L)
    V = vecs[:, :k].copy()
    for j in range(k):
        i = int(np.argmax(np.abs(V[:, j])))
        if V[i, j] < 0:
            V[:, j] = -V[:, j]
    return vals[:k].copy(), V


def spectral_embed(W: np.ndarray, k: int) -> np.ndarray:
    """Rows of the k bottom Laplacian eigenvectors, row-normalized to unit
    length (zero rows left alone)."""
    _, V = laplacian_eigenpairs(W, k)
    norms = np.linalg.norm(V, axis=1, keepdims=True)
    return np.divide(V, norms, out=np.zeros_like(V), where=norms > 0)


def _seed_centers(points: np.ndarray, k: int) -> np.ndarray:
    """Deterministic seeding: start from the longest row, then repeatedly
    add the row whose worst-case |cosine| against chosen centers is least.
    Zero rows score 1 so they are chosen only when nothing else is left."""
    n = points.shape[0]
    norms = np.linalg.norm(points, axis=1)
    chosen = [int(np.argmax(norms))]
    while len(chosen) < k:
        score = np.zeros(n)
        for c in chosen:
            denom = norms * norms[c]
            with np.errstate(invalid="ignore", divide="ignore"):
                cos = np.abs(points @ points[c]) / denom
            cos[denom == 0] = 1.0
            score = np.maximum(score, cos)
        score[chosen] = np.inf
        chosen.append(int(np.argmin(score)))
    return points[chosen].copy()


def _lloyd(points: np.ndarray, centers: np.ndarray, max_rounds: int = 300):
    """Lloyd iterations; returns (labels, per-round WCSS history).

    Empty clusters keep their previous center; assignment ties go to the
    lowest center index.
    """
    labels = None
    history = []
    for _ in range(max_rounds):
        d2 = ((points[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        new_labels = np.argmin(d2, axis=1)
        history.append(float(d2[np.arange(points.shape[0]), new_labels].sum()))
        if labels is not None and np.array_equal(new_labels, labels):
            break
        labels = new_labels
        for c in range(centers.shape[0]):
            members = points[labels == c]
            if members.shape[0] > 0:
                centers[c] = members.mean(axis=0)
    return labels, np.asarray(history)


def kmeans_deterministic(points: np.ndarray, k: int) -> ClusterLabels:
    """k-means with deterministic seeding and tie-breaking; see _seed_centers."""
    points = np.asarray(points, dtype=float)
    if points.ndim != 2:
        raise ValueError("points must be an n x d matrix")
    n = points.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"need n >= k >= 1, got n = {n}, k = {k}")
    labels, _ = _lloyd(points, _seed_centers(points, k))
    return ClusterLabels(labels, k)


def cluster_from_representation(
    Z: np.ndarray,
    k: int,
    mode: AffinityMode = AffinityMode.SVD_BASED,
    power: int = 4,
) -> ClusterLabels:
    """Full tail of the pipeline: affinity, embedding, deterministic k-means."""
    W = affinity_from_representation(Z, mode, power)
    return kmeans_deterministic(spectral_embed(W, k), k)
