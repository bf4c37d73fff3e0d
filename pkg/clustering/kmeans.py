# clustering/kmeans.py - Seeded K-means (k-means++ seeding, Lloyd iterations, restarts)
from __future__ import annotations
import logging
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np
from scipy.spatial.distance import cdist
from sklearn.cluster import kmeans_plusplus

from loader.errors import DimensionMismatch, NonFiniteInput, TooFewRows

logger = logging.getLogger('jobclust.cluster.kmeans')

N_RESTARTS = 10
TOLERANCE = 1e-4
MAX_ITERATIONS = 300


def euclidean(p: Sequence[float], q: Sequence[float]) -> float:
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.shape != q.shape:
        raise DimensionMismatch(f"Vectors of shape {p.shape} and {q.shape} cannot be compared")
    return float(np.sqrt(np.sum((p - q) ** 2)))


@dataclass(frozen=True)
class KMeansModel:
    k: int
    centroids: np.ndarray
    labels: np.ndarray
    inertia: float
    seed: int
    iterations: int
    inertia_history: Tuple[float, ...] = field(default=(), repr=False)

    def recompute_inertia(self, X: np.ndarray) -> float:
        X = np.asarray(X, dtype=np.float64)
        return float(np.sum((X - self.centroids[self.labels]) ** 2))


def as_matrix(X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    if X.ndim != 2:
        raise DimensionMismatch(f"Expected a 2-D matrix, got {X.ndim} dimensions")
    if not np.isfinite(X).all():
        raise NonFiniteInput("Clustering input contains NaN or infinite values")
    return X


def restart_seeds(seed: int, n: int = N_RESTARTS) -> List[int]:
    children = np.random.SeedSequence(seed).spawn(n)
    return [int(c.generate_state(1)[0]) for c in children]


def _assign(X: np.ndarray, centroids: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    d2 = cdist(X, centroids, metric="sqeuclidean")
    labels = np.argmin(d2, axis=1)
    return labels, d2[np.arange(len(X)), labels]


def _repair_empty(labels: np.ndarray, dist2: np.ndarray, k: int) -> np.ndarray:
    """Move the point farthest from its centroid into each empty cluster."""
    labels = labels.copy()
    dist2 = dist2.copy()
    for j in range(k):
        counts = np.bincount(labels, minlength=k)
        if counts[j] > 0:
            continue
        movable = counts[labels] > 1
        candidates = np.where(movable, dist2, -np.inf)
        i = int(np.argmax(candidates))
        logger.debug(f"Cluster {j} empty; re-seeded with row {i}")
        labels[i] = j
        dist2[i] = 0.0
    return labels


def _means(X: np.ndarray, labels: np.ndarray, k: int) -> np.ndarray:
    centroids = np.zeros((k, X.shape[1]))
    np.add.at(centroids, labels, X)
    return centroids / np.bincount(labels, minlength=k)[:, None]


def _lloyd(X: np.ndarray, k: int, seed: int, tol: float, max_iter: int) -> KMeansModel:
    centroids, _ = kmeans_plusplus(X, n_clusters=k, random_state=seed)
    history: List[float] = []
    labels = np.zeros(len(X), dtype=np.int64)
    iterations = 0
    for iterations in range(1, max_iter + 1):
        labels, dist2 = _assign(X, centroids)
        labels = _repair_empty(labels, dist2, k)
        updated = _means(X, labels, k)
        inertia = float(np.sum((X - updated[labels]) ** 2))
        if history:
            assert inertia <= history[-1] * (1 + 1e-12) + 1e-12, \
                f"inertia rose from {history[-1]} to {inertia} at iteration {iterations}"
        history.append(inertia)
        shift = float(np.max(np.linalg.norm(updated - centroids, axis=1)))
        centroids = updated
        if shift < tol:
            break
    return KMeansModel(k=k, centroids=centroids, labels=labels.astype(np.int64),
                       inertia=history[-1], seed=seed, iterations=iterations,
                       inertia_history=tuple(history))


def kmeans_fit(X, k: int, seed: int, n_init: int = N_RESTARTS,
               tol: float = TOLERANCE, max_iter: int = MAX_ITERATIONS) -> KMeansModel:
    """Best-inertia model over n_init k-means++ restarts; restart seeds derive from seed."""
    X = as_matrix(X)
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    if X.shape[0] < k:
        raise TooFewRows(f"{X.shape[0]} rows cannot form {k} clusters")

    best = None
    for sub in restart_seeds(seed, n_init):
        model = _lloyd(X, k, sub, tol, max_iter)
        if best is None or model.inertia < best.inertia:
            best = model
    logger.debug(f"k={k} seed={seed}: inertia {best.inertia:.6g} after {best.iterations} iterations")
    return KMeansModel(k=best.k, centroids=best.centroids, labels=best.labels, inertia=best.inertia,
                       seed=seed, iterations=best.iterations, inertia_history=best.inertia_history)
