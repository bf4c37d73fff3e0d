# clustering/silhouette.py - Silhouette scoring, quality bands and the K sweep
from __future__ import annotations
import logging
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

import numpy as np
from sklearn import metrics

from loader.errors import KRangeClampedWarning, SingleCluster, TooFewRows
from .kmeans import KMeansModel, as_matrix, kmeans_fit

logger = logging.getLogger('jobclust.cluster.silhouette')

DEFAULT_KMIN = 2
DEFAULT_KMAX = 30

# lower bounds, checked top-down
QUALITY_BANDS = (
    (0.71, "excellent"),
    (0.51, "acceptable"),
    (0.26, "poor"),
)
NOT_ACCEPTABLE = "not acceptable"


def quality_band(score: float) -> str:
    for lower, band in QUALITY_BANDS:
        if score >= lower:
            return band
    return NOT_ACCEPTABLE


def silhouette_score(X, labels: Sequence[int]) -> float:
    """Mean silhouette over all points, full pairwise Euclidean; singleton clusters score 0."""
    X = as_matrix(X)
    labels = np.asarray(labels)
    if len(labels) != X.shape[0]:
        raise ValueError(f"{len(labels)} labels for {X.shape[0]} rows")
    n_clusters = len(np.unique(labels))
    if n_clusters < 2:
        raise SingleCluster("Silhouette needs at least two clusters")
    if n_clusters == X.shape[0]:
        return 0.0
    return float(metrics.silhouette_score(X, labels, metric="euclidean"))


@dataclass
class KSweepResult:
    scores: Dict[int, float]
    best_k: int
    best_model: KMeansModel
    kmin: int
    kmax: int
    clamped: bool = False

    @property
    def best_score(self) -> float:
        return self.scores[self.best_k]

    @property
    def band(self) -> str:
        return quality_band(self.best_score)

    def to_dict(self) -> Dict:
        return {
            "kmin": self.kmin,
            "kmax": self.kmax,
            "kmax_clamped": self.clamped,
            "scores": {str(k): s for k, s in sorted(self.scores.items())},
            "best_k": self.best_k,
            "best_score": self.best_score,
            "band": self.band,
            "inertia": self.best_model.inertia,
        }


def effective_kmax(rows: int, kmax: int) -> int:
    if rows <= kmax:
        clamped = rows - 1
        msg = f"kmax {kmax} clamped to {clamped} for {rows} rows"
        logger.warning(msg)
        warnings.warn(msg, KRangeClampedWarning, stacklevel=3)
        return clamped
    return kmax


def sweep_k(X, kmin: int = DEFAULT_KMIN, kmax: int = DEFAULT_KMAX, seed: int = 0,
            workers: int = 1) -> KSweepResult:
    """Fit and score every K in [kmin, kmax]; best_k maximises the score, ties go to the smaller K."""
    X = as_matrix(X)
    if kmin < 2:
        raise ValueError(f"kmin must be at least 2, got {kmin}")
    if kmax < kmin:
        raise ValueError(f"kmax {kmax} is below kmin {kmin}")
    top = effective_kmax(X.shape[0], kmax)
    if top < kmin:
        raise TooFewRows(f"{X.shape[0]} rows leave no K in [{kmin}, {kmax}]")

    ks: List[int] = list(range(kmin, top + 1))

    def fit(k: int):
        model = kmeans_fit(X, k, seed ^ k)
        return model, silhouette_score(X, model.labels)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(fit, ks))
    else:
        results = [fit(k) for k in ks]

    scores: Dict[int, float] = {}
    best_k: Optional[int] = None
    best_model: Optional[KMeansModel] = None
    for k, (model, score) in zip(ks, results):
        scores[k] = score
        logger.debug(f"K={k}: silhouette {score:.4f}")
        if best_k is None or score > scores[best_k]:
            best_k, best_model = k, model

    logger.info(f"K sweep {kmin}..{top}: best K={best_k} silhouette {scores[best_k]:.4f} "
                f"({quality_band(scores[best_k])})")
    return KSweepResult(scores=scores, best_k=best_k, best_model=best_model,
                        kmin=kmin, kmax=top, clamped=top != kmax)
