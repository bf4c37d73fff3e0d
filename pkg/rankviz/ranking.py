# rankviz/ranking.py - Rank features by the spread of their node-averaged centroid values
from __future__ import annotations
import logging
from dataclasses import dataclass
from itertools import combinations
from typing import Dict, List, Sequence, Tuple

import numpy as np
import pandas as pd

from clustering.kmeans import KMeansModel
from features.spec import suffix_from_token
from loader.errors import LayoutMismatch

logger = logging.getLogger('jobclust.rankviz.ranking')

DEFAULT_TOP_N = 3

FeatureKey = Tuple[str, str, str]   # (kpi, feature, param token)


@dataclass(frozen=True)
class RankedFeature:
    kpi: str
    feature: str
    param: str
    per_cluster_means: Tuple[float, ...]
    distance: float
    rank: int
    top: bool = False

    @property
    def label(self) -> str:
        return f"{self.kpi}_{suffix_from_token(self.feature, self.param)}"

    @property
    def key(self) -> FeatureKey:
        return (self.kpi, self.feature, self.param)

    def to_dict(self) -> Dict:
        return {
            "rank": self.rank,
            "label": self.label,
            "kpi": self.kpi,
            "feature": self.feature,
            "param": self.param,
            "per_cluster_means": list(self.per_cluster_means),
            "distance": self.distance,
            "top": self.top,
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "RankedFeature":
        return cls(kpi=data["kpi"], feature=data["feature"], param=data["param"],
                   per_cluster_means=tuple(data["per_cluster_means"]), distance=data["distance"],
                   rank=data["rank"], top=data["top"])


def cluster_spread(means: Sequence[float]) -> float:
    """Root-sum-of-squares of all pairwise differences; |m0 - m1| for two clusters."""
    return float(np.sqrt(sum((a - b) ** 2 for a, b in combinations(means, 2))))


def rank_features(model: KMeansModel, columns: Sequence[str], layout: pd.DataFrame,
                  top_n: int = DEFAULT_TOP_N) -> List[RankedFeature]:
    columns = list(columns)
    centroids = np.asarray(model.centroids, dtype=np.float64)
    if centroids.shape[1] != len(columns):
        raise LayoutMismatch(f"Centroids have {centroids.shape[1]} components for {len(columns)} columns")
    unmapped = [c for c in columns if c not in layout.index]
    if unmapped:
        raise LayoutMismatch(f"{len(unmapped)} columns missing from layout, first: {unmapped[0]}")

    groups: Dict[FeatureKey, List[int]] = {}
    for i, col in enumerate(columns):
        row = layout.loc[col]
        groups.setdefault((row["kpi"], row["feature"], row["param"]), []).append(i)

    scored = []
    for key, idx in groups.items():
        means = tuple(float(v) for v in centroids[:, idx].mean(axis=1))
        scored.append((key, means, cluster_spread(means)))

    def sort_key(item):
        (kpi, feature, param), _, distance = item
        return (-distance, f"{kpi}_{suffix_from_token(feature, param)}")

    scored.sort(key=sort_key)
    ranked = [RankedFeature(kpi=k[0], feature=k[1], param=k[2], per_cluster_means=means,
                            distance=d, rank=i + 1, top=i < top_n)
              for i, (k, means, d) in enumerate(scored)]
    if ranked:
        logger.info(f"Ranked {len(ranked)} features; top: {', '.join(r.label for r in ranked[:top_n])}")
    return ranked
