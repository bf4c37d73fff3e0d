# selection/variance.py - Variance-threshold and literature-preset column selection, per-KPI variance table
from __future__ import annotations
import logging
import warnings
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from features.matrix import FeatureMatrix
from features.spec import literature_preset_pairs, suffix_from_token
from loader.errors import EmptySelectionWarning, PreconditionError, TooShort, UnknownFeature

logger = logging.getLogger('jobclust.select')

VARIANCE_MODE = "variance_threshold"
PRESET_MODE = "literature_preset"
CHAIN_P_VALUES = (0.80, 0.85, 0.90)


@dataclass
class SelectionReport:
    mode: str
    column_variances: Dict[str, float]
    selected: List[str]
    p: Optional[float] = None
    threshold: Optional[float] = None
    scale_ranges: Dict[str, Dict[str, float]] = field(default_factory=dict)

    def to_dict(self) -> Dict:
        return {
            "mode": self.mode,
            "p": self.p,
            "threshold": self.threshold,
            "n_columns": len(self.column_variances),
            "n_selected": len(self.selected),
            "column_variances": self.column_variances,
            "scale_ranges": self.scale_ranges,
            "selected": self.selected,
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "SelectionReport":
        return cls(mode=data["mode"], column_variances=data["column_variances"],
                   selected=list(data["selected"]), p=data.get("p"),
                   threshold=data.get("threshold"), scale_ranges=data.get("scale_ranges", {}))


def threshold_for(p: float) -> float:
    """Variance of a Bernoulli(p) column: p(1 - p)."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0, 1), got {p}")
    return p * (1.0 - p)


def column_variance(col: Sequence[float]) -> float:
    """Sample variance with n - 1 denominator."""
    col = np.asarray(col, dtype=np.float64)
    if col.size < 2:
        raise TooShort(f"Column variance needs at least 2 values, got {col.size}")
    return float(np.var(col, ddof=1))


def _variances(m: FeatureMatrix) -> Dict[str, float]:
    cells = m.cells
    if cells.shape[0] < 2:
        raise TooShort(f"Column variance needs at least 2 jobs, got {cells.shape[0]}")
    values = np.var(cells, axis=0, ddof=1)
    return {c: float(v) for c, v in zip(m.columns, values)}


def _ranges(m: FeatureMatrix) -> Dict[str, Dict[str, float]]:
    if m.scale_ranges is None:
        return {}
    return {c: {"min": float(r["min"]), "max": float(r["max"])} for c, r in m.scale_ranges.iterrows()}


def variance_threshold_select(m: FeatureMatrix, p: float) -> SelectionReport:
    """Keep scaled columns whose sample variance is >= p(1 - p), in matrix order."""
    if not m.scaled:
        raise PreconditionError("Variance-threshold selection needs a scaled matrix")
    threshold = threshold_for(p)
    variances = _variances(m)
    selected = [c for c in m.columns if variances[c] >= threshold]

    if not selected:
        msg = f"No column reaches variance threshold {threshold:.4f} (p={p})"
        logger.warning(msg)
        warnings.warn(msg, EmptySelectionWarning, stacklevel=2)
    else:
        logger.info(f"Variance threshold {threshold:.4f} (p={p}): {len(selected)}/{len(variances)} columns kept")
    return SelectionReport(mode=VARIANCE_MODE, column_variances=variances, selected=selected,
                           p=p, threshold=threshold, scale_ranges=_ranges(m))


def literature_preset_select(m: FeatureMatrix) -> SelectionReport:
    """Keep the literature preset columns for every (node, kpi) present in the matrix."""
    preset = literature_preset_pairs()
    wanted = set(preset)
    layout = m.layout
    present = set(zip(layout["node"], layout["kpi"], layout["feature"], layout["param"]))

    for node, kpi in sorted(set(zip(layout["node"], layout["kpi"]))):
        for feature, param in preset:
            if (node, kpi, feature, param) not in present:
                name = suffix_from_token(feature, param)
                raise UnknownFeature(f"Matrix lacks preset column {name} for node {node}, kpi {kpi}")

    selected = [c for c, row in layout.iterrows() if (row["feature"], row["param"]) in wanted]
    variances = _variances(m) if m.shape[0] >= 2 else {}
    logger.info(f"Literature preset: {len(selected)}/{m.shape[1]} columns kept")
    return SelectionReport(mode=PRESET_MODE, column_variances=variances, selected=selected,
                           scale_ranges=_ranges(m))


def selection_chain(m: FeatureMatrix, ps: Sequence[float] = CHAIN_P_VALUES) -> Dict[str, int]:
    """Selected-column counts for increasing p >= 0.5; asserts the nested-subset chain."""
    ps = sorted(ps)
    if ps and ps[0] < 0.5:
        raise ValueError("The subset chain only holds for p >= 0.5")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", EmptySelectionWarning)
        reports = [variance_threshold_select(m, p) for p in ps]
    for lower, higher in zip(reports, reports[1:]):
        assert set(lower.selected) <= set(higher.selected), \
            f"selection at p={lower.p} is not contained in p={higher.p}"
    return {repr(r.p): len(r.selected) for r in reports}


def variance_by_kpi(m: FeatureMatrix) -> pd.DataFrame:
    """Mean scaled-column variance per (kpi, feature), averaged over nodes; highest first within a KPI."""
    if not m.scaled:
        raise PreconditionError("The variance table needs a scaled matrix")
    variances = _variances(m)
    layout = m.layout.loc[m.columns]
    table = pd.DataFrame({
        "kpi": layout["kpi"].to_numpy(),
        "feature": [suffix_from_token(f, p) for f, p in zip(layout["feature"], layout["param"])],
        "variance": [variances[c] for c in m.columns],
    })
    table = (table.groupby(["kpi", "feature"], sort=True)["variance"]
             .agg(n_nodes="size", mean_variance="mean")
             .reset_index())
    return (table.sort_values(["kpi", "mean_variance", "feature"], ascending=[True, False, True],
                              kind="mergesort")
            .reset_index(drop=True))
