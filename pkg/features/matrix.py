# features/matrix.py - Jobs x (node, kpi, feature) matrix with imputation and CSV export
from __future__ import annotations
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from loader.dataset import Dataset
from loader.errors import ColumnLabelClash, EmptyDataset, MissingStageInput
from loader.retry_wrapper import with_retry
from .extractors import basic_stats, change_stats, location_stats, nonlinearity_stats, reoccurrence_stats
from .model_fits import model_fits
from .spec import FeatureSpec, column_label, expand, full_feature_set, validate_spec
from .spectral import spectral_stats

logger = logging.getLogger('jobclust.features.matrix')

FEATURES_FILE = "features.csv"
LAYOUT_FILE = "feature_layout.csv"
IMPUTATION_FILE = "imputation_log.jsonl"
LAYOUT_COLUMNS = ["column", "node", "kpi", "feature", "param"]

GROUP_CALCULATORS: Dict[str, Callable[[np.ndarray], Dict[str, float]]] = {
    "basic": basic_stats,
    "change": change_stats,
    "location": location_stats,
    "reoccurrence": reoccurrence_stats,
    "nonlinearity": nonlinearity_stats,
    "spectral": spectral_stats,
    "model": model_fits,
}

FEATURE_GROUPS: Dict[str, str] = {
    **{name: "basic" for name in ("length", "mean", "median", "minimum", "maximum", "standard_deviation",
                                  "variance", "abs_energy", "skewness", "kurtosis", "quantile")},
    **{name: "change" for name in ("absolute_sum_of_changes", "mean_abs_change", "mean_change",
                                   "mean_second_derivative_central")},
    **{name: "location" for name in ("first_location_of_maximum", "first_location_of_minimum",
                                     "count_above_mean", "count_below_mean", "longest_strike_above_mean",
                                     "longest_strike_below_mean", "index_mass_quantile", "number_peaks")},
    **{name: "reoccurrence" for name in ("percentage_of_reoccurring_values_to_all_values",
                                         "percentage_of_reoccurring_datapoints_to_all_datapoints",
                                         "binned_entropy")},
    **{name: "nonlinearity" for name in ("c3", "time_reversal_asymmetry_statistic", "autocorrelation",
                                         "sample_entropy")},
    "fft_aggregated": "spectral",
    "spkt_welch_density": "spectral",
    **{name: "model" for name in ("linear_trend", "ar_coefficient", "friedrich_coefficients",
                                  "augmented_dickey_fuller")},
}


@dataclass
class FeatureMatrix:
    """Jobs x labeled feature columns, plus the column layout and scaling state."""
    frame: pd.DataFrame                     # index: job ids, columns: labels
    layout: pd.DataFrame                    # index: labels, columns: node, kpi, feature, param
    scaled: bool = False
    scale_ranges: Optional[pd.DataFrame] = None   # index: labels, columns: min, max
    imputations: List[Dict] = field(default_factory=list)

    @property
    def rows(self) -> List[str]:
        return list(self.frame.index)

    @property
    def columns(self) -> List[str]:
        return list(self.frame.columns)

    @property
    def cells(self) -> np.ndarray:
        return self.frame.to_numpy(dtype=np.float64)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.frame.shape

    def subset(self, columns: Sequence[str]) -> "FeatureMatrix":
        columns = list(columns)
        ranges = self.scale_ranges.loc[columns] if self.scale_ranges is not None else None
        return replace(self, frame=self.frame[columns], layout=self.layout.loc[columns],
                       scale_ranges=ranges, imputations=[])

    def for_kpi(self, kpi: str) -> "FeatureMatrix":
        return self.subset(self.layout.index[self.layout["kpi"] == kpi])

    @property
    def kpis(self) -> List[str]:
        return sorted(self.layout["kpi"].unique())


# ------------------------------------------------------------------ extraction
def series_features(values: np.ndarray, groups: Iterable[str]) -> Dict[str, float]:
    out: Dict[str, float] = {}
    for group in groups:
        out.update(GROUP_CALCULATORS[group](values))
    return out


def _extract_one(args) -> Dict[str, float]:
    values, groups = args
    return series_features(values, groups)


def extract_matrix(dataset: Dataset, spec: Optional[Sequence[FeatureSpec]] = None,
                   workers: int = 1) -> FeatureMatrix:
    """One row per job, one column per (node, kpi, feature, param); gaps and undefined values become 0."""
    if not dataset.series_index:
        raise EmptyDataset("Cannot extract features from an empty dataset")
    spec = list(spec) if spec is not None else list(full_feature_set())
    validate_spec(spec)

    expanded = expand(spec)
    groups = sorted({FEATURE_GROUPS[f.name] for f in spec})
    keys = list(dataset.series_index)
    tasks = [(dataset.series_index[k].values, groups) for k in keys]

    logger.info(f"Extracting {len(expanded)} features from {len(keys)} series "
                f"({len(groups)} calculator groups, {workers} workers)")
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_extract_one, tasks, chunksize=max(1, len(tasks) // (workers * 4))))
    else:
        results = [_extract_one(t) for t in tasks]

    jobs, nodes, kpis = dataset.jobs, dataset.nodes, dataset.kpis
    job_pos = {j: i for i, j in enumerate(jobs)}
    block = len(expanded)
    layout_rows = []
    for node in nodes:
        for kpi in kpis:
            for feature, param, suffix in expanded:
                layout_rows.append((column_label(node, kpi, suffix), node, kpi, feature, param))
    labels = [r[0] for r in layout_rows]
    owners: Dict[str, Tuple[str, str]] = {}
    for label, node, kpi, _, _ in layout_rows:
        if owners.setdefault(label, (node, kpi)) != (node, kpi):
            raise ColumnLabelClash(label, owners[label], (node, kpi))

    cells = np.full((len(jobs), len(labels)), np.nan)
    present = np.zeros((len(jobs), len(nodes) * len(kpis)), dtype=bool)
    node_pos = {n: i for i, n in enumerate(nodes)}
    kpi_pos = {k: i for i, k in enumerate(kpis)}
    for (job, node, kpi), values in zip(keys, results):
        cell = node_pos[node] * len(kpis) + kpi_pos[kpi]
        present[job_pos[job], cell] = True
        cells[job_pos[job], cell * block:(cell + 1) * block] = [values[s] for _, _, s in expanded]

    imputations = _impute(cells, present, jobs, labels, block)

    frame = pd.DataFrame(cells, index=pd.Index(jobs, name="job"), columns=labels)
    layout = pd.DataFrame(layout_rows, columns=LAYOUT_COLUMNS).set_index("column")
    logger.info(f"Feature matrix {frame.shape[0]} x {frame.shape[1]}, {len(imputations)} imputed cells")
    return FeatureMatrix(frame=frame, layout=layout, scaled=False, imputations=imputations)


def _impute(cells: np.ndarray, present: np.ndarray, jobs: Sequence[str],
            labels: Sequence[str], block: int) -> List[Dict]:
    """Zero-fill in place; returns {job, column, reason} entries."""
    log: List[Dict] = []
    rows, cols = np.nonzero(~np.isfinite(cells))
    for r, c in zip(rows, cols):
        reason = "missing_series" if not present[r, c // block] else "undefined"
        log.append({"job": jobs[r], "column": labels[c], "reason": reason})
    cells[rows, cols] = 0.0

    undefined = sum(1 for e in log if e["reason"] == "undefined")
    if undefined:
        logger.warning(f"{undefined} undefined feature values imputed with 0")
    if len(log) > undefined:
        logger.info(f"{len(log) - undefined} cells of absent (job, node) series imputed with 0")
    return log


# ------------------------------------------------------------------ files
def write_feature_matrix(m: FeatureMatrix, out_dir: Path, features_file: str = FEATURES_FILE) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / features_file
    m.frame.to_csv(path, index=True, index_label="job", lineterminator="\n")
    m.layout.reset_index().to_csv(out_dir / LAYOUT_FILE, index=False, lineterminator="\n")
    if m.imputations:
        with open(out_dir / IMPUTATION_FILE, "w", encoding="utf-8", newline="\n") as f:
            for entry in m.imputations:
                f.write(json.dumps(entry) + "\n")
    elif not m.scaled:
        (out_dir / IMPUTATION_FILE).write_text("", encoding="utf-8")
    logger.debug(f"Wrote feature matrix {m.shape} to {path}")
    return path


@with_retry
def read_feature_matrix(out_dir: Path, features_file: str = FEATURES_FILE, scaled: bool = False) -> FeatureMatrix:
    out_dir = Path(out_dir)
    path, layout_path = out_dir / features_file, out_dir / LAYOUT_FILE
    for p in (path, layout_path):
        if not p.exists():
            raise MissingStageInput(f"Missing stage input: {p}")
    frame = pd.read_csv(path, dtype={"job": str}, keep_default_na=False, na_values=[],
                        float_precision="round_trip").set_index("job")
    frame = frame.astype(np.float64)
    layout = pd.read_csv(layout_path, dtype=str, keep_default_na=False).set_index("column")
    layout = layout.loc[list(frame.columns)]
    return FeatureMatrix(frame=frame, layout=layout, scaled=scaled)
