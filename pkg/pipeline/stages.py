# pipeline/stages.py - Stage commands with file handoff under out_dir
from __future__ import annotations
import logging
import warnings
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from clustering.kmeans import KMeansModel
from clustering.silhouette import sweep_k
from config import PipelineConfig
from features.matrix import FeatureMatrix, extract_matrix, read_feature_matrix, write_feature_matrix
from features.spec import get_feature_set
from loader.dataset import load_dataset
from loader.errors import EmptySelectionWarning, EmptyDataset, MissingStageInput, PreconditionError
from loader.retry_wrapper import with_retry
from loader.validation import DatasetValidator
from rankviz.plots import build_plot_frame, emit_plots, emit_silhouette_plot, emit_variance_table
from rankviz.ranking import RankedFeature, rank_features
from selection.scaling import min_max_scale
from selection.variance import (CHAIN_P_VALUES, SelectionReport, literature_preset_select,
                                selection_chain, variance_by_kpi, variance_threshold_select)
from synth.generator import default_config, read_ground_truth, write_workload
from .report import REPORT_FILE, best_group, build_report, read_json, write_json

logger = logging.getLogger('jobclust.pipeline')

SCALED_FILE = "features_scaled.csv"
SELECTION_FILE = "selection.json"
SWEEP_FILE = "sweep.json"
LABELS_FILE = "labels.csv"
RANKING_FILE = "ranking.json"
COMPARISON_FILE = "threshold_comparison.json"
ALL_GROUP = "all"


def centroids_file(group: str) -> str:
    return f"centroids_{group}.csv"


def _groups(m: FeatureMatrix, experiment: str) -> Dict[str, FeatureMatrix]:
    if experiment == "per_kpi":
        return {kpi: m.for_kpi(kpi) for kpi in m.kpis}
    return {ALL_GROUP: m}


# ------------------------------------------------------------------ extract
def cmd_extract(cfg: PipelineConfig) -> FeatureMatrix:
    cfg.validate_inputs()
    dataset = load_dataset(cfg.inputs, cfg.format_or_none, cfg.kpis or None, cfg.workers)
    if not len(dataset):
        raise EmptyDataset(f"No samples in {', '.join(str(p) for p in cfg.inputs)}"
                           + (f" for KPIs {', '.join(cfg.kpis)}" if cfg.kpis else ""))
    result = DatasetValidator().validate(dataset)
    for warning in result.warnings:
        logger.warning(warning)

    m = extract_matrix(dataset, get_feature_set(cfg.feature_set), workers=cfg.workers)
    write_feature_matrix(m, cfg.out_dir)
    return m


# ------------------------------------------------------------------ select
def cmd_select(cfg: PipelineConfig) -> Dict[str, SelectionReport]:
    scaled = min_max_scale(read_feature_matrix(cfg.out_dir))
    mode = cfg.resolved_selection_mode

    reports: Dict[str, SelectionReport] = {}
    payload: Dict[str, Dict] = {}
    for group, m in _groups(scaled, cfg.experiment).items():
        if mode == "preset":
            report = literature_preset_select(m)
        else:
            report = variance_threshold_select(m, cfg.p)
        reports[group] = report
        payload[group] = report.to_dict()
        if mode == "variance":
            chain = {*CHAIN_P_VALUES, cfg.p} if cfg.p >= 0.5 else set(CHAIN_P_VALUES)
            payload[group]["selection_chain"] = selection_chain(m, sorted(chain))

    write_feature_matrix(scaled, cfg.out_dir, SCALED_FILE)
    emit_variance_table(variance_by_kpi(scaled), cfg.out_dir)
    write_json({"experiment": cfg.experiment, "mode": mode, "groups": payload}, cfg.out_dir / SELECTION_FILE)
    return reports


# ------------------------------------------------------------------ cluster
def _read_scaled(cfg: PipelineConfig) -> FeatureMatrix:
    return read_feature_matrix(cfg.out_dir, SCALED_FILE, scaled=True)


def _write_centroids(model: KMeansModel, columns: List[str], path: Path) -> None:
    frame = pd.DataFrame(model.centroids, columns=columns,
                         index=pd.Index(range(model.k), name="cluster"))
    frame.to_csv(path, lineterminator="\n")


def cmd_cluster(cfg: PipelineConfig) -> Dict[str, Dict]:
    scaled = _read_scaled(cfg)
    selection = read_json(cfg.out_dir / SELECTION_FILE)

    sweeps: Dict[str, Dict] = {}
    labels = pd.DataFrame(index=pd.Index(scaled.rows, name="job"))
    for group, sel in selection["groups"].items():
        columns = sel["selected"]
        if not columns:
            logger.warning(f"Group {group}: no selected columns; not clustered")
            continue
        result = sweep_k(scaled.frame[columns].to_numpy(), cfg.kmin, cfg.kmax, cfg.seed, cfg.workers)
        sweeps[group] = result.to_dict()
        labels[group] = result.best_model.labels
        _write_centroids(result.best_model, columns, cfg.out_dir / centroids_file(group))

    if not sweeps:
        raise PreconditionError("No group has selected columns to cluster")

    write_json(sweeps, cfg.out_dir / SWEEP_FILE)
    labels.to_csv(cfg.out_dir / LABELS_FILE, lineterminator="\n")
    if cfg.compare_p:
        if cfg.experiment == "all_kpi":
            write_json(threshold_comparison(scaled, cfg), cfg.out_dir / COMPARISON_FILE)
        else:
            logger.warning("compare_p only applies to all_kpi experiments; ignored")
    return sweeps


def threshold_comparison(scaled: FeatureMatrix, cfg: PipelineConfig) -> Dict[str, Dict]:
    """Best K and silhouette per variance threshold on the same scaled matrix."""
    out: Dict[str, Dict] = {}
    for p in sorted(cfg.compare_p):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", EmptySelectionWarning)
            report = variance_threshold_select(scaled, p)
        entry = {"threshold": report.threshold, "n_selected": len(report.selected),
                 "best_k": None, "best_score": None, "band": None}
        if report.selected:
            result = sweep_k(scaled.frame[report.selected].to_numpy(), cfg.kmin, cfg.kmax,
                             cfg.seed, cfg.workers)
            entry.update(best_k=result.best_k, best_score=result.best_score, band=result.band)
        out[repr(p)] = entry
    return out


# ------------------------------------------------------------------ rank
@with_retry
def _read_labels(out_dir: Path) -> pd.DataFrame:
    path = Path(out_dir) / LABELS_FILE
    if not path.exists():
        raise MissingStageInput(f"Missing stage input: {path}")
    return pd.read_csv(path, dtype={"job": str}, keep_default_na=False, na_values=[],
                       float_precision="round_trip").set_index("job")


@with_retry
def _read_model(out_dir: Path, group: str, sweep: Dict, labels: pd.DataFrame) -> Tuple[KMeansModel, List[str]]:
    path = Path(out_dir) / centroids_file(group)
    if not path.exists():
        raise MissingStageInput(f"Missing stage input: {path}")
    frame = pd.read_csv(path, float_precision="round_trip").set_index("cluster")
    model = KMeansModel(k=len(frame), centroids=frame.to_numpy(dtype=np.float64),
                        labels=labels[group].to_numpy(dtype=np.int64), inertia=sweep["inertia"],
                        seed=-1, iterations=0)
    return model, list(frame.columns)


def cmd_rank(cfg: PipelineConfig) -> Dict[str, List[RankedFeature]]:
    sweeps = read_json(cfg.out_dir / SWEEP_FILE)
    labels = _read_labels(cfg.out_dir)
    layout = _read_scaled(cfg).layout

    ranked: Dict[str, List[RankedFeature]] = {}
    for group in sorted(sweeps):
        model, columns = _read_model(cfg.out_dir, group, sweeps[group], labels)
        ranked[group] = rank_features(model, columns, layout, cfg.top_n)
    write_json({g: [r.to_dict() for r in rs] for g, rs in ranked.items()}, cfg.out_dir / RANKING_FILE)
    return ranked


# ------------------------------------------------------------------ plot
def cmd_plot(cfg: PipelineConfig) -> List[Path]:
    sweeps = read_json(cfg.out_dir / SWEEP_FILE)
    ranking = read_json(cfg.out_dir / RANKING_FILE)
    labels = _read_labels(cfg.out_dir)
    scaled = _read_scaled(cfg)

    group = best_group(sweeps)
    ranked = [RankedFeature.from_dict(r) for r in ranking[group]]
    logger.info(f"Plotting group {group} (best silhouette {sweeps[group]['best_score']:.4f})")
    frame = build_plot_frame(scaled, ranked, labels[group])
    written = emit_plots(frame, cfg.out_dir)
    for name in sorted(sweeps):
        written.append(emit_silhouette_plot(sweeps[name]["scores"], sweeps[name]["best_k"], name, cfg.out_dir))
    return written


# ------------------------------------------------------------------ synth / pipeline
def cmd_synth(cfg: PipelineConfig, n_jobs: int = 200, n_nodes: int = 5) -> Tuple[Path, Path]:
    workload = default_config(seed=cfg.seed, n_jobs=n_jobs, n_nodes=n_nodes)
    samples_path, truth_path = write_workload(workload, cfg.out_dir)
    logger.info(f"Synthetic workload written to {samples_path} and {truth_path}")
    return samples_path, truth_path


def cmd_pipeline(cfg: PipelineConfig) -> Dict:
    """extract, select, cluster, rank and plot in order, then report.json."""
    # inputs are checked before the first file is written
    cfg.validate_inputs()
    cmd_extract(cfg)
    cmd_select(cfg)
    sweeps = cmd_cluster(cfg)
    cmd_rank(cfg)
    plots = cmd_plot(cfg)
    return write_summary(cfg, sweeps, [p.name for p in plots])


def write_summary(cfg: PipelineConfig, sweeps: Optional[Dict] = None,
                  plots: Optional[List[str]] = None) -> Dict:
    sweeps = sweeps if sweeps is not None else read_json(cfg.out_dir / SWEEP_FILE)
    selection = read_json(cfg.out_dir / SELECTION_FILE)
    ranking = read_json(cfg.out_dir / RANKING_FILE)
    comparison_path = cfg.out_dir / COMPARISON_FILE
    comparison = read_json(comparison_path) if cfg.compare_p and comparison_path.exists() else None

    labels = truth = None
    if cfg.ground_truth is not None:
        frame = _read_labels(cfg.out_dir)
        labels = {g: {j: int(v) for j, v in frame[g].items()} for g in sweeps}
        truth = read_ground_truth(cfg.ground_truth)

    report = build_report(cfg.to_dict(), selection, sweeps, ranking, plots or [],
                          labels=labels, truth=truth, comparison=comparison)
    write_json(report, cfg.out_dir / REPORT_FILE)
    logger.info(f"Report written: best K={report['best_k']} ({report['band']}) for group {report['best_group']}")
    return report
