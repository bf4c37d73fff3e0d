# rankviz/plots.py - Plot frame of top-feature PCA scores, 2D/3D SVG scatters, silhouette curves and variance table
from __future__ import annotations
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Mapping, Sequence

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
from matplotlib.ticker import MaxNLocator
import numpy as np
import pandas as pd

from clustering.silhouette import QUALITY_BANDS
from features.matrix import FeatureMatrix
from loader.errors import EmptyFrame, LayoutMismatch
from .pca import pca_one_component
from .ranking import RankedFeature

logger = logging.getLogger('jobclust.rankviz.plots')

PLOT_FRAME_FILE = "plot_frame.csv"
PLOT_2D_FILE = "plot2d.svg"
PLOT_3D_FILE = "plot3d.svg"
VARIANCE_TABLE_FILE = "variance_by_kpi.csv"

# matplotlib tab10, cluster c takes PALETTE[c % 10]
PALETTE = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
           "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf")
VIEW_ELEVATION = 25.0
VIEW_AZIMUTH = -60.0
WIDTH_PT, HEIGHT_PT = 800, 600
MARKER_SIZE = 24

SVG_RC = {
    "svg.hashsalt": "jobclust",
    "svg.fonttype": "path",
    "path.simplify": False,
}


@dataclass
class PlotFrame:
    frame: pd.DataFrame     # index: job; one column per ranked feature, then 'cluster'

    @property
    def feature_columns(self) -> List[str]:
        return [c for c in self.frame.columns if c != "cluster"]

    def __len__(self) -> int:
        return len(self.frame)


def feature_block(m: FeatureMatrix, feature: RankedFeature) -> pd.DataFrame:
    """Jobs x nodes slice of one (kpi, feature, param) from the full matrix."""
    layout = m.layout
    mask = ((layout["kpi"] == feature.kpi) & (layout["feature"] == feature.feature)
            & (layout["param"] == feature.param))
    block = layout[mask].sort_values("node")
    if block.empty:
        raise LayoutMismatch(f"Matrix has no columns for {feature.label}")
    return m.frame[list(block.index)]


def build_plot_frame(m: FeatureMatrix, ranked: Sequence[RankedFeature], labels: pd.Series) -> PlotFrame:
    top = [r for r in ranked if r.top] or list(ranked)[:3]
    missing = [j for j in m.rows if j not in labels.index]
    if missing:
        raise LayoutMismatch(f"No cluster label for {len(missing)} jobs, first: {missing[0]}")

    data = {}
    for feature in top:
        data[feature.label] = pca_one_component(feature_block(m, feature).to_numpy())
    frame = pd.DataFrame(data, index=pd.Index(m.rows, name="job"))
    frame["cluster"] = labels.reindex(m.rows).astype(int).to_numpy()
    return PlotFrame(frame=frame)


def _scatter_groups(ax, frame: pd.DataFrame, columns: Sequence[str]) -> None:
    for c in sorted(frame["cluster"].unique()):
        part = frame[frame["cluster"] == c]
        coords = [part[col].to_numpy() for col in columns]
        kwargs = dict(s=MARKER_SIZE, c=PALETTE[int(c) % len(PALETTE)], marker="o",
                      linewidths=0, label=f"cluster {c}", gid=f"cluster_{c}")
        if len(columns) == 3:
            kwargs["depthshade"] = False
        ax.scatter(*coords, **kwargs)


def _save(fig, path: Path) -> None:
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def emit_plots(pf: PlotFrame, out_dir: Path) -> List[Path]:
    """Write plot_frame.csv, plot2d.svg (two or more features) and plot3d.svg (three features)."""
    if len(pf) == 0:
        raise EmptyFrame("Plot frame has no rows")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []

    csv_path = out_dir / PLOT_FRAME_FILE
    pf.frame.to_csv(csv_path, index=True, index_label="job", lineterminator="\n")
    written.append(csv_path)

    features = pf.feature_columns
    with plt.rc_context(SVG_RC):
        if len(features) >= 2:
            fig, ax = plt.subplots(figsize=(WIDTH_PT / 72, HEIGHT_PT / 72), dpi=72)
            _scatter_groups(ax, pf.frame, features[:2])
            ax.set_xlabel(features[0])
            ax.set_ylabel(features[1])
            ax.legend(loc="best")
            _save(fig, out_dir / PLOT_2D_FILE)
            written.append(out_dir / PLOT_2D_FILE)
        else:
            logger.warning(f"Only {len(features)} ranked feature(s); 2D plot skipped")

        if len(features) >= 3:
            fig = plt.figure(figsize=(WIDTH_PT / 72, HEIGHT_PT / 72), dpi=72)
            ax = fig.add_subplot(projection="3d", proj_type="ortho")
            ax.view_init(elev=VIEW_ELEVATION, azim=VIEW_AZIMUTH)
            _scatter_groups(ax, pf.frame, features[:3])
            ax.set_xlabel(features[0])
            ax.set_ylabel(features[1])
            ax.set_zlabel(features[2])
            ax.legend(loc="upper left")
            _save(fig, out_dir / PLOT_3D_FILE)
            written.append(out_dir / PLOT_3D_FILE)
        else:
            logger.info(f"{len(features)} ranked feature(s); 3D plot disabled")

    for stale in (PLOT_2D_FILE, PLOT_3D_FILE):
        path = out_dir / stale
        if path not in written and path.exists():
            path.unlink()
    logger.info(f"Wrote {len(written)} plot files to {out_dir}")
    return written


def silhouette_plot_file(group: str) -> str:
    return f"silhouette_{group}.svg"


def emit_silhouette_plot(scores: Mapping, best_k: int, group: str, out_dir: Path) -> Path:
    """Silhouette against K for one group; band limits dotted, the chosen K highlighted."""
    if not scores:
        raise EmptyFrame(f"No silhouette scores for group {group}")
    by_k = {int(k): float(v) for k, v in scores.items()}
    ks = sorted(by_k)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / silhouette_plot_file(group)

    with plt.rc_context(SVG_RC):
        fig, ax = plt.subplots(figsize=(WIDTH_PT / 72, HEIGHT_PT / 72), dpi=72)
        ax.plot(ks, [by_k[k] for k in ks], color=PALETTE[0], marker="o", markersize=5, gid="silhouette")
        for lower, band in QUALITY_BANDS:
            ax.axhline(lower, color=PALETTE[7], linestyle=":", linewidth=0.8)
            ax.annotate(band, (1.0, lower), xycoords=("axes fraction", "data"), ha="right", va="bottom",
                        fontsize=8, color=PALETTE[7])
        ax.scatter([best_k], [by_k[best_k]], s=MARKER_SIZE * 3, c=PALETTE[3], marker="o", linewidths=0,
                   gid="best_k", label=f"best K = {best_k}", zorder=3)
        ax.xaxis.set_major_locator(MaxNLocator(integer=True))
        ax.set_xlabel("K")
        ax.set_ylabel("silhouette")
        ax.set_title(group)
        ax.legend(loc="best")
        _save(fig, path)
    logger.info(f"Wrote silhouette curve for {group} ({len(ks)} K values) to {path}")
    return path


def emit_variance_table(table: pd.DataFrame, out_dir: Path) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / VARIANCE_TABLE_FILE
    table.to_csv(path, index=False, lineterminator="\n")
    logger.debug(f"Wrote {len(table)} (kpi, feature) variance rows to {path}")
    return path


def read_plot_frame(path: Path) -> PlotFrame:
    frame = pd.read_csv(path, dtype={"job": str}, keep_default_na=False, na_values=[],
                        float_precision="round_trip").set_index("job")
    frame["cluster"] = frame["cluster"].astype(np.int64)
    return PlotFrame(frame=frame)
