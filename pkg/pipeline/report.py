# pipeline/report.py - JSON stage files and the run summary
from __future__ import annotations
import json
import logging
import subprocess
from pathlib import Path
from typing import Dict, List, Mapping, Optional

from sklearn.metrics import adjusted_rand_score

from loader.errors import MissingStageInput
from loader.retry_wrapper import with_retry
from . import __version__

logger = logging.getLogger('jobclust.pipeline.report')

REPORT_FILE = "report.json"
CLUSTERING_INPUT = "min-max scaled features"


def write_json(data, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(data, f, indent=2, allow_nan=False)
        f.write("\n")
    return path


@with_retry
def read_json(path: Path):
    path = Path(path)
    if not path.exists():
        raise MissingStageInput(f"Missing stage input: {path}")
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


def artifact_version() -> str:
    """`git describe` of the source tree, or the package version outside a checkout."""
    try:
        out = subprocess.run(["git", "describe", "--tags", "--always", "--dirty"],
                             cwd=Path(__file__).resolve().parent, capture_output=True,
                             text=True, timeout=5, check=True)
        described = out.stdout.strip()
        if described:
            return described
    except (OSError, subprocess.SubprocessError):
        pass
    return __version__


def best_group(sweeps: Mapping[str, Mapping]) -> str:
    """Group with the highest best silhouette; ties go to the lexicographically first group."""
    return sorted(sweeps, key=lambda g: (-sweeps[g]["best_score"], g))[0]


def partition_agreement(truth: Mapping[str, int], labels: Mapping[str, int]) -> Optional[float]:
    jobs = sorted(set(truth) & set(labels))
    if not jobs:
        logger.warning("Ground truth shares no job with the clustering labels")
        return None
    if len(jobs) < len(labels):
        logger.warning(f"Ground truth covers {len(jobs)} of {len(labels)} clustered jobs")
    return float(adjusted_rand_score([truth[j] for j in jobs], [labels[j] for j in jobs]))


def build_report(config: Dict, selection: Dict, sweeps: Dict, ranking: Dict, plots: List[str],
                 labels: Optional[Dict[str, Dict[str, int]]] = None,
                 truth: Optional[Mapping[str, int]] = None,
                 comparison: Optional[Dict] = None) -> Dict:
    chosen = best_group(sweeps)
    groups = {}
    for group in sorted(sweeps):
        sel = selection["groups"][group]
        entry = {
            "selection": {k: sel.get(k) for k in ("mode", "p", "threshold", "n_columns", "n_selected")},
            "silhouette_by_k": sweeps[group]["scores"],
            "best_k": sweeps[group]["best_k"],
            "best_score": sweeps[group]["best_score"],
            "band": sweeps[group]["band"],
            "top_features": [r["label"] for r in ranking.get(group, []) if r["top"]],
        }
        if "selection_chain" in sel:
            entry["selection"]["selection_chain"] = sel["selection_chain"]
        if truth is not None and labels is not None:
            entry["adjusted_rand_index"] = partition_agreement(truth, labels[group])
        groups[group] = entry

    report = {
        "version": artifact_version(),
        "config": config,
        "experiment": selection["experiment"],
        "selection_mode": selection["mode"],
        "clustering_input": CLUSTERING_INPUT,
        "best_group": chosen,
        "best_k": groups[chosen]["best_k"],
        "best_score": groups[chosen]["best_score"],
        "band": groups[chosen]["band"],
        "top_features": groups[chosen]["top_features"],
        "plots": plots,
        "groups": groups,
    }
    if truth is not None and labels is not None:
        report["adjusted_rand_index"] = groups[chosen]["adjusted_rand_index"]
    if comparison:
        report["threshold_comparison"] = comparison
    return report
