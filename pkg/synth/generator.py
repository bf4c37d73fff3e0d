# synth/generator.py - Seeded synthetic KPI telemetry with known job regimes
from __future__ import annotations
import csv
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Tuple

import numpy as np

from loader.errors import InvalidConfig
from parsers.kpi_parser import KpiSample, write_kpi_file

logger = logging.getLogger('jobclust.synth')

SAMPLES_FILE = "kpi_samples.csv"
GROUND_TRUTH_FILE = "ground_truth.csv"
SAMPLE_INTERVAL = 60  # seconds between readings


@dataclass(frozen=True)
class Regime:
    """Behaviour shared by every series of the jobs in one regime."""
    name: str
    levels: Mapping[str, float]          # kpi -> base level
    noise: float = 1.0                   # Gaussian sigma
    trend: float = 0.0                   # added per sample
    burst_prob: float = 0.0
    burst_height: float = 0.0


@dataclass(frozen=True)
class WorkloadConfig:
    n_jobs: int = 200
    n_nodes: int = 5
    kpis: Tuple[str, ...] = ("idle", "system", "memory")
    regimes: Tuple[Regime, ...] = ()
    series_length: Tuple[int, int] = (60, 120)
    seed: int = 0
    balanced: bool = True
    regime_assignment: Optional[Tuple[int, ...]] = None

    def validate(self) -> None:
        errors: List[str] = []
        if self.n_jobs < 1:
            errors.append(f"n_jobs must be positive, got {self.n_jobs}")
        if self.n_nodes < 1:
            errors.append(f"n_nodes must be positive, got {self.n_nodes}")
        if not self.kpis or len(set(self.kpis)) != len(self.kpis):
            errors.append("kpis must be a non-empty list of distinct names")
        if len(self.regimes) < 2:
            errors.append(f"at least 2 regimes required, got {len(self.regimes)}")
        lo, hi = self.series_length
        if lo < 1 or hi < lo:
            errors.append(f"series_length must satisfy 1 <= min <= max, got {self.series_length}")

        for r in self.regimes:
            missing = [k for k in self.kpis if k not in r.levels]
            if missing:
                errors.append(f"regime {r.name} has no level for {', '.join(missing)}")
            if r.noise < 0 or r.burst_height < 0:
                errors.append(f"regime {r.name} amplitudes must be >= 0")
            if not 0.0 <= r.burst_prob <= 1.0:
                errors.append(f"regime {r.name} burst_prob must lie in [0, 1]")
            if not all(np.isfinite(list(r.levels.values()))) or not np.isfinite(r.trend):
                errors.append(f"regime {r.name} levels and trend must be finite")

        if self.regime_assignment is not None:
            if len(self.regime_assignment) != self.n_jobs:
                errors.append(f"regime_assignment has {len(self.regime_assignment)} entries "
                              f"for {self.n_jobs} jobs")
            elif any(not 0 <= a < len(self.regimes) for a in self.regime_assignment):
                errors.append("regime_assignment refers to an unknown regime")

        if errors:
            raise InvalidConfig("Invalid workload config: " + "; ".join(errors))


def default_config(seed: int = 0, n_jobs: int = 200, n_nodes: int = 5) -> WorkloadConfig:
    """Two regimes 20 units apart on every KPI; the second also drifts upward."""
    regimes = (
        Regime("compute", {"idle": 30.0, "system": 10.0, "memory": 40.0},
               noise=1.0, trend=0.0, burst_prob=0.02, burst_height=3.0),
        Regime("io_wait", {"idle": 50.0, "system": 30.0, "memory": 60.0},
               noise=1.0, trend=0.01, burst_prob=0.02, burst_height=3.0),
    )
    return WorkloadConfig(n_jobs=n_jobs, n_nodes=n_nodes, regimes=regimes, seed=seed)


def job_id(i: int) -> str:
    return f"job{i:04d}"


def node_id(i: int) -> str:
    return f"node{i:02d}"


def assign_regimes(config: WorkloadConfig) -> np.ndarray:
    if config.regime_assignment is not None:
        return np.asarray(config.regime_assignment, dtype=np.int64)
    rng = np.random.default_rng([config.seed, 0xA551])
    n_regimes = len(config.regimes)
    if config.balanced:
        return rng.permutation(np.arange(config.n_jobs) % n_regimes)
    return rng.integers(0, n_regimes, size=config.n_jobs)


def series_values(regime: Regime, kpi: str, length: int, rng: np.random.Generator) -> np.ndarray:
    t = np.arange(length, dtype=np.float64)
    values = regime.levels[kpi] + regime.trend * t
    if regime.noise > 0:
        values = values + regime.noise * rng.standard_normal(length)
    if regime.burst_prob > 0 and regime.burst_height > 0:
        values = values + regime.burst_height * (rng.random(length) < regime.burst_prob)
    return values


def generate(config: WorkloadConfig) -> Tuple[List[KpiSample], Dict[str, int]]:
    """Samples ordered by job, node, kpi, timestamp, plus the job -> regime ground truth."""
    config.validate()
    assignment = assign_regimes(config)
    lo, hi = config.series_length

    samples: List[KpiSample] = []
    truth: Dict[str, int] = {}
    for j in range(config.n_jobs):
        jid = job_id(j)
        regime_idx = int(assignment[j])
        truth[jid] = regime_idx
        regime = config.regimes[regime_idx]
        length = int(np.random.default_rng([config.seed, j]).integers(lo, hi + 1))
        timestamps = [t * SAMPLE_INTERVAL for t in range(length)]
        for n in range(config.n_nodes):
            nid = node_id(n)
            for k, kpi in enumerate(config.kpis):
                rng = np.random.default_rng([config.seed, j, n, k])
                values = series_values(regime, kpi, length, rng)
                samples.extend(KpiSample(kpi, jid, nid, ts, float(v)) for ts, v in zip(timestamps, values))

    logger.info(f"Generated {len(samples)} samples: {config.n_jobs} jobs, {config.n_nodes} nodes, "
                f"{len(config.kpis)} KPIs, {len(config.regimes)} regimes")
    return samples, truth


def write_ground_truth(truth: Mapping[str, int], path: Path) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["job", "regime"])
        for job in sorted(truth):
            writer.writerow([job, truth[job]])
    return path


def read_ground_truth(path: Path) -> Dict[str, int]:
    with open(path, "r", encoding="utf-8", newline="") as f:
        return {row["job"]: int(row["regime"]) for row in csv.DictReader(f)}


def write_workload(config: WorkloadConfig, out_dir: Path) -> Tuple[Path, Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    samples, truth = generate(config)
    samples_path = out_dir / SAMPLES_FILE
    write_kpi_file(samples, samples_path, "csv")
    truth_path = write_ground_truth(truth, out_dir / GROUND_TRUTH_FILE)
    return samples_path, truth_path
