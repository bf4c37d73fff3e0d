# loader/dataset.py - Assemble KPI samples into the job x node grid of series
from __future__ import annotations
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from parsers.kpi_parser import KpiSample, parse_kpi_file
from .config import IO
from .errors import DuplicateSample

logger = logging.getLogger('jobclust.ingest.dataset')

SeriesKey = Tuple[str, str, str]  # (job_id, node_id, kpi_id)


@dataclass(frozen=True, eq=False)
class Series:
    """Ordered values of one (job, node, kpi) cell."""
    key: SeriesKey
    timestamps: np.ndarray
    values: np.ndarray

    def __len__(self) -> int:
        return len(self.values)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Series):
            return NotImplemented
        return (self.key == other.key
                and np.array_equal(self.timestamps, other.timestamps)
                and np.array_equal(self.values, other.values))


@dataclass(frozen=True, eq=False)
class Dataset:
    series_index: Dict[SeriesKey, Series]
    jobs: Tuple[str, ...]
    nodes: Tuple[str, ...]
    kpis: Tuple[str, ...]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return (self.jobs == other.jobs and self.nodes == other.nodes and self.kpis == other.kpis
                and list(self.series_index) == list(other.series_index)
                and all(self.series_index[k] == other.series_index[k] for k in self.series_index))

    def __len__(self) -> int:
        return len(self.series_index)

    def get(self, job: str, node: str, kpi: str) -> Optional[Series]:
        return self.series_index.get((job, node, kpi))

    @property
    def n_samples(self) -> int:
        return sum(len(s) for s in self.series_index.values())

    def restrict_kpis(self, kpis: Sequence[str]) -> "Dataset":
        keep = set(kpis)
        index = {k: s for k, s in self.series_index.items() if k[2] in keep}
        return _from_index(index)

    def to_samples(self) -> List[KpiSample]:
        samples = []
        for (job, node, kpi), s in self.series_index.items():
            samples.extend(KpiSample(kpi, job, node, int(t), float(v))
                           for t, v in zip(s.timestamps, s.values))
        return samples


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


def _from_index(index: Dict[SeriesKey, Series]) -> Dataset:
    keys = sorted(index)
    return Dataset(
        series_index={k: index[k] for k in keys},
        jobs=tuple(sorted({k[0] for k in keys})),
        nodes=tuple(sorted({k[1] for k in keys})),
        kpis=tuple(sorted({k[2] for k in keys})),
    )


def assemble(samples: Iterable[KpiSample]) -> Dataset:
    """Group samples per (job, node, kpi), sorting each series by timestamp."""
    frame = pd.DataFrame(
        [(s.job_id, s.node_id, s.kpi_id, s.timestamp, s.value) for s in samples],
        columns=["job", "node", "kpi", "timestamp", "value"],
    )
    if frame.empty:
        logger.warning("No samples to assemble")
        return Dataset(series_index={}, jobs=(), nodes=(), kpis=())

    frame = frame.sort_values(["job", "node", "kpi", "timestamp"], kind="mergesort")
    dupes = frame.duplicated(["job", "node", "kpi", "timestamp"])
    if dupes.any():
        row = frame[dupes].iloc[0]
        raise DuplicateSample((row.job, row.node, row.kpi), int(row.timestamp))

    index: Dict[SeriesKey, Series] = {}
    for (job, node, kpi), group in frame.groupby(["job", "node", "kpi"], sort=True):
        key = (str(job), str(node), str(kpi))
        index[key] = Series(
            key=key,
            timestamps=_frozen(group["timestamp"].to_numpy(dtype=np.int64)),
            values=_frozen(group["value"].to_numpy(dtype=np.float64)),
        )

    dataset = _from_index(index)
    logger.info(f"Assembled {len(dataset)} series: {len(dataset.jobs)} jobs, "
                f"{len(dataset.nodes)} nodes, {len(dataset.kpis)} KPIs")
    return dataset


def load_dataset(paths: Sequence[Path], fmt: Optional[str] = None,
                 kpis: Optional[Sequence[str]] = None,
                 workers: int = IO.reader_threads) -> Dataset:
    """Parse several KPI files concurrently and assemble the merged dataset."""
    paths = [Path(p) for p in paths]
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        parsed = list(pool.map(lambda p: parse_kpi_file(p, fmt), paths))

    samples: List[KpiSample] = [s for chunk in parsed for s in chunk]
    if kpis:
        wanted = set(kpis)
        samples = [s for s in samples if s.kpi_id in wanted]
    return assemble(samples)
