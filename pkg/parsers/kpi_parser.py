# parsers/kpi_parser.py - Readers and writer for four-column KPI telemetry files
from __future__ import annotations
import csv
import io
import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Set, Tuple

from loader.errors import DuplicateSample, MalformedRow, NonFiniteValue
from .preprocessor import KpiPreprocessor

logger = logging.getLogger('jobclust.ingest.parser')

HEADER = ("kpi", "job", "node", "timestamp", "value")
FORMATS = ("csv", "jsonl")


@dataclass(frozen=True)
class KpiSample:
    """One monitoring reading."""
    kpi_id: str
    job_id: str
    node_id: str
    timestamp: int
    value: float


def detect_format(path: Path) -> str:
    suffix = Path(path).suffix.lower()
    if suffix in (".jsonl", ".ndjson"):
        return "jsonl"
    return "csv"


class KpiFileParser:
    """Parse KPI files row by row, keeping row order and failing on the first bad row."""

    def __init__(self, pre: Optional[KpiPreprocessor] = None):
        self.pre = pre or KpiPreprocessor()

    def parse(self, path: Path, fmt: Optional[str] = None) -> List[KpiSample]:
        path = Path(path)
        fmt = fmt or detect_format(path)
        if fmt not in FORMATS:
            raise ValueError(f"Unsupported KPI file format: {fmt}")

        text = self.pre.read_text(path)
        if fmt == "csv":
            samples = self._parse_csv(text)
        else:
            samples = self._parse_jsonl(text)

        logger.info(f"Parsed {len(samples)} samples from {path.name} ({fmt})")
        return samples

    # ---- csv
    def _parse_csv(self, text: str) -> List[KpiSample]:
        reader = csv.reader(io.StringIO(text))
        samples: List[KpiSample] = []
        seen: Set[Tuple[str, str, str, int]] = set()

        header = next(reader, None)
        if header is None:
            return samples
        if tuple(h.strip() for h in header) != HEADER:
            raise MalformedRow(1, f"expected header {','.join(HEADER)}, got {','.join(header)}")

        for row in reader:
            line = reader.line_num
            if not row:
                continue
            if len(row) != len(HEADER):
                raise MalformedRow(line, f"expected {len(HEADER)} fields, got {len(row)}")
            samples.append(self._build_sample(dict(zip(HEADER, row)), line, seen))
        return samples

    # ---- jsonl
    def _parse_jsonl(self, text: str) -> List[KpiSample]:
        samples: List[KpiSample] = []
        seen: Set[Tuple[str, str, str, int]] = set()

        for line, raw in enumerate(text.splitlines(), start=1):
            if not raw.strip():
                continue
            try:
                record = json.loads(raw)
            except json.JSONDecodeError as e:
                raise MalformedRow(line, f"invalid JSON: {e.msg}") from e
            if not isinstance(record, dict) or set(record) != set(HEADER):
                raise MalformedRow(line, f"expected keys {','.join(HEADER)}")
            samples.append(self._build_sample(record, line, seen))
        return samples

    # ---- shared
    def _build_sample(self, record: Dict, line: int, seen: Set) -> KpiSample:
        try:
            kpi = self.pre.normalize_identifier(record["kpi"])
            job = self.pre.normalize_identifier(record["job"])
            node = self.pre.normalize_identifier(record["node"])
            ts = self.pre.parse_timestamp(record["timestamp"])
        except ValueError as e:
            raise MalformedRow(line, str(e)) from e

        raw_value = record["value"]
        if self.pre.is_non_finite_token(raw_value):
            raise NonFiniteValue(line, str(raw_value))
        try:
            value = self.pre.parse_value(raw_value)
        except ValueError as e:
            raise MalformedRow(line, str(e)) from e
        if not math.isfinite(value):
            raise NonFiniteValue(line, str(raw_value))

        ident = (kpi, job, node, ts)
        if ident in seen:
            raise DuplicateSample((job, node, kpi), ts)
        seen.add(ident)
        return KpiSample(kpi, job, node, ts, value)


def parse_kpi_file(path: Path, fmt: Optional[str] = None) -> List[KpiSample]:
    """Parse one KPI file (csv or jsonl) into samples, preserving row order."""
    return KpiFileParser().parse(path, fmt)


def write_kpi_file(samples: Iterable[KpiSample], path: Path, fmt: Optional[str] = None) -> int:
    """Write samples in the ingest format; values use shortest round-trip decimals."""
    path = Path(path)
    fmt = fmt or detect_format(path)
    count = 0
    with open(path, "w", encoding="utf-8", newline="") as f:
        if fmt == "csv":
            f.write(",".join(HEADER) + "\n")
            for s in samples:
                f.write(f"{s.kpi_id},{s.job_id},{s.node_id},{s.timestamp},"
                        f"{KpiPreprocessor.format_value(s.value)}\n")
                count += 1
        elif fmt == "jsonl":
            for s in samples:
                f.write(json.dumps({"kpi": s.kpi_id, "job": s.job_id, "node": s.node_id,
                                    "timestamp": s.timestamp, "value": s.value}) + "\n")
                count += 1
        else:
            raise ValueError(f"Unsupported KPI file format: {fmt}")
    logger.debug(f"Wrote {count} samples to {path}")
    return count
