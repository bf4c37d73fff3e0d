"""
Test suite for KPI ingestion.
Covers the CSV and JSONL readers, the writer and job x node assembly.
"""

import pytest
from pathlib import Path

import numpy as np

from loader.dataset import assemble, load_dataset
from loader.errors import DuplicateSample, InvalidEncoding, JobClustError, MalformedRow, NonFiniteValue
from loader.validation import DatasetValidator
from parsers.kpi_parser import KpiFileParser, KpiSample, detect_format, parse_kpi_file, write_kpi_file

# Test fixtures directory
FIXTURES_DIR = Path(__file__).parent / "fixtures"

HEADER = "kpi,job,node,timestamp,value\n"


class TestCsvParser:
    """Four-column CSV reader."""

    def setup_method(self):
        self.parser = KpiFileParser()

    def test_parse_fixture(self):
        samples = self.parser.parse(FIXTURES_DIR / "sample_kpi.csv")

        assert len(samples) == 12
        assert samples[0] == KpiSample("idle", "1001", "c6601", 120, 97.5)
        # row order is preserved
        assert [s.timestamp for s in samples[:3]] == [120, 60, 0]
        assert samples[-1].value == pytest.approx(0.001)

    def test_header_only_file(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text(HEADER, encoding="utf-8")
        assert self.parser.parse(path) == []

    def test_bom_is_ignored(self, tmp_path):
        path = tmp_path / "bom.csv"
        path.write_bytes(("\ufeff" + HEADER + "idle,j1,n1,0,1.5\n").encode("utf-8"))
        assert self.parser.parse(path) == [KpiSample("idle", "j1", "n1", 0, 1.5)]

    def test_invalid_utf8_names_file_and_line(self, tmp_path):
        path = tmp_path / "latin1.csv"
        path.write_bytes(HEADER.encode("utf-8") + b"idle,j1,n1,0,1.0\nidle,j\xe9,n1,60,2.0\n")
        with pytest.raises(InvalidEncoding) as err:
            self.parser.parse(path)
        assert err.value.line == 3
        assert "latin1.csv" in str(err.value)
        assert isinstance(err.value, JobClustError)

    def test_wrong_header(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("metric,job,node,timestamp,value\n", encoding="utf-8")
        with pytest.raises(MalformedRow) as err:
            self.parser.parse(path)
        assert err.value.line == 1

    def test_wrong_arity_reports_line(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text(HEADER + "idle,j1,n1,0,1.0\nidle,j1,n1,60\n", encoding="utf-8")
        with pytest.raises(MalformedRow) as err:
            self.parser.parse(path)
        assert err.value.line == 3

    def test_unparseable_value(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text(HEADER + "idle,j1,n1,0,abc\n", encoding="utf-8")
        with pytest.raises(MalformedRow) as err:
            self.parser.parse(path)
        assert err.value.line == 2

    def test_negative_timestamp(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text(HEADER + "idle,j1,n1,-5,1.0\n", encoding="utf-8")
        with pytest.raises(MalformedRow):
            self.parser.parse(path)

    @pytest.mark.parametrize("token", ["NaN", "inf", "-Infinity"])
    def test_non_finite_value(self, tmp_path, token):
        path = tmp_path / "bad.csv"
        path.write_text(HEADER + "idle,j1,n1,0,1.0\n" + f"idle,j1,n1,60,{token}\n", encoding="utf-8")
        with pytest.raises(NonFiniteValue) as err:
            self.parser.parse(path)
        assert err.value.line == 3

    def test_duplicate_sample(self, tmp_path):
        path = tmp_path / "dup.csv"
        path.write_text(HEADER + "idle,j1,n1,0,1.0\nidle,j1,n1,0,2.0\n", encoding="utf-8")
        with pytest.raises(DuplicateSample) as err:
            self.parser.parse(path)
        assert err.value.key == ("j1", "n1", "idle")
        assert err.value.timestamp == 0


class TestJsonlParser:
    """One JSON object per line."""

    def test_matches_csv_fixture(self):
        csv_samples = parse_kpi_file(FIXTURES_DIR / "sample_kpi.csv")
        jsonl_samples = parse_kpi_file(FIXTURES_DIR / "sample_kpi.jsonl")
        assert jsonl_samples == csv_samples

    def test_missing_key(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text('{"kpi": "idle", "job": "j1", "node": "n1", "value": 1.0}\n', encoding="utf-8")
        with pytest.raises(MalformedRow) as err:
            parse_kpi_file(path)
        assert err.value.line == 1

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text('{"kpi": "idle", "job": "j1", "node": "n1", "timestamp": 0, "value": 1}\n{oops\n',
                        encoding="utf-8")
        with pytest.raises(MalformedRow) as err:
            parse_kpi_file(path)
        assert err.value.line == 2

    def test_nan_literal(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text('{"kpi": "idle", "job": "j1", "node": "n1", "timestamp": 0, "value": NaN}\n',
                        encoding="utf-8")
        with pytest.raises(NonFiniteValue):
            parse_kpi_file(path)

    def test_detect_format(self):
        assert detect_format(Path("a.jsonl")) == "jsonl"
        assert detect_format(Path("a.ndjson")) == "jsonl"
        assert detect_format(Path("a.csv")) == "csv"


class TestWriter:
    """Writer output parses back to the same samples."""

    @pytest.mark.parametrize("name", ["out.csv", "out.jsonl"])
    def test_written_file_parses_unchanged(self, tmp_path, name):
        samples = parse_kpi_file(FIXTURES_DIR / "sample_kpi.csv")
        samples.append(KpiSample("memory", "j9", "n9", 5, 0.1 + 0.2))
        path = tmp_path / name
        assert write_kpi_file(samples, path) == len(samples)
        assert parse_kpi_file(path) == samples


class TestAssemble:
    """Grouping into (job, node, kpi) series."""

    def setup_method(self):
        self.samples = parse_kpi_file(FIXTURES_DIR / "sample_kpi.csv")

    def test_series_sorted_by_timestamp(self):
        ds = assemble(self.samples)
        s = ds.get("1001", "c6601", "idle")
        assert list(s.timestamps) == [0, 60, 120]
        assert list(s.values) == [99.0, 98.25, 97.5]

    def test_axes(self):
        ds = assemble(self.samples)
        assert ds.jobs == ("1001", "1002")
        assert ds.nodes == ("c6601", "c6602", "c6603")
        assert ds.kpis == ("idle", "system")
        assert len(ds) == 5
        assert ds.n_samples == 12
        assert ds.get("1002", "c6602", "idle") is None

    def test_order_independent(self):
        assert assemble(list(reversed(self.samples))) == assemble(self.samples)

    def test_series_are_read_only(self):
        s = assemble(self.samples).get("1001", "c6601", "idle")
        with pytest.raises(ValueError):
            s.values[0] = 0.0

    def test_empty_input(self):
        ds = assemble([])
        assert len(ds) == 0
        assert ds.jobs == ()

    def test_cross_file_duplicate(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        a.write_text(HEADER + "idle,j1,n1,0,1.0\n", encoding="utf-8")
        b.write_text(HEADER + "idle,j1,n1,0,1.0\n", encoding="utf-8")
        with pytest.raises(DuplicateSample):
            load_dataset([a, b])

    def test_load_dataset_restricts_kpis(self):
        ds = load_dataset([FIXTURES_DIR / "sample_kpi.csv"], kpis=["system"])
        assert ds.kpis == ("system",)
        assert len(ds) == 3

    def test_round_trip_through_samples(self):
        ds = assemble(self.samples)
        assert assemble(ds.to_samples()) == ds


class TestDatasetValidator:
    """Coverage and length warnings."""

    def test_fixture_warnings(self):
        ds = assemble(parse_kpi_file(FIXTURES_DIR / "sample_kpi.csv"))
        result = DatasetValidator().validate(ds)
        assert result.is_valid
        # 2 jobs x 3 nodes x 2 kpis = 12 cells, 5 present
        assert any("7 of 12" in w for w in result.warnings)
        assert any("augmented_dickey_fuller" in w for w in result.warnings)

    def test_empty_dataset_is_error(self):
        result = DatasetValidator().validate(assemble([]))
        assert not result.is_valid
        assert result.errors

    def test_regular_complete_dataset(self):
        samples = [KpiSample("idle", "j1", "n1", t * 10, float(np.sin(t))) for t in range(40)]
        result = DatasetValidator().validate(assemble(samples))
        assert result.is_valid
        assert result.warnings == []
