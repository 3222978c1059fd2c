"""Tests for CSV outputs and atomic writes."""

import pytest

from faas_rightsizer.errors import RightsizerError
from faas_rightsizer.export import (
    atomic_write, format_value, read_results, write_metrics, write_results, write_summary, write_table,
)
from faas_rightsizer.metrics import summarize
from faas_rightsizer.models import InvocationRecord


def sample_records():
    return [
        InvocationRecord(invocation_id=0, function="f", input_id="a", arrival_s=0.25, slo_s=2.8,
                         vcpus=16, memory_mb=4096, placement="cold", worker=3, cold_start_s=0.5,
                         exec_s=2.0, e2e_s=2.5, slo_met=True, max_vcpus_used=1.0, peak_mem_mb=64.0),
        InvocationRecord(invocation_id=1, function="g", input_id="b", arrival_s=1.5, slo_s=1.0,
                         vcpus=1, memory_mb=128, vcpu_from_model=True, mem_from_model=True,
                         placement="warm_exact", worker=0, exec_s=0.4, e2e_s=0.4, slo_met=False,
                         max_vcpus_used=1.0, peak_mem_mb=128.0, oom_killed=True),
    ]


class TestFormatValue:
    """Test the text form of CSV cells."""

    def test_values(self):
        assert format_value(True) == "true"
        assert format_value(False) == "false"
        assert format_value(0.1) == "0.100000"
        assert format_value(7) == "7"
        assert format_value("cold") == "cold"


class TestResults:
    """Test the results table."""

    def test_write_and_read(self, tmp_path):
        path = tmp_path / "results.csv"
        write_results(sample_records(), path, {"seed": "4", "scheduler_policy": "hashing"})
        records, metadata = read_results(path)
        assert metadata == {"seed": "4", "scheduler_policy": "hashing"}
        assert records == sample_records()

    def test_header_and_metadata_lines(self, tmp_path):
        path = tmp_path / "results.csv"
        write_results(sample_records(), path, {"seed": "4"})
        lines = path.read_text().splitlines()
        assert lines[0] == "# seed=4"
        assert lines[1].split(",") == InvocationRecord.column_names()
        assert len(lines) == 4

    def test_missing_columns(self, tmp_path):
        path = tmp_path / "results.csv"
        path.write_text("invocation_id,function\n0,f\n")
        with pytest.raises(RightsizerError, match="lacks columns"):
            read_results(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(RightsizerError, match="does not exist"):
            read_results(tmp_path / "results.csv")

    def test_metrics_stable_through_file(self, tmp_path):
        """Metrics of the re-read table are written identically twice."""
        write_results(sample_records(), tmp_path / "results.csv")
        records, _ = read_results(tmp_path / "results.csv")
        write_metrics(summarize(records), tmp_path / "a.csv")
        write_metrics(summarize(read_results(tmp_path / "results.csv")[0]), tmp_path / "b.csv")
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


class TestAtomicWrite:
    """Test temp-file-then-rename writes."""

    def test_creates_parent_dirs(self, tmp_path):
        path = tmp_path / "nested" / "dir" / "table.csv"
        write_table(path, ("a", "b"), [(1, 2.5)])
        assert path.read_text() == "a,b\n1,2.500000\n"

    def test_no_temp_files_left(self, tmp_path):
        write_table(tmp_path / "table.csv", ("a",), [(1,)])
        assert [p.name for p in tmp_path.iterdir()] == ["table.csv"]

    def test_failure_keeps_old_file(self, tmp_path):
        path = tmp_path / "table.csv"
        path.write_text("old\n")

        def explode(f):
            f.write("partial")
            raise RuntimeError("disk on fire")

        with pytest.raises(RuntimeError):
            atomic_write(path, explode)
        assert path.read_text() == "old\n"
        assert [p.name for p in tmp_path.iterdir()] == ["table.csv"]

    def test_summary_columns(self, tmp_path):
        rows = [{"axis": "rps", "value": "2", "invocations": 10},
                {"axis": "rps", "value": "4", "invocations": 20}]
        write_summary(rows, tmp_path / "summary.csv", {"axis": "rps"})
        lines = (tmp_path / "summary.csv").read_text().splitlines()
        assert lines == ["# axis=rps", "axis,value,invocations", "rps,2,10", "rps,4,20"]
