"""Tests for run metrics."""

import pytest

from faas_rightsizer.errors import SimulationError
from faas_rightsizer.metrics import MetricsReport, nearest_rank, summarize, unique_container_sizes
from faas_rightsizer.models import InvocationRecord, PlacementKind


def record(i=0, function="f", vcpus=4, memory_mb=1024, used=2.0, peak=512.0, placement="warm_exact",
           slo_met=True, **kwargs):
    return InvocationRecord(invocation_id=i, function=function, input_id="in", arrival_s=float(i),
                            vcpus=vcpus, memory_mb=memory_mb, max_vcpus_used=used, peak_mem_mb=peak,
                            placement=placement, slo_met=slo_met, **kwargs)


class TestNearestRank:
    """Test nearest-rank percentiles."""

    def test_one_to_ten(self):
        assert nearest_rank(list(range(1, 11))) == {"p50": 5.0, "p75": 8.0, "p90": 9.0, "p95": 10.0}

    def test_values_come_from_the_sample(self):
        values = [0.5, 7.25, 3.0]
        assert set(nearest_rank(values).values()) <= set(values)

    def test_empty(self):
        assert nearest_rank([]) == {"p50": 0.0, "p75": 0.0, "p90": 0.0, "p95": 0.0}


class TestSummarize:
    """Test the metrics of a results table."""

    def test_waste(self):
        records = [record(i, vcpus=4, used=1.8) for i in range(5)]
        report = summarize(records)
        assert report.wasted_vcpus["p50"] == pytest.approx(2.2)
        assert report.wasted_memory_mb["p95"] == pytest.approx(512.0)
        assert report.vcpu_utilization_pct == pytest.approx(45.0)

    def test_no_waste(self):
        records = [record(i, vcpus=2, used=2.0, memory_mb=512, peak=512.0) for i in range(3)]
        report = summarize(records)
        assert set(report.wasted_vcpus.values()) == {0.0}
        assert report.mem_utilization_pct == pytest.approx(100.0)

    def test_violations_and_cold_starts(self):
        records = [
            record(0, placement="cold", slo_met=False),
            record(1, placement="cold"),
            record(2, slo_met=False),
            record(3),
        ]
        report = summarize(records)
        assert report.invocations == 4
        assert report.slo_violation_pct == 50.0
        assert report.cold_start_pct == 50.0
        assert report.pct_violations_with_cold_start == 50.0

    def test_rejected_left_out_of_waste(self):
        """Rejected invocations count as violations but not as waste."""
        records = [
            record(0, vcpus=4, used=4.0),
            record(1, vcpus=32, memory_mb=4096, used=0.0, peak=0.0,
                   placement=PlacementKind.REJECTED.value, slo_met=False),
        ]
        report = summarize(records)
        assert report.rejected_pct == 50.0
        assert report.slo_violation_pct == 50.0
        assert report.wasted_vcpus["p95"] == 0.0
        assert report.unique_container_sizes == {"f": 1}

    def test_failure_rates(self):
        records = [record(0, oom_killed=True, slo_met=False), record(1, timed_out=True, slo_met=False),
                   record(2), record(3)]
        report = summarize(records)
        assert report.oom_killed_pct == 25.0
        assert report.timeout_pct == 25.0

    def test_empty(self):
        with pytest.raises(SimulationError):
            summarize([])


class TestReportViews:
    """Test the flat and long views of a report."""

    def test_unique_sizes(self):
        records = [record(0, vcpus=4), record(1, vcpus=8), record(2, vcpus=4),
                   record(3, function="g", vcpus=1)]
        assert unique_container_sizes(records) == {"f": 2, "g": 1}

    def test_scalar_fields(self):
        report = summarize([record(0, vcpus=4), record(1, vcpus=8)])
        fields = report.scalar_fields()
        assert fields["invocations"] == 2
        assert "wasted_vcpus_p90" in fields
        assert fields["mean_unique_container_sizes"] == 2.0

    def test_long_rows(self):
        rows = summarize([record(0)]).long_rows()
        assert rows[0] == ("invocations", "", 1.0)
        assert ("unique_container_sizes", "f", 1.0) in rows
        assert ("wasted_vcpus", "p50", 2.0) in rows

    def test_empty_report(self):
        report = MetricsReport()
        assert report.scalar_fields()["mean_unique_container_sizes"] == 0.0
        assert report.wasted_vcpus["p50"] == 0.0
