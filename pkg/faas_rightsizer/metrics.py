"""Run metrics: SLO violations, cold starts, wasted resources, container sizes."""

import logging
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import SimulationError
from .models import InvocationRecord, PlacementKind

logger = logging.getLogger(__name__)

PERCENTILES = (50, 75, 90, 95)


def nearest_rank(values: Sequence[float], percentiles: Iterable[int] = PERCENTILES) -> dict[str, float]:
    """Nearest-rank percentiles keyed 'p50', 'p75', ...; zeros for no values."""
    percentiles = tuple(percentiles)
    if len(values) == 0:
        return {f"p{p}": 0.0 for p in percentiles}
    result = np.percentile(np.asarray(values, dtype=float), percentiles, method='inverted_cdf')
    return {f"p{p}": float(v) for p, v in zip(percentiles, result)}


def _pct(part: int, whole: int) -> float:
    return 100.0 * part / whole if whole else 0.0


@dataclass
class MetricsReport:
    """Summary of one run's results table."""
    invocations: int = 0
    slo_violation_pct: float = 0.0
    cold_start_pct: float = 0.0
    pct_violations_with_cold_start: float = 0.0
    wasted_vcpus: dict[str, float] = field(default_factory=lambda: nearest_rank([]))
    wasted_memory_mb: dict[str, float] = field(default_factory=lambda: nearest_rank([]))
    vcpu_utilization_pct: float = 0.0
    mem_utilization_pct: float = 0.0
    oom_killed_pct: float = 0.0
    timeout_pct: float = 0.0
    rejected_pct: float = 0.0
    unique_container_sizes: dict[str, int] = field(default_factory=dict)

    def scalar_fields(self) -> dict[str, float]:
        """Flat scalar view, one column per metric, for sweep summaries."""
        row: dict[str, float] = {
            "invocations": self.invocations,
            "slo_violation_pct": self.slo_violation_pct,
            "cold_start_pct": self.cold_start_pct,
            "pct_violations_with_cold_start": self.pct_violations_with_cold_start,
        }
        row.update({f"wasted_vcpus_{k}": v for k, v in self.wasted_vcpus.items()})
        row.update({f"wasted_memory_mb_{k}": v for k, v in self.wasted_memory_mb.items()})
        row.update({
            "vcpu_utilization_pct": self.vcpu_utilization_pct,
            "mem_utilization_pct": self.mem_utilization_pct,
            "oom_killed_pct": self.oom_killed_pct,
            "timeout_pct": self.timeout_pct,
            "rejected_pct": self.rejected_pct,
            "mean_unique_container_sizes": (
                float(np.mean(list(self.unique_container_sizes.values())))
                if self.unique_container_sizes else 0.0
            ),
        })
        return row

    def long_rows(self) -> list[tuple[str, str, float]]:
        """(metric, key, value) rows; key is a percentile or a function name."""
        rows: list[tuple[str, str, float]] = [("invocations", "", float(self.invocations))]
        for name in ("slo_violation_pct", "cold_start_pct", "pct_violations_with_cold_start"):
            rows.append((name, "", getattr(self, name)))
        rows.extend(("wasted_vcpus", k, v) for k, v in self.wasted_vcpus.items())
        rows.extend(("wasted_memory_mb", k, v) for k, v in self.wasted_memory_mb.items())
        for name in ("vcpu_utilization_pct", "mem_utilization_pct", "oom_killed_pct",
                     "timeout_pct", "rejected_pct"):
            rows.append((name, "", getattr(self, name)))
        rows.extend(("unique_container_sizes", fn, float(n))
                    for fn, n in sorted(self.unique_container_sizes.items()))
        return rows


def unique_container_sizes(records: Iterable[InvocationRecord]) -> dict[str, int]:
    """Distinct (vcpus, memory_mb) container sizes used per function."""
    sizes: dict[str, set[tuple[int, int]]] = {}
    for r in records:
        if r.placement == PlacementKind.REJECTED.value:
            continue
        sizes.setdefault(r.function, set()).add((r.vcpus, r.memory_mb))
    return {fn: len(s) for fn, s in sorted(sizes.items())}


def summarize(records: Sequence[InvocationRecord]) -> MetricsReport:
    """Metrics of a results table.

    Rejected invocations count as violations but carry no resources, so they
    are left out of waste and utilization.

    Raises:
        SimulationError: ``records`` is empty.
    """
    if not records:
        raise SimulationError("Cannot summarize an empty results table")

    n = len(records)
    placed = [r for r in records if r.placement != PlacementKind.REJECTED.value]
    violations = [r for r in records if not r.slo_met]
    cold = [r for r in records if r.placement == PlacementKind.COLD.value]
    cold_violations = [r for r in violations if r.placement == PlacementKind.COLD.value]

    alloc_vcpus = sum(r.vcpus for r in placed)
    alloc_mem = sum(r.memory_mb for r in placed)
    used_vcpus = sum(r.max_vcpus_used for r in placed)
    used_mem = sum(r.peak_mem_mb for r in placed)

    return MetricsReport(
        invocations=n,
        slo_violation_pct=_pct(len(violations), n),
        cold_start_pct=_pct(len(cold), n),
        pct_violations_with_cold_start=_pct(len(cold_violations), len(violations)),
        wasted_vcpus=nearest_rank([r.vcpus - r.max_vcpus_used for r in placed]),
        wasted_memory_mb=nearest_rank([r.memory_mb - r.peak_mem_mb for r in placed]),
        vcpu_utilization_pct=_pct(used_vcpus, alloc_vcpus),
        mem_utilization_pct=_pct(used_mem, alloc_mem),
        oom_killed_pct=_pct(sum(r.oom_killed for r in records), n),
        timeout_pct=_pct(sum(r.timed_out for r in records), n),
        rejected_pct=_pct(n - len(placed), n),
        unique_container_sizes=unique_container_sizes(records),
    )
