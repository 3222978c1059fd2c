"""Terminal rendering of run metrics and oracle tables."""

from typing import Optional, Sequence

from .constants import Colors, DisplayFormat
from .metrics import MetricsReport


def _rate_color(pct: float, warn: float, bad: float) -> str:
    if pct >= bad:
        return Colors.RED
    if pct >= warn:
        return Colors.YELLOW
    return Colors.GREEN


def format_percentiles(values: dict[str, float], unit: str = "") -> str:
    return "  ".join(f"{k}={v:.1f}{unit}" for k, v in values.items())


def display_metrics(report: MetricsReport, title: str = "Run metrics", output_dir: Optional[str] = None) -> None:
    """Print a MetricsReport."""
    BOLD = Colors.BOLD
    RESET = Colors.RESET
    GRAY = Colors.GRAY
    BLUE = Colors.BLUE

    print(f"{BOLD}{title}{RESET}")
    print(DisplayFormat.SEPARATOR_LONG)
    if output_dir:
        print(f"  {GRAY}{output_dir}{RESET}")
    print(f"  Invocations: {BLUE}{report.invocations:,}{RESET}")

    violation_color = _rate_color(report.slo_violation_pct, 5.0, 20.0)
    print(f"  SLO violations: {violation_color}{report.slo_violation_pct:.1f}%{RESET}")
    print(f"  Cold starts: {report.cold_start_pct:.1f}% "
          f"({report.pct_violations_with_cold_start:.1f}% of violations)")
    print(f"  OOM kills: {_rate_color(report.oom_killed_pct, 1.0, 5.0)}{report.oom_killed_pct:.2f}%{RESET}"
          f"  Timeouts: {report.timeout_pct:.2f}%  Rejected: {report.rejected_pct:.2f}%")
    print()

    print(f"{BOLD}Resources{RESET}")
    print(DisplayFormat.SEPARATOR_SHORT)
    print(f"  Wasted vCPUs:  {format_percentiles(report.wasted_vcpus)}")
    print(f"  Wasted memory: {format_percentiles(report.wasted_memory_mb, ' MB')}")
    print(f"  Utilization: vCPU {report.vcpu_utilization_pct:.1f}%  memory {report.mem_utilization_pct:.1f}%")
    if report.unique_container_sizes:
        sizes = ", ".join(f"{fn}={n}" for fn, n in report.unique_container_sizes.items())
        print(f"  Container sizes per function: {GRAY}{sizes}{RESET}")


def display_oracle(rows: Sequence[dict]) -> None:
    """Print the brute-force oracle table."""
    BOLD = Colors.BOLD
    RESET = Colors.RESET

    print(f"{BOLD}{'function':<16} {'input':<16} {'slo_s':>10} {'vcpus':>6} {'mem_class':>9}{RESET}")
    for row in rows:
        vcpus = row['min_vcpus'] if row['feasible'] else f"{Colors.RED}--{RESET}"
        print(f"{row['function']:<16} {row['input_id']:<16} {row['slo_s']:>10.3f} "
              f"{vcpus:>6} {row['min_mem_class']:>9}")
