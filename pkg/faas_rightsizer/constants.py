"""Constants module for faas_rightsizer - centralizes magic strings and numbers."""

import os
import sys


def _supports_ansi_colors() -> bool:
    """Check if the terminal supports ANSI color codes."""
    if not sys.stdout.isatty():
        return False
    if os.environ.get("NO_COLOR"):
        return False
    if os.name == 'nt':
        # Windows Terminal and modern consoles advertise themselves
        return bool(os.environ.get('WT_SESSION') or os.environ.get('COLORTERM'))
    return True


_ANSI_SUPPORTED = _supports_ansi_colors()


class Colors:
    """ANSI color codes for terminal output."""
    RESET = '\033[0m' if _ANSI_SUPPORTED else ''
    BOLD = '\033[1m' if _ANSI_SUPPORTED else ''
    RED = '\033[31m' if _ANSI_SUPPORTED else ''
    GREEN = '\033[32m' if _ANSI_SUPPORTED else ''
    YELLOW = '\033[33m' if _ANSI_SUPPORTED else ''
    BLUE = '\033[34m' if _ANSI_SUPPORTED else ''
    GRAY = '\033[90m' if _ANSI_SUPPORTED else ''


class Defaults:
    """Default configuration values."""
    # Cluster
    NUM_WORKERS = 16
    USER_CPU = 90
    WORKER_MEMORY_MB = 128000
    WORKER_CORES = 96
    KEEPALIVE_S = 600.0
    SWEEP_INTERVAL_S = 10.0

    # Allocator
    DEFAULT_VCPUS = 16
    DEFAULT_MEM_MB = 4096
    VCPU_CONF_THRESHOLD = 10
    MEM_CONF_THRESHOLD = 20
    C_MAX = 32
    MEM_MAX_MB = 4096
    LEARNING_RATE = 0.1

    # Simulation
    TIMEOUT_S = 300.0
    SAMPLING_INTERVAL_MS = 10.0
    SEED = 0

    # Workload
    SLO_MULTIPLIER = 1.4
    TARGET_RPS = 4.0
    WINDOW_MINUTES = 10
    MINUTES_PER_DAY = 1440
    WINDOW_RETRIES = 20

    OUTPUT_DIR = "results"
    DEMO_CATALOG = "demo_catalog.json"
    THREADS_ENV = "FAAS_RIGHTSIZER_THREADS"


class CostFunction:
    """Cost-function constants for the vCPU and memory learners."""
    MEM_CLASS_MB = 128
    DEFICIT_STEP_S = 0.5   # X: seconds past the SLO per extra vCPU
    SLACK_STEP_S = 1.5     # Y: seconds under the SLO per vCPU removed
    HIGH_UTILIZATION = 0.9
    SINGLE_VCPU_ESCALATION = 2  # highest target after a violation on one vCPU
    VCPU_ALPHA_OVER = 1.0
    VCPU_ALPHA_UNDER = 2.0
    MEM_ALPHA_OVER = 1.0
    MEM_ALPHA_UNDER = 4.0


class StaticPresets:
    """Static allocation baselines as (vcpus, memory_mb)."""
    MEDIUM = (12, 3072)
    LARGE = (20, 5120)


class ExitCodes:
    """Process exit codes."""
    OK = 0
    SIMULATION_ERROR = 1
    BAD_INPUT = 2


class FileNames:
    """Output file names written by the CLI."""
    RESULTS = "results.csv"
    METRICS = "metrics.csv"
    SUMMARY = "summary.csv"
    ORACLE = "oracle.csv"
    SCHEDULE = "schedule.csv"
    TRACE = "trace.csv"
    TEMP_FILE_PREFIX = '.tmp_'


class SweepAxes:
    """Config keys accepted by the sweep command."""
    RPS = "rps"
    ALL = (
        RPS, "user_cpu", "vcpu_conf_threshold", "mem_conf_threshold",
        "slo_multiplier", "cost_mode", "scheduler_policy",
    )
    # axis name -> RunConfig field
    FIELD = {RPS: "target_rps"}


class ErrorMessages:
    """Common error message templates."""
    CONFIG_INVALID = "Invalid configuration: {}"
    CONFIG_NOT_FOUND = "Configuration file does not exist: {}"
    CATALOG_NOT_FOUND = "Catalog file does not exist: {}"
    TRACE_NOT_FOUND = "Trace file does not exist: {}"
    RESULTS_NOT_FOUND = "Results file does not exist: {}"
    UNKNOWN_AXIS = "Unknown sweep axis '{}' (choose from: {})"


class DisplayFormat:
    """Constants for display formatting."""
    SEPARATOR_LONG = "=" * 50
    SEPARATOR_SHORT = "-" * 50
