"""Command handlers. Each returns a process exit code."""

import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, Optional, Sequence

from .catalog import Catalog, load_catalog
from .config import update_config_value
from .config_models import RunConfig
from .constants import Defaults, ErrorMessages, ExitCodes, FileNames, SweepAxes
from .display import display_metrics, display_oracle
from .errors import (
    CatalogError, ConfigError, FeatureSchemaError, RightsizerError, TraceFormatError,
    UnknownFunctionError, WorkloadError,
)
from .export import read_results, write_metrics, write_results, write_schedule, write_summary, write_trace
from .metrics import MetricsReport, summarize
from .simcore import Simulator, SimulationResult, oracle_min_mem_class, oracle_min_vcpus
from .workload import Schedule, build_slo_table, generate_schedule, load_schedule, load_trace, synthesize_trace

logger = logging.getLogger(__name__)

BAD_INPUT_ERRORS = (ConfigError, CatalogError, TraceFormatError, WorkloadError,
                    UnknownFunctionError, FeatureSchemaError)

# Synthetic traces supply this many times the requested rate
SYNTHETIC_SUPPLY_FACTOR = 3.0


def exit_code_for(error: Exception) -> int:
    """Bad input gives 2, anything else that went wrong in a run gives 1."""
    if isinstance(error, BAD_INPUT_ERRORS):
        return ExitCodes.BAD_INPUT
    return ExitCodes.SIMULATION_ERROR


def build_schedule(config: RunConfig, catalog: Catalog) -> Schedule:
    """Replay ``schedule_path`` if set, else draw from the trace (synthetic when unset)."""
    if config.schedule_path is not None:
        return load_schedule(config.schedule_path, catalog)
    if config.trace_path is not None:
        trace = load_trace(config.trace_path)
    else:
        mean = max(Defaults.TARGET_RPS, config.target_rps) * 60 * SYNTHETIC_SUPPLY_FACTOR
        trace = synthesize_trace(mean_per_minute=mean, seed=config.seed)
    return generate_schedule(trace, config.target_rps, config.seed, catalog, config.window_minutes)


def execute_run(config: RunConfig, output_dir: Optional[Path] = None) -> tuple[SimulationResult, MetricsReport]:
    """Simulate one config and write results.csv and metrics.csv.

    Metrics are computed from results.csv as written, so re-summarizing the
    file reproduces metrics.csv exactly.
    """
    output_dir = Path(output_dir or config.output_dir)
    catalog = load_catalog(config.catalog_path)
    schedule = build_schedule(config, catalog)
    slo_table = build_slo_table(catalog, config.slo_multiplier, config.c_max)

    result = Simulator(config, catalog, slo_table.slos).run(schedule.arrivals)
    results_path = output_dir / FileNames.RESULTS
    write_results(result.records, results_path, result.metadata)

    records, metadata = read_results(results_path)
    report = summarize(records) if records else MetricsReport()
    write_metrics(report, output_dir / FileNames.METRICS, metadata)
    return result, report


def handle_run_command(config: RunConfig, quiet: bool = False) -> int:
    try:
        _, report = execute_run(config)
    except RightsizerError as e:
        print(f"Error: {e}")
        return exit_code_for(e)
    if not quiet:
        display_metrics(report, output_dir=str(config.output_dir))
    return ExitCodes.OK


def sweep_configs(config: RunConfig, axis: str, values: Sequence[Any]) -> list[RunConfig]:
    """One validated config per sweep value, each writing to its own directory."""
    if axis not in SweepAxes.ALL:
        raise ConfigError(ErrorMessages.UNKNOWN_AXIS.format(axis, ", ".join(SweepAxes.ALL)))
    if not values:
        raise ConfigError("Sweep needs at least one value")
    key = SweepAxes.FIELD.get(axis, axis)
    configs = []
    for value in values:
        run_config = update_config_value(config, key, value)
        run_config = update_config_value(run_config, 'output_dir', str(Path(config.output_dir) / f"{axis}_{value}"))
        configs.append(run_config)
    return configs


def _sweep_point(config: RunConfig) -> dict[str, float]:
    _, report = execute_run(config)
    return report.scalar_fields()


def sweep_parallelism() -> int:
    """Worker processes for sweeps, capped by FAAS_RIGHTSIZER_THREADS."""
    raw = os.environ.get(Defaults.THREADS_ENV)
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            logger.warning(f"Ignoring non-integer {Defaults.THREADS_ENV}={raw!r}")
    return os.cpu_count() or 1


def run_sweep(config: RunConfig, axis: str, values: Sequence[Any]) -> list[dict[str, Any]]:
    """Run every sweep point and write the merged summary.csv."""
    configs = sweep_configs(config, axis, values)
    workers = min(sweep_parallelism(), len(configs))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            points = list(pool.map(_sweep_point, configs))
    else:
        points = [_sweep_point(c) for c in configs]

    rows = [{"axis": axis, "value": str(value), **point} for value, point in zip(values, points)]
    write_summary(rows, Path(config.output_dir) / FileNames.SUMMARY, {"axis": axis, "seed": str(config.seed)})
    return rows


def handle_sweep_command(config: RunConfig, axis: str, values: Sequence[str]) -> int:
    try:
        rows = run_sweep(config, axis, values)
    except RightsizerError as e:
        print(f"Error: {e}")
        return exit_code_for(e)
    print(f"Sweep over {axis}: {len(rows)} runs, summary in {Path(config.output_dir) / FileNames.SUMMARY}")
    return ExitCodes.OK


def oracle_table(config: RunConfig) -> list[dict[str, Any]]:
    """Brute-force minimum vCPUs and memory class for every catalog pair."""
    catalog = load_catalog(config.catalog_path)
    slo_table = build_slo_table(catalog, config.slo_multiplier, config.c_max)
    rows = []
    for function, input_id in catalog.pairs():
        profile = catalog.profile(function)
        desc = catalog.input(function, input_id)
        slo_s = slo_table.slo(function, input_id)
        min_vcpus = oracle_min_vcpus(profile, desc, slo_s, config.c_max)
        rows.append({
            "function": function,
            "input_id": input_id,
            "slo_s": slo_s,
            "min_vcpus": min_vcpus if min_vcpus is not None else "",
            "min_mem_class": oracle_min_mem_class(profile, desc),
            "feasible": min_vcpus is not None,
        })
    return rows


def handle_oracle_command(config: RunConfig, quiet: bool = False) -> int:
    try:
        rows = oracle_table(config)
    except RightsizerError as e:
        print(f"Error: {e}")
        return exit_code_for(e)
    write_summary(rows, Path(config.output_dir) / FileNames.ORACLE)
    if not quiet:
        display_oracle(rows)
    return ExitCodes.OK


def handle_summarize_command(results_path: Path, output_dir: Optional[Path] = None, quiet: bool = False) -> int:
    """Regenerate metrics.csv from a results.csv."""
    results_path = Path(results_path)
    if not results_path.exists():
        print(f"Error: {ErrorMessages.RESULTS_NOT_FOUND.format(results_path)}")
        return ExitCodes.BAD_INPUT
    try:
        records, metadata = read_results(results_path)
        report = summarize(records) if records else MetricsReport()
    except RightsizerError as e:
        print(f"Error: {e}")
        return ExitCodes.BAD_INPUT
    except ValueError as e:
        print(f"Error: malformed results file: {e}")
        return ExitCodes.BAD_INPUT
    output_dir = Path(output_dir) if output_dir else results_path.parent
    write_metrics(report, output_dir / FileNames.METRICS, metadata)
    if not quiet:
        display_metrics(report, title="Summary", output_dir=str(output_dir))
    return ExitCodes.OK


def handle_synth_trace_command(output_file: Path, num_functions: int, mean_per_minute: float, seed: int) -> int:
    try:
        trace = synthesize_trace(num_functions, mean_per_minute, seed)
    except RightsizerError as e:
        print(f"Error: {e}")
        return exit_code_for(e)
    write_trace(trace, Path(output_file))
    print(f"Wrote {len(trace)} functions, {trace.total_invocations:,} invocations to {output_file}")
    return ExitCodes.OK


def handle_schedule_command(config: RunConfig, output_file: Optional[Path] = None) -> int:
    """Write the schedule a run with this config would replay."""
    try:
        catalog = load_catalog(config.catalog_path)
        schedule = build_schedule(config, catalog)
    except RightsizerError as e:
        print(f"Error: {e}")
        return exit_code_for(e)
    output_file = Path(output_file) if output_file else Path(config.output_dir) / FileNames.SCHEDULE
    metadata = {
        "seed": str(config.seed),
        "target_rps": repr(config.target_rps),
        "window_start": str(schedule.window_start),
        "undersupplied": str(schedule.undersupplied).lower(),
    }
    write_schedule(schedule.arrivals, output_file, metadata)
    rate = len(schedule) / schedule.duration_s if schedule.duration_s else math.nan
    print(f"Wrote {len(schedule):,} arrivals ({rate:.2f} rps) to {output_file}")
    return ExitCodes.OK
