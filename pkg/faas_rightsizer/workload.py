"""Workloads: per-minute invocation traces, arrival schedules and SLO tables.

Trace files are CSV with a ``function_hash,m1,...,m1440`` header and one row
of per-minute invocation counts per function. A schedule picks a random
window of the trace, spreads each minute's invocations uniformly over the
minute, thins them to the target rate and assigns every start a random
(function, input) pair from the catalog.
"""

import csv
import hashlib
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple, Optional, Union

import numpy as np

from .catalog import Catalog
from .constants import Defaults, ErrorMessages
from .errors import TraceFormatError, WorkloadError
from .simcore import exec_time

logger = logging.getLogger(__name__)

SECONDS_PER_MINUTE = 60.0
TRACE_KEY_COLUMN = "function_hash"
SCHEDULE_COLUMNS = ("t_s", "function", "input_id")


@dataclass
class TraceRow:
    function_hash: str
    counts: np.ndarray


@dataclass
class Trace:
    """Per-minute invocation counts of a day, one row per function."""
    rows: list[TraceRow] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.rows)

    def minute_totals(self) -> np.ndarray:
        """Aggregate invocations per minute over all functions."""
        if not self.rows:
            return np.zeros(Defaults.MINUTES_PER_DAY, dtype=np.int64)
        return np.sum([row.counts for row in self.rows], axis=0)

    @property
    def total_invocations(self) -> int:
        return int(self.minute_totals().sum())


class Arrival(NamedTuple):
    t_s: float
    function: str
    input_id: str


@dataclass
class Schedule:
    """Time-sorted arrivals over one trace window."""
    arrivals: list[Arrival]
    window_minutes: int = Defaults.WINDOW_MINUTES
    target_rps: float = Defaults.TARGET_RPS
    seed: Optional[int] = None
    window_start: Optional[int] = None
    undersupplied: bool = False

    def __len__(self) -> int:
        return len(self.arrivals)

    @property
    def duration_s(self) -> float:
        return self.window_minutes * SECONDS_PER_MINUTE


@dataclass
class SloTable:
    """Latency objective per (function, input_id)."""
    slos: dict[tuple[str, str], float]
    multiplier: float

    def slo(self, function: str, input_id: str) -> float:
        return self.slos[(function, input_id)]


def trace_header() -> list[str]:
    return [TRACE_KEY_COLUMN] + [f"m{i}" for i in range(1, Defaults.MINUTES_PER_DAY + 1)]


def load_trace(path: Union[str, Path]) -> Trace:
    """Parse a trace CSV. Rows of all-zero counts are kept.

    Raises:
        TraceFormatError: wrong column count, non-integer or negative count.
    """
    path = Path(path)
    if not path.exists():
        raise TraceFormatError(ErrorMessages.TRACE_NOT_FOUND.format(path))

    expected_columns = Defaults.MINUTES_PER_DAY + 1
    trace = Trace()
    with open(path, 'r', newline='', encoding='utf-8') as f:
        reader = csv.reader(f)
        for row in reader:
            line = reader.line_num
            if not row:
                continue
            if line == 1 and row[0] == TRACE_KEY_COLUMN:
                if len(row) != expected_columns:
                    raise TraceFormatError(f"header has {len(row)} columns, expected {expected_columns}", line)
                continue
            if len(row) != expected_columns:
                raise TraceFormatError(f"row has {len(row)} columns, expected {expected_columns}", line)
            try:
                counts = np.array([int(value) for value in row[1:]], dtype=np.int64)
            except ValueError as e:
                raise TraceFormatError(f"non-integer count ({e})", line) from e
            if (counts < 0).any():
                raise TraceFormatError("negative invocation count", line)
            trace.rows.append(TraceRow(row[0], counts))

    logger.debug(f"Loaded trace with {len(trace)} functions from {path}")
    return trace


def synthesize_trace(num_functions: int = 50, mean_per_minute: float = 300.0, seed: int = Defaults.SEED,
                     diurnal_amplitude: float = 0.5) -> Trace:
    """Poisson per-minute counts with a daily sine modulation.

    Per-function rates are log-normally skewed so a few functions dominate,
    as in production traces. ``mean_per_minute`` is the aggregate mean.
    """
    if num_functions < 1:
        raise WorkloadError(f"num_functions must be at least 1, got {num_functions}")
    if mean_per_minute < 0:
        raise WorkloadError(f"mean_per_minute must be non-negative, got {mean_per_minute}")
    if not 0 <= diurnal_amplitude <= 1:
        raise WorkloadError(f"diurnal_amplitude must lie in [0, 1], got {diurnal_amplitude}")

    rng = np.random.default_rng(seed)
    shares = rng.lognormal(mean=0.0, sigma=1.0, size=num_functions)
    shares /= shares.sum()
    minutes = np.arange(Defaults.MINUTES_PER_DAY)
    phase = rng.uniform(0, Defaults.MINUTES_PER_DAY)
    shape = 1.0 + diurnal_amplitude * np.sin(2 * np.pi * (minutes - phase) / Defaults.MINUTES_PER_DAY)

    trace = Trace()
    for i, share in enumerate(shares):
        counts = rng.poisson(mean_per_minute * share * shape).astype(np.int64)
        digest = hashlib.sha256(f"{seed}:{i}".encode('utf-8')).hexdigest()
        trace.rows.append(TraceRow(digest, counts))
    return trace


def subsample(num_candidates: int, keep: int, rng: np.random.Generator) -> np.ndarray:
    """Sorted indices of ``keep`` candidates drawn uniformly without replacement."""
    if keep >= num_candidates:
        return np.arange(num_candidates)
    return np.sort(rng.choice(num_candidates, size=keep, replace=False))


def generate_schedule(trace: Trace, target_rps: float, seed: int, catalog: Catalog,
                      window_minutes: int = Defaults.WINDOW_MINUTES,
                      max_retries: int = Defaults.WINDOW_RETRIES) -> Schedule:
    """Seeded arrival schedule at ``target_rps`` from a random trace window.

    Raises:
        WorkloadError: the catalog is empty or no window with invocations was found.
    """
    if target_rps <= 0:
        raise WorkloadError(f"target_rps must be positive, got {target_rps}")
    pairs = catalog.pairs()
    if not pairs:
        raise WorkloadError("Catalog has no (function, input) pairs")
    if not 1 <= window_minutes <= Defaults.MINUTES_PER_DAY:
        raise WorkloadError(f"window_minutes must lie in 1..{Defaults.MINUTES_PER_DAY}")

    rng = np.random.default_rng(seed)
    totals = trace.minute_totals()
    for attempt in range(max_retries):
        start = int(rng.integers(0, Defaults.MINUTES_PER_DAY - window_minutes + 1))
        window = totals[start:start + window_minutes]
        if window.sum() > 0:
            break
        logger.debug(f"Window at minute {start} is empty (attempt {attempt + 1})")
    else:
        raise WorkloadError(f"No trace window with invocations after {max_retries} attempts")

    per_minute = int(round(target_rps * SECONDS_PER_MINUTE))
    undersupplied = False
    starts: list[np.ndarray] = []
    for minute, count in enumerate(window):
        count = int(count)
        times = minute * SECONDS_PER_MINUTE + rng.uniform(0.0, SECONDS_PER_MINUTE, size=count)
        if count < per_minute:
            undersupplied = True
        starts.append(times[subsample(count, per_minute, rng)])

    times = np.sort(np.concatenate(starts)) if starts else np.array([])
    choices = rng.integers(0, len(pairs), size=len(times))
    arrivals = [Arrival(float(t), *pairs[i]) for t, i in zip(times, choices)]

    if undersupplied:
        logger.warning(f"Trace window at minute {start} supplies fewer than {per_minute} invocations "
                       f"in some minutes; kept all of them ({len(arrivals)} arrivals)")
    return Schedule(arrivals=arrivals, window_minutes=window_minutes, target_rps=target_rps,
                    seed=seed, window_start=start, undersupplied=undersupplied)


def load_schedule(path: Union[str, Path], catalog: Optional[Catalog] = None) -> Schedule:
    """Read a ``t_s,function,input_id`` schedule CSV ('#' lines are metadata).

    Raises:
        WorkloadError: malformed rows or unsorted times.
        UnknownFunctionError, CatalogError: a pair is missing from ``catalog``.
    """
    path = Path(path)
    if not path.exists():
        raise WorkloadError(f"Schedule file does not exist: {path}")

    arrivals: list[Arrival] = []
    with open(path, 'r', newline='', encoding='utf-8') as f:
        lines = (line for line in f if not line.startswith('#'))
        reader = csv.DictReader(lines)
        if reader.fieldnames is None:
            return Schedule(arrivals=[])
        if tuple(reader.fieldnames) != SCHEDULE_COLUMNS:
            raise WorkloadError(f"Schedule header must be {','.join(SCHEDULE_COLUMNS)}, got {reader.fieldnames}")
        for n, row in enumerate(reader, start=1):
            try:
                t_s = float(row["t_s"])
            except (TypeError, ValueError) as e:
                raise WorkloadError(f"Schedule row {n}: bad time {row['t_s']!r}") from e
            if t_s < 0 or (arrivals and t_s < arrivals[-1].t_s):
                raise WorkloadError(f"Schedule row {n}: time {t_s} is negative or out of order")
            arrival = Arrival(t_s, row["function"], row["input_id"])
            if catalog is not None:
                catalog.input(arrival.function, arrival.input_id)
            arrivals.append(arrival)

    window_minutes = max(1, int(np.ceil(arrivals[-1].t_s / SECONDS_PER_MINUTE))) if arrivals else 1
    return Schedule(arrivals=arrivals, window_minutes=window_minutes, target_rps=0.0)


def build_slo_table(catalog: Catalog, multiplier: float = Defaults.SLO_MULTIPLIER,
                    c_max: int = Defaults.C_MAX) -> SloTable:
    """``multiplier`` times the median isolated execution time over 1..c_max vCPUs."""
    if multiplier <= 0:
        raise WorkloadError(f"multiplier must be positive, got {multiplier}")
    slos = {}
    for function, input_id in catalog.pairs():
        profile = catalog.profile(function)
        desc = catalog.input(function, input_id)
        values = [exec_time(profile, desc, k, 1.0) for k in range(1, c_max + 1)]
        slos[(function, input_id)] = multiplier * float(np.median(values))
    return SloTable(slos=slos, multiplier=multiplier)
