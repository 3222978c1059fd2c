"""CSV writers and readers for run outputs, with atomic file creation."""

import csv
import logging
import os
import tempfile
from dataclasses import fields
from pathlib import Path
from typing import Any, Callable, Iterable, Mapping, Optional, Sequence, TextIO

from .constants import ErrorMessages, FileNames
from .errors import RightsizerError
from .metrics import MetricsReport
from .models import InvocationRecord
from .workload import SCHEDULE_COLUMNS, Trace, trace_header

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "{:.6f}"


def format_value(value: Any) -> str:
    """Stable text form of a CSV cell."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return FLOAT_FORMAT.format(value)
    return str(value)


def atomic_write(file_path: Path, write: Callable[[TextIO], None]) -> None:
    """Write ``file_path`` through a temp file in the same directory, then rename."""
    file_path = Path(file_path)
    file_path.parent.mkdir(parents=True, exist_ok=True)
    temp_fd, temp_path = tempfile.mkstemp(
        dir=file_path.parent,
        prefix=FileNames.TEMP_FILE_PREFIX,
        suffix=file_path.suffix,
    )
    try:
        with os.fdopen(temp_fd, 'w', newline='', encoding='utf-8') as f:
            temp_fd = None  # fdopen takes ownership
            write(f)
        os.replace(temp_path, file_path)
        temp_path = None
    finally:
        if temp_fd is not None:
            os.close(temp_fd)
        if temp_path is not None and os.path.exists(temp_path):
            os.unlink(temp_path)
    logger.debug(f"Wrote {file_path}")


def _write_metadata(f: TextIO, metadata: Optional[Mapping[str, str]]) -> None:
    for key, value in (metadata or {}).items():
        f.write(f"# {key}={value}\n")


def write_table(file_path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]],
                metadata: Optional[Mapping[str, str]] = None) -> None:
    """Atomically write a CSV table with optional '#' metadata lines."""
    def write(f: TextIO) -> None:
        _write_metadata(f, metadata)
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_value(v) for v in row])

    atomic_write(file_path, write)


def write_results(records: Sequence[InvocationRecord], file_path: Path,
                  metadata: Optional[Mapping[str, str]] = None) -> None:
    columns = InvocationRecord.column_names()
    write_table(file_path, columns, ([getattr(r, c) for c in columns] for r in records), metadata)


def read_results(file_path: Path) -> tuple[list[InvocationRecord], dict[str, str]]:
    """Parse a results CSV back into records and its metadata lines."""
    file_path = Path(file_path)
    if not file_path.exists():
        raise RightsizerError(ErrorMessages.RESULTS_NOT_FOUND.format(file_path))

    types = {f.name: f.type for f in fields(InvocationRecord)}
    metadata: dict[str, str] = {}
    records: list[InvocationRecord] = []
    with open(file_path, 'r', newline='', encoding='utf-8') as f:
        body = []
        for line in f:
            if line.startswith('#'):
                key, _, value = line[1:].strip().partition('=')
                metadata[key.strip()] = value
            else:
                body.append(line)
        reader = csv.DictReader(body)
        if reader.fieldnames is None:
            return records, metadata
        missing = set(types) - set(reader.fieldnames)
        if missing:
            raise RightsizerError(f"Results file {file_path} lacks columns: {', '.join(sorted(missing))}")
        for row in reader:
            values = {}
            for name, kind in types.items():
                raw = row[name]
                if kind is bool:
                    values[name] = raw == "true"
                else:
                    values[name] = kind(raw)
            records.append(InvocationRecord(**values))
    return records, metadata


def write_metrics(report: MetricsReport, file_path: Path,
                  metadata: Optional[Mapping[str, str]] = None) -> None:
    write_table(file_path, ("metric", "key", "value"), report.long_rows(), metadata)


def write_summary(rows: Sequence[Mapping[str, Any]], file_path: Path,
                  metadata: Optional[Mapping[str, str]] = None) -> None:
    """One row per sweep value; columns taken from the first row."""
    header = list(rows[0].keys()) if rows else []
    write_table(file_path, header, ([row[c] for c in header] for row in rows), metadata)


def write_schedule(arrivals: Iterable[Sequence[Any]], file_path: Path,
                   metadata: Optional[Mapping[str, str]] = None) -> None:
    # repr keeps arrival times exact for replay
    rows = ((repr(float(t)), function, input_id) for t, function, input_id in arrivals)
    write_table(file_path, SCHEDULE_COLUMNS, rows, metadata)


def write_trace(trace: Trace, file_path: Path) -> None:
    write_table(file_path, trace_header(),
                ([row.function_hash, *row.counts.tolist()] for row in trace.rows))
