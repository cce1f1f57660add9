"""NDJSON batch mode: one polynomial per line, one Report per line, input order kept."""

import json
import logging
from pathlib import Path
from typing import Callable, Iterator, List, Optional, Tuple

from joblib import Parallel, delayed

from .errors import CopositivityError
from .pipeline import CheckOptions, run_check
from .report import Report, error_report

logger = logging.getLogger(__name__)

ProgressCallback = Callable[[int, int], None]


def read_lines(path: Path) -> List[Tuple[int, str]]:
    """Non-blank lines of an NDJSON file with their 1-based line numbers."""
    with open(path) as f:
        return [(number, line.strip()) for number, line in enumerate(f, start=1) if line.strip()]


def _source(line: str) -> str:
    """The polynomial argument in a batch line.

    A JSON string holds the text grammar, a JSON object the JSON form; a line
    that is not JSON at all is taken as text.
    """
    try:
        value = json.loads(line)
    except json.JSONDecodeError:
        return line
    if isinstance(value, dict) and "polynomial" in value:
        value = value["polynomial"]
    return value if isinstance(value, str) else json.dumps(value)


def check_line(number: int, line: str, options: CheckOptions) -> Report:
    """Run one batch line; errors become the report's ``error`` field."""
    try:
        report = run_check(_source(line), options)
    except CopositivityError as e:
        return error_report(line, e, number)
    except Exception as e:  # noqa: BLE001 - a bad line must not stop the batch
        logger.exception("line %d: unexpected failure", number)
        return error_report(line, e, number)
    report.line = number
    return report


def _chunks(items: List, size: int) -> Iterator[List]:
    for start in range(0, len(items), size):
        yield items[start : start + size]


def run_batch(
    lines: List[Tuple[int, str]],
    options: CheckOptions,
    jobs: int = 1,
    progress_callback: Optional[ProgressCallback] = None,
) -> List[Report]:
    """Check every line, ``jobs`` at a time, returning reports in input order.

    Args:
        lines: (line number, text) pairs as returned by read_lines
        options: Pipeline options shared by all lines
        jobs: Worker processes; 1 runs in-process
        progress_callback: Called with (done, total) after every chunk

    Returns:
        One Report per line
    """
    # Trace files would collide between lines.
    options.trace_path = None
    reports: List[Report] = []
    chunk_size = max(1, jobs) * 4
    with Parallel(n_jobs=jobs) as parallel:
        for chunk in _chunks(lines, chunk_size):
            reports.extend(
                parallel(delayed(check_line)(number, line, options) for number, line in chunk)
            )
            if progress_callback:
                progress_callback(len(reports), len(lines))
    logger.info("batch finished: %d lines", len(reports))
    return reports


def write_ndjson(reports: List[Report], stream, with_timing: bool = True) -> None:
    for report in reports:
        stream.write(json.dumps(report.to_dict(with_timing=with_timing), sort_keys=True) + "\n")
