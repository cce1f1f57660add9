"""Tests for NDJSON batch processing."""

import io
import json

import pytest

from copositivity.batch import read_lines, run_batch, write_ndjson
from copositivity.pipeline import CheckOptions
from copositivity.report import EXIT_INPUT_ERROR

LINES = [
    '"1 + x1^2 + x2^2 + x1^2*x2^2 - x1*x2"',
    "",
    '{"polynomial": "x1 - 1"}',
    '"x1 + "',
    '{"terms": [{"e": [0], "c": 1}, {"e": [2], "c": 1}]}',
    "1 + x1^2 + x2^2 + x1^2*x2^2 - 5*x1*x2",
]


@pytest.fixture
def batch_file(tmp_path):
    path = tmp_path / "input.ndjson"
    path.write_text("\n".join(LINES) + "\n")
    return path


def test_read_lines_skips_blanks(batch_file):
    lines = read_lines(batch_file)
    assert [number for number, _ in lines] == [1, 3, 4, 5, 6]


def test_order_and_error_isolation(batch_file):
    """The malformed line carries its error; every other line is decided."""
    reports = run_batch(read_lines(batch_file), CheckOptions())
    assert [r.line for r in reports] == [1, 3, 4, 5, 6]
    verdicts = [r.verdict.kind.value if r.verdict else None for r in reports]
    assert verdicts == [
        "Copositive",
        "TriviallyNegative",
        None,
        "TriviallyCopositive",
        "NotCopositive",
    ]
    assert reports[2].error_code == EXIT_INPUT_ERROR
    assert "expected" in reports[2].error


def test_progress_callback(batch_file):
    calls = []
    run_batch(
        read_lines(batch_file), CheckOptions(), progress_callback=lambda d, t: calls.append((d, t))
    )
    assert calls[-1] == (5, 5)


def test_jobs_do_not_change_output(batch_file):
    lines = read_lines(batch_file)
    outputs = []
    for jobs in (1, 2):
        stream = io.StringIO()
        write_ndjson(run_batch(lines, CheckOptions(), jobs=jobs), stream, with_timing=False)
        outputs.append(stream.getvalue())
    assert outputs[0] == outputs[1]


def test_ndjson_lines_are_json(batch_file):
    stream = io.StringIO()
    write_ndjson(run_batch(read_lines(batch_file), CheckOptions()), stream)
    records = [json.loads(line) for line in stream.getvalue().splitlines()]
    assert len(records) == 5
    assert all("timing" in r for r in records if "error" not in r)
    assert records[2]["exit_code"] == EXIT_INPUT_ERROR


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
