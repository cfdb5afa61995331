"""Python access to the batchlab core."""

import json

from ._core import (
    CompletionRecord,
    Error,
    Priority,
    Sample,
    generate_synthetic,
    read_instance,
    run_cli,
    simulate,
    solve_offline,
    write_instance,
)
from ._core import report_json as _report_json

__all__ = [
    "CompletionRecord",
    "Error",
    "Priority",
    "Sample",
    "generate_synthetic",
    "read_instance",
    "report",
    "run_cli",
    "simulate",
    "solve_offline",
    "write_instance",
]


def report(records, samples, label=""):
    """TAT statistics per kind and priority as a dict."""
    return json.loads(_report_json(records, samples, label))
