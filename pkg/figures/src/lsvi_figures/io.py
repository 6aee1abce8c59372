"""Readers for the versioned sweep CSV contract.

The sweep tool writes two delimited formats; this package consumes them and
nothing else, so the contract is re-stated here:

    # lsvi-trace-v1
    dataset,method,rho,gamma,iteration,neg_elbo,grad_norm,status

    # lsvi-summary-v1
    dataset,method,rho,gamma,iterations,final_neg_elbo,final_looseness,status

The first line is a version comment; the second is the header row.  Any
missing required column is an error naming that column.
"""

from __future__ import annotations

import csv
from pathlib import Path

TRACE_VERSION = "lsvi-trace-v1"
SUMMARY_VERSION = "lsvi-summary-v1"

TRACE_COLUMNS = ("dataset", "method", "rho", "gamma", "iteration", "neg_elbo", "grad_norm", "status")
SUMMARY_COLUMNS = (
    "dataset",
    "method",
    "rho",
    "gamma",
    "iterations",
    "final_neg_elbo",
    "final_looseness",
    "status",
)


class FormatError(ValueError):
    pass


def _read_versioned(path, version: str, required: tuple[str, ...]) -> list[dict[str, str]]:
    path = Path(path)
    with open(path, newline="") as fh:
        first = fh.readline().strip()
        if first != f"# {version}":
            raise FormatError(f"{path}: expected version line '# {version}', got {first!r}")
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for column in required:
            if column not in header:
                raise FormatError(f"{path}: missing required column {column!r}")
        return list(reader)


def read_trace(path) -> list[dict[str, str]]:
    return _read_versioned(path, TRACE_VERSION, TRACE_COLUMNS)


def read_summary(path) -> list[dict[str, str]]:
    return _read_versioned(path, SUMMARY_VERSION, SUMMARY_COLUMNS)
