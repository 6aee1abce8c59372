"""Versioned CSV contract for sweep outputs.

Both files start with a version comment line, then a fixed header row:

    # lsvi-trace-v1
    dataset,method,rho,gamma,iteration,neg_elbo,grad_norm,status

    # lsvi-summary-v1
    dataset,method,rho,gamma,iterations,final_neg_elbo,final_looseness,status

Floats are written with ``repr`` (shortest round-trip form), so reruns with
identical inputs are byte-identical.  Downstream consumers should validate
the version line before trusting column meanings.
"""

from __future__ import annotations

import csv
from pathlib import Path

TRACE_VERSION = "lsvi-trace-v1"
SUMMARY_VERSION = "lsvi-summary-v1"

TRACE_COLUMNS = ["dataset", "method", "rho", "gamma", "iteration", "neg_elbo", "grad_norm", "status"]
SUMMARY_COLUMNS = [
    "dataset",
    "method",
    "rho",
    "gamma",
    "iterations",
    "final_neg_elbo",
    "final_looseness",
    "status",
]

TRACE_HEADER = (TRACE_VERSION, TRACE_COLUMNS)
SUMMARY_HEADER = (SUMMARY_VERSION, SUMMARY_COLUMNS)


def write_csv(path, header: tuple[str, list[str]], rows) -> None:
    version, columns = header
    path = Path(path)
    with open(path, "w", newline="") as fh:
        fh.write(f"# {version}\n")
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow(row)


def read_csv(path, expected_version: str) -> dict[str, list[str]]:
    """Read a versioned CSV back into column lists; validates the version line."""
    path = Path(path)
    with open(path, newline="") as fh:
        first = fh.readline().strip()
        if first != f"# {expected_version}":
            raise ValueError(f"{path}: expected version line '# {expected_version}', got {first!r}")
        reader = csv.reader(fh)
        columns = next(reader)
        data: dict[str, list[str]] = {c: [] for c in columns}
        for row in reader:
            for c, cell in zip(columns, row):
                data[c].append(cell)
    return data
