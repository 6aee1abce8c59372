"""Dataset ingestion and synthesis for the command-line layer.

CSV convention: numeric columns only, no header, last column is the response.
Logistic responses may be coded {0, 1} or {-1, +1}; both are mapped to
{-1, +1}.  Feature standardization (optional, off by default) rescales each
design column to zero mean and unit variance; whether a dataset should be
standardized before fitting is a modeling choice this package does not make
for you.
"""

from __future__ import annotations

import csv

import numpy as np
from scipy.special import expit

from .energy import GlmDataset
from .exceptions import DataError


def load_dataset(path, kind: str, standardize: bool = False) -> GlmDataset:
    """Read a CSV into a validated dataset.

    Non-numeric cells are rejected with their (1-based) row and column.
    """
    rows: list[list[float]] = []
    width = None
    with open(path, newline="") as fh:
        for r, record in enumerate(csv.reader(fh), start=1):
            if not record or (len(record) == 1 and record[0].strip() == ""):
                continue
            parsed = []
            for c, cell in enumerate(record, start=1):
                try:
                    parsed.append(float(cell))
                except ValueError:
                    raise DataError(
                        f"{path}: non-numeric value {cell!r} at row {r}, column {c}"
                    ) from None
            if width is None:
                width = len(parsed)
            elif len(parsed) != width:
                raise DataError(f"{path}: row {r} has {len(parsed)} columns, expected {width}")
            rows.append(parsed)
    if not rows:
        raise DataError(f"{path}: no data rows")
    if width < 2:
        raise DataError(f"{path}: need at least one feature column plus the response")
    table = np.asarray(rows, dtype=float)
    X, y = table[:, :-1], table[:, -1]
    if kind == "logistic":
        y = _coerce_labels(y, path)
    if standardize:
        X = standardize_features(X)
    return GlmDataset(X=X, y=y, kind=kind)


def _coerce_labels(y: np.ndarray, origin) -> np.ndarray:
    values = set(np.unique(y).tolist())
    if values <= {-1.0, 1.0}:
        return y
    if values <= {0.0, 1.0}:
        return np.where(y > 0.5, 1.0, -1.0)
    raise DataError(f"{origin}: logistic responses must be coded {{0,1}} or {{-1,+1}}, got {sorted(values)}")


def standardize_features(X: np.ndarray) -> np.ndarray:
    """Zero-mean, unit-variance columns; constant columns are only centered."""
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    std = np.where(std == 0.0, 1.0, std)
    return (X - mean) / std


def synth_dataset(kind: str, N: int, d: int, seed: int) -> GlmDataset:
    """Standard-normal design with responses drawn from the matching model.

    Linear: ``y = X z + noise`` with unit noise; logistic: labels in {-1, +1}
    sampled with success probability ``sigmoid(x^T z)``.  The generating
    coefficients z are standard normal.  Deterministic per seed.
    """
    if N < 1 or d < 1:
        raise DataError("N and d must be at least 1")
    if kind not in ("linear", "logistic"):
        raise DataError(f"unknown dataset kind {kind!r}")
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((N, d))
    z = rng.standard_normal(d)
    if kind == "linear":
        y = X @ z + rng.standard_normal(N)
    else:
        y = np.where(rng.random(N) < expit(X @ z), 1.0, -1.0)
    return GlmDataset(X=X, y=y, kind=kind)


def write_dataset_csv(data: GlmDataset, path) -> None:
    """Emit the CSV form that load_dataset ingests (features, then response)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for row, resp in zip(data.X, data.y):
            writer.writerow([repr(float(v)) for v in row] + [repr(float(resp))])
