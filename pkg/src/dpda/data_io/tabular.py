"""CSV ingestion with header ``f0,...,f{d-1},label``."""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from ..errors import DataFormatError
from .dataset import Dataset


def feature_header(d: int) -> list:
    return [f"f{j}" for j in range(d)]


def fmt_float(v: float) -> str:
    # repr is the shortest string that round-trips exactly
    return repr(float(v))


def save_csv(data: Dataset, path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(feature_header(data.dim) + ["label"])
        for x, lab in zip(data.X, data.y):
            w.writerow([fmt_float(v) for v in x] + [int(lab)])
    return path


def minmax_scale(X: np.ndarray) -> np.ndarray:
    lo = X.min(axis=0)
    span = X.max(axis=0) - lo
    span[span == 0] = 1.0
    return (X - lo) / span


def load_csv(path, feature_columns: Optional[Sequence[str]] = None, label_column: str = "label",
             minmax: bool = False) -> Dataset:
    """Parse a labeled CSV file.

    Without ``feature_columns`` every column except the label is a feature,
    in file order. Data rows are numbered from 1 in error messages.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataFormatError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        if label_column not in header:
            raise DataFormatError(f"{path}: missing label column {label_column!r}")
        if feature_columns is None:
            feature_columns = [h for h in header if h != label_column]
        missing = [c for c in feature_columns if c not in header]
        if missing:
            raise DataFormatError(f"{path}: missing feature columns {missing}")
        fidx = [header.index(c) for c in feature_columns]
        lidx = header.index(label_column)

        X, y = [], []
        for rowno, row in enumerate(reader, start=1):
            if not row:
                continue
            if len(row) != len(header):
                raise DataFormatError(f"{path}: row {rowno} has {len(row)} fields, expected {len(header)}", rowno)
            try:
                X.append([float(row[j]) for j in fidx])
            except ValueError:
                raise DataFormatError(f"{path}: non-numeric feature in row {rowno}", rowno) from None
            try:
                label = float(row[lidx])
            except ValueError:
                raise DataFormatError(f"{path}: non-numeric label in row {rowno}", rowno) from None
            if label != int(label):
                raise DataFormatError(f"{path}: non-integer label in row {rowno}", rowno)
            y.append(int(label))

    X = np.array(X, dtype=float).reshape(len(X), len(fidx))
    if not np.all(np.isfinite(X)):
        raise DataFormatError(f"{path}: non-finite feature values")
    if minmax and len(X):
        X = minmax_scale(X)
    return Dataset(X, np.array(y, dtype=int))
