from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..datamodel import DataPoint, ensure_dataset_arrays


@dataclass(frozen=True, eq=False)
class Dataset:
    """Labeled points held as a ``(n, d)`` feature matrix and integer labels."""

    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        X, y = ensure_dataset_arrays(self.X, self.y)
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    def __len__(self):
        return self.X.shape[0]

    @property
    def dim(self) -> int:
        return self.X.shape[1]

    @property
    def classes(self) -> list:
        return np.unique(self.y).tolist()

    def class_counts(self) -> dict:
        values, counts = np.unique(self.y, return_counts=True)
        return {int(v): int(c) for v, c in zip(values, counts)}

    def subset(self, index) -> "Dataset":
        index = np.asarray(index, dtype=int)
        return Dataset(self.X[index], self.y[index])

    def points(self) -> list:
        return [DataPoint(x, int(lab)) for x, lab in zip(self.X, self.y)]

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return np.array_equal(self.X, other.X) and np.array_equal(self.y, other.y)

    __hash__ = None
