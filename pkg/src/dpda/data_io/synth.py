from __future__ import annotations

import numpy as np

from ..errors import PreconditionError
from .dataset import Dataset

DEFAULT_MEANS = ((-2.0, 0.0), (2.0, 0.0))


def synth_2d(n: int = 100, means=DEFAULT_MEANS, sigma: float = 0.5, seed: int = 0) -> Dataset:
    """Two isotropic Gaussian classes in the plane, ``n // 2`` points each (class 0 first)."""
    if n < 4 or n % 2:
        raise PreconditionError(f"n must be even and >= 4, got {n}")
    if sigma < 0:
        raise PreconditionError("sigma must be >= 0")
    means = np.asarray(means, dtype=float)
    if means.shape != (2, 2):
        raise PreconditionError("need two 2-d means")
    rng = np.random.default_rng(seed)
    half = n // 2
    X = np.vstack([means[k] + sigma * rng.standard_normal((half, 2)) for k in range(2)])
    y = np.repeat([0, 1], half)
    return Dataset(X, y)


def synth_blobs(n: int, dim: int, n_classes: int = 2, separation: float = 4.0,
                sigma: float = 1.0, seed: int = 0) -> Dataset:
    """Gaussian classes in ``dim`` dimensions.

    Class means are drawn once from ``N(0, separation^2 / (2 dim) I)`` so
    the expected distance between two means is about ``separation``.
    Counts are as even as possible, extras going to the lowest classes.
    """
    if dim < 1 or n_classes < 2 or n < n_classes:
        raise PreconditionError("need dim >= 1, n_classes >= 2 and n >= n_classes")
    rng = np.random.default_rng(seed)
    means = rng.normal(0.0, separation / np.sqrt(2.0 * dim), size=(n_classes, dim))
    counts = [n // n_classes + (k < n % n_classes) for k in range(n_classes)]
    X = np.vstack([means[k] + sigma * rng.standard_normal((counts[k], dim)) for k in range(n_classes)])
    y = np.repeat(np.arange(n_classes), counts)
    return Dataset(X, y)
