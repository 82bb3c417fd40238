from __future__ import annotations

import enum

import numpy as np

from ..errors import DimensionMismatchError, ValidationError


class DifferentialMetric(str, enum.Enum):
    L2 = "l2"
    COSINE = "cosine"

    @classmethod
    def parse(cls, value) -> "DifferentialMetric":
        if isinstance(value, cls):
            return value
        aliases = {"cosine_distance": cls.COSINE, "euclidean": cls.L2}
        v = str(value).lower()
        return aliases.get(v) or cls(v)


def phi(a, b, metric=DifferentialMetric.L2):
    """Distance between model outputs; row-wise when given 2-d batches.

    L2 is ``|a - b|_2``; cosine is ``1 - a.b / (|a| |b|)``, clipped at zero so
    rounding never yields a negative distance.
    """
    metric = DifferentialMetric.parse(metric)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise DimensionMismatchError(f"cannot compare outputs of shapes {a.shape} and {b.shape}")
    if metric is DifferentialMetric.L2:
        out = np.sqrt(np.sum((a - b) ** 2, axis=-1))
    else:
        na = np.linalg.norm(a, axis=-1)
        nb = np.linalg.norm(b, axis=-1)
        if np.any(na == 0) or np.any(nb == 0):
            raise ValidationError("cosine distance is undefined for a zero vector")
        cos = np.sum(a * b, axis=-1) / (na * nb)
        out = np.clip(1.0 - cos, 0.0, 2.0)
        # exact equality must give exactly zero
        out = np.where(np.all(a == b, axis=-1), 0.0, out)
    return float(out) if out.ndim == 0 else out
