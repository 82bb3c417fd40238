"""Core value types shared across the package.

Everything here is immutable after construction. Feature arrays are stored
as read-only ``float64`` numpy arrays so instances can be handed to worker
threads without copying.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Any, Optional, Sequence

import numpy as np

from .errors import (
    DimensionMismatchError,
    EmptyGroupError,
    NonFiniteError,
    ValidationError,
)

SIMPLEX_TOL = 1e-9


class Provenance(str, enum.Enum):
    """Ground-truth or decided origin of a group."""

    TRAINING = "training"
    NON_TRAINING = "non_training"

    @classmethod
    def from_bool(cls, is_training: bool) -> "Provenance":
        return cls.TRAINING if is_training else cls.NON_TRAINING


def _frozen_array(values, ndim: int) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.ndim != ndim:
        raise ValidationError(f"expected a {ndim}-d array, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class DataPoint:
    features: np.ndarray
    label: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "features", _frozen_array(self.features, 1))
        if self.label is not None:
            object.__setattr__(self, "label", int(self.label))

    @property
    def dim(self) -> int:
        return self.features.shape[0]

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.features)))

    def check_label(self, n_classes: int) -> None:
        if self.label is not None and not 0 <= self.label < n_classes:
            raise ValidationError(f"label {self.label} outside 0..{n_classes - 1}")

    def __eq__(self, other):
        if not isinstance(other, DataPoint):
            return NotImplemented
        return self.label == other.label and np.array_equal(self.features, other.features)

    __hash__ = None


@dataclass(frozen=True)
class DataGroup:
    """A set of candidate points judged together.

    ``truth`` is only ever read by evaluation code; auditing never looks at it.
    Construction is lenient so that :func:`validate_group` can report every
    problem at once.
    """

    group_id: str
    points: tuple
    truth: Optional[Provenance] = None

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))
        if self.truth is not None:
            object.__setattr__(self, "truth", Provenance(self.truth))

    @classmethod
    def from_array(cls, group_id, X, labels=None, truth=None) -> "DataGroup":
        X = np.asarray(X, dtype=float)
        if labels is None:
            labels = [None] * len(X)
        return cls(group_id, tuple(DataPoint(x, lab) for x, lab in zip(X, labels)), truth)

    def __len__(self):
        return len(self.points)

    @property
    def dim(self) -> int:
        return self.points[0].dim

    def features(self) -> np.ndarray:
        """Stack point features into an ``(n, d)`` array."""
        return np.stack([p.features for p in self.points])


def validate_group(group: DataGroup) -> DataGroup:
    """Return ``group`` unchanged if it is non-empty, finite and dimensionally consistent."""
    if len(group.points) == 0:
        raise EmptyGroupError(f"group {group.group_id!r} has no points")
    dims = [p.dim for p in group.points]
    d = dims[0]
    bad = [i for i, di in enumerate(dims) if di != d]
    if bad:
        raise DimensionMismatchError(
            f"group {group.group_id!r}: points {bad} do not have dimension {d}", bad
        )
    nonfinite = [i for i, p in enumerate(group.points) if not p.is_finite()]
    if nonfinite:
        raise NonFiniteError(f"group {group.group_id!r}: non-finite features at points {nonfinite}")
    return group


def check_simplex(probs, tol: float = SIMPLEX_TOL) -> np.ndarray:
    """Validate one probability vector or a batch of them (rows)."""
    p = np.asarray(probs, dtype=float)
    if not np.all(np.isfinite(p)):
        raise NonFiniteError("probability vector contains non-finite entries")
    if np.any(p < -tol) or np.any(p > 1 + tol):
        raise ValidationError("probability entries outside [0, 1]")
    sums = p.sum(axis=-1)
    if np.any(np.abs(sums - 1.0) > tol):
        raise ValidationError(f"probabilities do not sum to 1 (max deviation {np.max(np.abs(sums - 1)):.3g})")
    return p


@dataclass(frozen=True, eq=False)
class ProbVector:
    probs: np.ndarray

    def __post_init__(self):
        arr = _frozen_array(self.probs, 1)
        check_simplex(arr)
        object.__setattr__(self, "probs", arr)

    def __len__(self):
        return self.probs.shape[0]


@dataclass(frozen=True)
class DifferentialScore:
    subject_id: str
    value: float

    def __post_init__(self):
        v = float(self.value)
        if not math.isfinite(v) or v < 0:
            raise ValidationError(f"differential score must be finite and >= 0, got {v}")
        object.__setattr__(self, "value", v)


@dataclass(frozen=True)
class AuditVerdict:
    group_id: str
    decided: Provenance
    score: DifferentialScore
    threshold_used: float

    def __post_init__(self):
        object.__setattr__(self, "decided", Provenance(self.decided))
        expected = Provenance.from_bool(self.score.value > self.threshold_used)
        if self.decided is not expected:
            raise ValidationError(
                f"verdict for {self.group_id!r} inconsistent with score {self.score.value} "
                f"and threshold {self.threshold_used}"
            )

    @classmethod
    def from_score(cls, score: DifferentialScore, threshold: float) -> "AuditVerdict":
        # ties go to non-training
        decided = Provenance.from_bool(score.value > threshold)
        return cls(score.subject_id, decided, score, float(threshold))


@dataclass(frozen=True)
class AuditReport:
    verdicts: tuple
    threshold: float
    seed: int
    config_echo: dict = field(default_factory=dict)
    metrics: Optional[dict] = None
    significance: Optional[dict] = None
    curve: tuple = ()
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "verdicts", tuple(self.verdicts))
        if self.metrics is not None:
            for key in ("f_measure", "auc"):
                v = self.metrics.get(key)
                if v is not None and not 0.0 <= v <= 1.0:
                    raise ValidationError(f"{key}={v} outside [0, 1]")

    @property
    def scores(self) -> list:
        return [v.score.value for v in self.verdicts]

    def training_ids(self) -> list:
        return [v.group_id for v in self.verdicts if v.decided is Provenance.TRAINING]

    def to_dict(self) -> dict[str, Any]:
        return {
            "seed": self.seed,
            "method": self.config_echo.get("method"),
            "metric": self.config_echo.get("metric"),
            "threshold": self.threshold,
            "curve_ref": self.extras.get("curve_ref"),
            "verdicts": [
                {"group_id": v.group_id, "score": v.score.value, "decided": v.decided.value}
                for v in self.verdicts
            ],
            "metrics": self.metrics,
            "significance": self.significance,
            "config_echo": self.config_echo,
            "extras": {k: v for k, v in self.extras.items() if k != "curve_ref" and not k.startswith("_")},
        }


def ensure_dataset_arrays(X, y=None, *, n_classes: Optional[int] = None):
    """Coerce ``X``/``y`` to arrays and check shape, finiteness and label range."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ValidationError(f"features must be 2-d, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise NonFiniteError("features contain NaN or Inf")
    if y is None:
        return X, None
    y = np.asarray(y)
    if y.shape != (X.shape[0],):
        raise DimensionMismatchError(f"{X.shape[0]} feature rows but labels of shape {y.shape}")
    if y.size and not np.issubdtype(y.dtype, np.integer):
        if not np.all(np.equal(np.mod(y, 1), 0)):
            raise ValidationError("labels must be integers")
    y = y.astype(int)
    if y.size and y.min() < 0:
        raise ValidationError("labels must be non-negative")
    if n_classes is not None and y.size and y.max() >= n_classes:
        raise ValidationError(f"label {y.max()} outside 0..{n_classes - 1}")
    return X, y


def groups_dim(groups: Sequence[DataGroup]) -> int:
    dims = {g.dim for g in groups}
    if len(dims) != 1:
        raise DimensionMismatchError(f"groups have mixed feature dimensions {sorted(dims)}")
    return dims.pop()
