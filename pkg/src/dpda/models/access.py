from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Any

import numpy as np

from ..errors import ValidationError


class AccessMode(str, enum.Enum):
    WHITE_BOX = "white_box"
    BLACK_BOX = "black_box"

    @classmethod
    def parse(cls, value) -> "AccessMode":
        aliases = {"wb": cls.WHITE_BOX, "bb": cls.BLACK_BOX}
        if isinstance(value, str) and value.lower() in aliases:
            return aliases[value.lower()]
        return cls(value)


class PredictOnlyHandle:
    """Opaque wrapper exposing nothing but ``predict_proba``.

    The wrapped model lives only in a closure; there is deliberately no
    attribute through which parameters or gradients can be reached.
    """

    __slots__ = ("_predict", "n_features", "n_classes")

    def __init__(self, model):
        predict = model.predict_proba
        self._predict = lambda X: np.array(predict(X), dtype=float)
        self.n_features = model.n_features
        self.n_classes = model.n_classes

    def predict_proba(self, X) -> np.ndarray:
        return self._predict(X)

    def __repr__(self):
        return f"PredictOnlyHandle(d={self.n_features}, c={self.n_classes})"


@dataclass(frozen=True)
class ModelAccess:
    mode: AccessMode
    model: Any

    def __post_init__(self):
        object.__setattr__(self, "mode", AccessMode.parse(self.mode))
        if self.mode is AccessMode.BLACK_BOX and not isinstance(self.model, PredictOnlyHandle):
            object.__setattr__(self, "model", PredictOnlyHandle(self.model))
        if not hasattr(self.model, "predict_proba"):
            raise ValidationError("model must expose predict_proba")

    @classmethod
    def white_box(cls, model) -> "ModelAccess":
        return cls(AccessMode.WHITE_BOX, model)

    @classmethod
    def black_box(cls, model) -> "ModelAccess":
        return cls(AccessMode.BLACK_BOX, model)

    @property
    def is_white_box(self) -> bool:
        return self.mode is AccessMode.WHITE_BOX

    def predict_proba(self, X) -> np.ndarray:
        return self.model.predict_proba(X)

    @property
    def n_features(self) -> int:
        return self.model.n_features

    @property
    def n_classes(self) -> int:
        return self.model.n_classes
