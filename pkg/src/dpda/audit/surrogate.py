from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import PreconditionError
from ..models.lssvm import LsSvmModel, train_lssvm


@dataclass(frozen=True, eq=False)
class SurrogateModel:
    """LS-SVM imitating a black-box target from its own outputs."""

    model: LsSvmModel
    fidelity: float

    @property
    def n_features(self):
        return self.model.n_features

    @property
    def n_classes(self):
        return self.model.n_classes

    def predict_proba(self, X):
        return self.model.predict_proba(X)

    def input_gradient(self, X):
        return self.model.input_gradient(X)

    def prob_vjp(self, X, V):
        return self.model.prob_vjp(X, V)


def fit_surrogate(points, target_outputs, C: float = 1.0) -> SurrogateModel:
    X = np.asarray(points, dtype=float)
    P = np.asarray(target_outputs, dtype=float)
    if X.ndim != 2 or P.ndim != 2 or len(X) != len(P):
        raise PreconditionError("need one target output per point")
    c = P.shape[1]
    if len(X) < c:
        raise PreconditionError(f"need at least {c} points to fit a surrogate")
    labels = P.argmax(axis=1)
    present = np.unique(labels)
    if present.size < 2:
        raise PreconditionError("target assigns every audit point to one class; surrogate is degenerate")
    if present.size < c:
        raise PreconditionError(
            f"target never predicts classes {sorted(set(range(c)) - set(present.tolist()))}; "
            "cannot fit a one-vs-rest surrogate"
        )
    model = train_lssvm(X, labels, C=C, n_classes=c)
    fidelity = float(np.mean(model.predict(X) == labels))
    return SurrogateModel(model, fidelity)


def gradient_source(access, X, C: float = 1.0):
    """Model to take input gradients from, plus the surrogate if one was fitted.

    White-box access to a differentiable target uses the target itself;
    everything else (black-box handles, forests) falls back to a surrogate
    trained on the target's outputs for ``X``.
    """
    model = access.model
    if access.is_white_box and hasattr(model, "prob_vjp") and hasattr(model, "input_gradient"):
        return model, None
    X = np.asarray(X, dtype=float)
    surrogate = fit_surrogate(X, access.predict_proba(X), C=C)
    return surrogate, surrogate
