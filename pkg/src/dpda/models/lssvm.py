"""Linear least-squares SVM, solved in closed form.

Binary problems use a single head with decision value ``f(x) = w.x + b``
(class 1 when ``f >= 0``); multiclass problems use one-vs-rest heads.
Probabilities are the softmax of the per-class decision values, with the
binary head expanded to ``(-f, f)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..datamodel import ensure_dataset_arrays
from ..errors import NonFiniteError, PreconditionError, SingularSystemError
from ._common import as_batch, infer_n_classes, softmax, softmax_vjp

MAX_CONDITION = 1e12


@dataclass(frozen=True, eq=False)
class LsSvmModel:
    weights: np.ndarray  # (heads, d)
    biases: np.ndarray  # (heads,)
    C: float
    n_classes: int
    train_meta: dict = field(default_factory=dict)

    family = "lssvm"

    def __post_init__(self):
        W = np.array(self.weights, dtype=float, ndmin=2)
        b = np.array(self.biases, dtype=float, ndmin=1)
        if not (np.all(np.isfinite(W)) and np.all(np.isfinite(b))):
            raise NonFiniteError("LS-SVM parameters must be finite")
        heads = 1 if self.n_classes == 2 and W.shape[0] == 1 else self.n_classes
        if W.shape[0] != heads or b.shape != (heads,):
            raise PreconditionError(
                f"expected {heads} heads for {self.n_classes} classes, got weights {W.shape}"
            )
        if self.C <= 0:
            raise PreconditionError("C must be positive")
        W.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "weights", W)
        object.__setattr__(self, "biases", b)

    @property
    def n_features(self) -> int:
        return self.weights.shape[1]

    @property
    def binary(self) -> bool:
        return self.weights.shape[0] == 1

    def decision_function(self, X) -> np.ndarray:
        X, _ = as_batch(X, self.n_features)
        return X @ self.weights.T + self.biases

    def _class_scores(self, X) -> np.ndarray:
        F = self.decision_function(X)
        return np.hstack([-F, F]) if self.binary else F

    def _class_directions(self) -> np.ndarray:
        """``(c, d)`` gradient of each class score with respect to x."""
        W = self.weights
        return np.vstack([-W, W]) if self.binary else W

    def predict(self, X) -> np.ndarray:
        F = self.decision_function(X)
        if self.binary:
            return (F[:, 0] >= 0).astype(int)
        return F.argmax(axis=1)

    def predict_proba(self, X) -> np.ndarray:
        X, single = as_batch(X, self.n_features)
        P = softmax(self._class_scores(X))
        return P[0] if single else P

    def prob_vjp(self, X, V) -> np.ndarray:
        """Rows ``v_i^T dP/dx`` evaluated at each ``x_i``."""
        X, _ = as_batch(X, self.n_features)
        P = softmax(self._class_scores(X))
        return softmax_vjp(P, np.asarray(V, dtype=float)) @ self._class_directions()

    def input_gradient(self, X) -> np.ndarray:
        """Batched :func:`lssvm_input_gradient`."""
        X, single = as_batch(X, self.n_features)
        pred = self.predict(X)
        scores = self._class_scores(X)[np.arange(len(X)), pred]
        dirs = self._class_directions()[pred]
        G = 2.0 * (1.0 - scores)[:, None] * dirs
        return G[0] if single else G

    def to_params(self) -> dict:
        return {"weights": self.weights.tolist(), "biases": self.biases.tolist(), "C": self.C}

    @classmethod
    def from_params(cls, params: dict, n_classes: int, train_meta=None) -> "LsSvmModel":
        return cls(np.array(params["weights"]), np.array(params["biases"]), float(params["C"]),
                   n_classes, dict(train_meta or {}))


def train_lssvm(X, y, C: float = 1.0, n_classes=None) -> LsSvmModel:
    """Fit ``min 1/2 |w|^2 + C sum xi^2`` s.t. ``t_i (w.x_i + b) = 1 - xi_i``.

    With targets ``t_i = +-1`` the constraint gives ``xi_i = t_i - f(x_i)``,
    so each head is a ridge regression with an unpenalised bias:

        [X^T X + I/(2C)   X^T 1] [w]   [X^T t]
        [1^T X            n    ] [b] = [1^T t]
    """
    if C <= 0:
        raise PreconditionError("C must be positive")
    X, y = ensure_dataset_arrays(X, y)
    n, d = X.shape
    if d < 1:
        raise PreconditionError("need at least one feature")
    c = infer_n_classes(y, n_classes)
    present = np.unique(y)
    if len(present) < 2 or len(present) < c:
        raise PreconditionError(f"LS-SVM needs at least one point per class, found classes {present.tolist()}")

    if c == 2:
        T = np.where(y == 1, 1.0, -1.0)[:, None]
    else:
        T = np.where(y[:, None] == np.arange(c)[None, :], 1.0, -1.0)

    A = np.empty((d + 1, d + 1))
    A[:d, :d] = X.T @ X + np.eye(d) / (2.0 * C)
    colsum = X.sum(axis=0)
    A[:d, d] = colsum
    A[d, :d] = colsum
    A[d, d] = n
    rhs = np.vstack([X.T @ T, T.sum(axis=0, keepdims=True)])

    cond = np.linalg.cond(A)
    if not np.isfinite(cond) or cond > MAX_CONDITION:
        raise SingularSystemError(f"LS-SVM system is numerically singular (condition {cond:.3g})")
    sol = np.linalg.solve(A, rhs)
    residual = float(np.linalg.norm(A @ sol - rhs) / max(np.linalg.norm(rhs), 1e-300))

    model = LsSvmModel(sol[:d].T, sol[d], float(C), c)
    acc = float(np.mean(model.predict(X) == y))
    meta = {"train_accuracy": acc, "condition": float(cond), "residual": residual, "n_train": n}
    object.__setattr__(model, "train_meta", meta)
    return model


def lssvm_input_gradient(model: LsSvmModel, x) -> np.ndarray:
    """``2 (1 - s_k(x)) dir_k`` for the predicted class ``k``.

    ``s_k`` is the class-``k`` decision value and ``dir_k`` its weight
    direction (``w`` for the binary positive class, ``-w`` for the negative
    one). Zero when the predicted class sits exactly on its unit margin.
    """
    return model.input_gradient(x)
