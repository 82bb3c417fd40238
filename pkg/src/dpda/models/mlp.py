"""Two fully connected layers followed by softmax, trained with mini-batch SGD.

Shuffling for epoch ``e`` draws from a stream keyed on ``(seed, e)``, so
training for 50 epochs and then resuming for 350 more yields exactly the
same parameters as training for 400 epochs in one go.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from ..datamodel import ensure_dataset_arrays
from ..errors import DivergenceError, NonFiniteError, PreconditionError
from ._common import as_batch, infer_n_classes, softmax, softmax_vjp

ACTIVATIONS = ("relu", "identity")


@dataclass(frozen=True, eq=False)
class MlpModel:
    W1: np.ndarray  # (h, d)
    b1: np.ndarray
    W2: np.ndarray  # (c, h)
    b2: np.ndarray
    activation: str = "relu"
    hyper: dict = field(default_factory=dict)
    train_meta: dict = field(default_factory=dict)

    family = "mlp"

    def __post_init__(self):
        if self.activation not in ACTIVATIONS:
            raise PreconditionError(f"unknown activation {self.activation!r}")
        for name in ("W1", "b1", "W2", "b2"):
            arr = np.array(getattr(self, name), dtype=float)
            if not np.all(np.isfinite(arr)):
                raise NonFiniteError(f"MLP parameter {name} is not finite")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        h, d = self.W1.shape
        c = self.W2.shape[0]
        if self.b1.shape != (h,) or self.W2.shape != (c, h) or self.b2.shape != (c,):
            raise PreconditionError("inconsistent MLP parameter shapes")

    @property
    def n_features(self) -> int:
        return self.W1.shape[1]

    @property
    def n_classes(self) -> int:
        return self.W2.shape[0]

    @property
    def hidden(self) -> int:
        return self.W1.shape[0]

    def _forward(self, X):
        pre = X @ self.W1.T + self.b1
        hid = np.maximum(pre, 0.0) if self.activation == "relu" else pre
        return pre, hid, hid @ self.W2.T + self.b2

    def _act_grad(self, pre):
        if self.activation == "relu":
            return (pre > 0).astype(float)
        return np.ones_like(pre)

    def logits(self, X) -> np.ndarray:
        X, single = as_batch(X, self.n_features)
        z = self._forward(X)[2]
        return z[0] if single else z

    def predict_proba(self, X) -> np.ndarray:
        X, single = as_batch(X, self.n_features)
        P = softmax(self._forward(X)[2])
        return P[0] if single else P

    def predict(self, X) -> np.ndarray:
        return np.atleast_2d(self.predict_proba(X)).argmax(axis=1)

    def _pull_logit_grad(self, pre, G):
        """Map per-row logit gradients back to input space."""
        return ((G @ self.W2) * self._act_grad(pre)) @ self.W1

    def loss_input_gradient(self, X, y) -> np.ndarray:
        X, single = as_batch(X, self.n_features)
        y = np.broadcast_to(np.asarray(y, dtype=int), (len(X),))
        pre, _, z = self._forward(X)
        G = softmax(z)
        G[np.arange(len(X)), y] -= 1.0
        out = self._pull_logit_grad(pre, G)
        return out[0] if single else out

    def input_gradient(self, X) -> np.ndarray:
        """Cross-entropy input gradient against the model's own predicted class."""
        X, single = as_batch(X, self.n_features)
        out = self.loss_input_gradient(X, self.predict(X))
        return out[0] if single else out

    def prob_vjp(self, X, V) -> np.ndarray:
        X, _ = as_batch(X, self.n_features)
        pre, _, z = self._forward(X)
        return self._pull_logit_grad(pre, softmax_vjp(softmax(z), np.asarray(V, dtype=float)))

    def cross_entropy(self, X, y) -> float:
        X, _ = as_batch(X, self.n_features)
        z = self._forward(X)[2]
        z = z - z.max(axis=1, keepdims=True)
        logp = z - np.log(np.exp(z).sum(axis=1, keepdims=True))
        return float(-np.mean(logp[np.arange(len(X)), y]))

    def to_params(self) -> dict:
        return {"W1": self.W1.tolist(), "b1": self.b1.tolist(), "W2": self.W2.tolist(),
                "b2": self.b2.tolist(), "activation": self.activation, "hyper": self.hyper}

    @classmethod
    def from_params(cls, params: dict, train_meta=None) -> "MlpModel":
        return cls(np.array(params["W1"]), np.array(params["b1"]), np.array(params["W2"]),
                   np.array(params["b2"]), params.get("activation", "relu"),
                   dict(params.get("hyper", {})), dict(train_meta or {}))


def _sgd_epochs(params, activation, X, y, start, stop, lr, batch, seed):
    W1, b1, W2, b2 = (p.copy() for p in params)
    n = len(X)
    onehot = np.eye(W2.shape[0])[y]
    relu = activation == "relu"
    for epoch in range(start, stop):
        order = np.random.default_rng([seed, 1, epoch]).permutation(n)
        for lo in range(0, n, batch):
            idx = order[lo:lo + batch]
            xb = X[idx]
            pre = xb @ W1.T + b1
            hid = np.maximum(pre, 0.0) if relu else pre
            g = (softmax(hid @ W2.T + b2) - onehot[idx]) / len(idx)
            gW2 = g.T @ hid
            gb2 = g.sum(axis=0)
            gh = g @ W2
            if relu:
                gh = gh * (pre > 0)
            W1 -= lr * (gh.T @ xb)
            b1 -= lr * gh.sum(axis=0)
            W2 -= lr * gW2
            b2 -= lr * gb2
        if not (np.all(np.isfinite(W1)) and np.all(np.isfinite(W2))):
            raise DivergenceError(f"MLP parameters became non-finite at epoch {epoch + 1}")
    return W1, b1, W2, b2


def _finish(W1, b1, W2, b2, activation, hyper, X, y, epochs_done):
    model = MlpModel(W1, b1, W2, b2, activation, hyper)
    loss = model.cross_entropy(X, y)
    if not np.isfinite(loss):
        raise DivergenceError("training loss is not finite")
    meta = {"final_loss": loss, "train_accuracy": float(np.mean(model.predict(X) == y)),
            "epochs_done": epochs_done, "n_train": len(X)}
    return replace(model, train_meta=meta)


def init_mlp(d: int, hidden: int, n_classes: int, seed: int = 0, activation: str = "relu"):
    rng = np.random.default_rng([seed, 0])
    W1 = rng.normal(0.0, np.sqrt(2.0 / d), (hidden, d))
    W2 = rng.normal(0.0, np.sqrt(1.0 / hidden), (n_classes, hidden))
    return W1, np.zeros(hidden), W2, np.zeros(n_classes)


def train_mlp(X, y, hidden: int = 64, epochs: int = 100, lr: float = 0.1, batch: int = 32,
              seed: int = 0, activation: str = "relu", n_classes=None) -> MlpModel:
    """Minimise mean cross-entropy by mini-batch SGD from a seeded He initialisation."""
    if hidden < 1:
        raise PreconditionError("hidden must be >= 1")
    if epochs < 1:
        raise PreconditionError("epochs must be >= 1")
    if batch < 1 or lr <= 0:
        raise PreconditionError("batch must be >= 1 and lr > 0")
    if activation not in ACTIVATIONS:
        raise PreconditionError(f"unknown activation {activation!r}")
    X, y = ensure_dataset_arrays(X, y)
    if len(X) == 0:
        raise PreconditionError("cannot train on an empty dataset")
    c = infer_n_classes(y, n_classes)
    hyper = {"hidden": hidden, "epochs": epochs, "lr": lr, "batch": batch, "seed": seed}
    params = init_mlp(X.shape[1], hidden, c, seed, activation)
    params = _sgd_epochs(params, activation, X, y, 0, epochs, lr, batch, seed)
    return _finish(*params, activation, hyper, X, y, epochs)


def resume_mlp(model: MlpModel, X, y, epochs: int) -> MlpModel:
    """Continue SGD for ``epochs`` more epochs with the model's recorded hyperparameters."""
    if epochs < 0:
        raise PreconditionError("epochs must be >= 0")
    X, y = ensure_dataset_arrays(X, y, n_classes=model.n_classes)
    h = model.hyper
    done = int(model.train_meta.get("epochs_done", h.get("epochs", 0)))
    params = (model.W1, model.b1, model.W2, model.b2)
    params = _sgd_epochs(params, model.activation, X, y, done, done + epochs,
                         h["lr"], h["batch"], h["seed"])
    hyper = dict(h, epochs=done + epochs)
    return _finish(*params, model.activation, hyper, X, y, done + epochs)


def loss_input_gradient(model: MlpModel, x, y) -> np.ndarray:
    """Backpropagated ``d CE(softmax(M(x)), y) / dx``."""
    return model.loss_input_gradient(x, y)
