import numpy as np
import pytest

from dpda.data_io import synth_2d
from dpda.datamodel import DataGroup, Provenance


@pytest.fixture
def blobs2d():
    """Two well separated 2-D classes, 20 points each."""
    return synth_2d(40, means=((-2.0, 0.0), (2.0, 0.0)), sigma=0.3, seed=11)


class LinearStub:
    """``M(x) = A x + b`` without a softmax, for exact sensitivity checks."""

    def __init__(self, A, b=None):
        self.A = np.asarray(A, dtype=float)
        self.b = np.zeros(self.A.shape[0]) if b is None else np.asarray(b, dtype=float)

    def predict_proba(self, X):
        return np.atleast_2d(X) @ self.A.T + self.b


class ConstantModel:
    """Outputs a fixed probability vector whatever the input."""

    def __init__(self, p, d):
        self.p = np.asarray(p, dtype=float)
        self.n_features = d
        self.n_classes = len(self.p)

    def predict_proba(self, X):
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            return self.p.copy()
        return np.tile(self.p, (len(X), 1))

    def prob_vjp(self, X, V):
        return np.zeros_like(np.atleast_2d(np.asarray(X, dtype=float)))

    def input_gradient(self, X):
        return np.zeros_like(np.asarray(X, dtype=float))


def make_groups(X, truth=None, size=1, prefix="g"):
    X = np.asarray(X, dtype=float)
    out = []
    for k, i in enumerate(range(0, len(X), size)):
        t = None if truth is None else Provenance(truth[k])
        out.append(DataGroup.from_array(f"{prefix}{k:03d}", X[i:i + size], truth=t))
    return out
