import numpy as np

from ..errors import DimensionMismatchError, PreconditionError


def softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def as_batch(x, dim: int):
    """Return ``(X, was_single)`` with ``X`` shaped ``(n, dim)``."""
    X = np.asarray(x, dtype=float)
    single = X.ndim == 1
    if single:
        X = X[None, :]
    if X.ndim != 2 or X.shape[1] != dim:
        raise DimensionMismatchError(f"model expects inputs of dimension {dim}, got shape {np.shape(x)}")
    return X, single


def softmax_vjp(P: np.ndarray, V: np.ndarray) -> np.ndarray:
    """Row-wise ``v^T (diag(p) - p p^T)``, i.e. the pullback through softmax."""
    return P * V - P * np.sum(P * V, axis=1, keepdims=True)


def infer_n_classes(y, n_classes=None) -> int:
    if n_classes is not None:
        if y.size and y.max() >= n_classes:
            raise PreconditionError(f"label {y.max()} outside 0..{n_classes - 1}")
        return int(n_classes)
    return max(2, int(y.max()) + 1 if y.size else 2)
