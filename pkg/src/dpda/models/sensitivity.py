"""Average-case output sensitivity around a point.

For ``dx ~ N(0, eps I)`` a first-order expansion gives
``E |M(x + dx) - M(x)|^2 ~= eps |J(x)|_F^2``, exact when ``M`` is linear.
"""

from __future__ import annotations

import numpy as np

from ..errors import PreconditionError


def _as_function(model):
    if hasattr(model, "predict_proba"):
        return lambda X: np.atleast_2d(model.predict_proba(X))
    if callable(model):
        return lambda X: np.atleast_2d(model(X))
    raise PreconditionError("model must be callable or expose predict_proba")


def output_jacobian(model, x, step: float = 1e-5) -> np.ndarray:
    """Central-difference Jacobian of the model output, shape ``(c, d)``."""
    f = _as_function(model)
    x = np.asarray(x, dtype=float)
    d = x.shape[0]
    E = np.eye(d) * step
    hi = f(x[None, :] + E)
    lo = f(x[None, :] - E)
    return ((hi - lo) / (2.0 * step)).T


def sensitivity_estimate(model, x, eps: float, n: int = 1000, seed: int = 0,
                         fd_step: float = 1e-5) -> dict:
    """Monte-Carlo mean squared output change next to ``eps * |J|_F^2``.

    ``eps`` is the perturbation *variance*.
    """
    if eps <= 0:
        raise PreconditionError("eps must be positive")
    if n < 100:
        raise PreconditionError("n must be >= 100")
    f = _as_function(model)
    x = np.asarray(x, dtype=float)
    rng = np.random.default_rng(seed)
    dx = rng.normal(0.0, np.sqrt(eps), size=(n, x.shape[0]))
    base = f(x[None, :])
    diffs = f(x[None, :] + dx) - base
    empirical = float(np.mean(np.sum(diffs ** 2, axis=1)))
    J = output_jacobian(model, x, fd_step)
    return {"empirical": empirical, "jacobian_term": float(eps * np.sum(J ** 2))}
