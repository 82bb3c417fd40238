"""Learned projection ``A(x) = W x`` by alternating optimisation.

The objective for fixed labels is

    J(W) = mean_{x in D_t} 1/2 |M(Wx) - M(x)|^2  -  mean_{x in D_o} 1/2 |M(Wx) - M(x)|^2

whose gradient is ``mean_t J_M(Wx)^T r(x) x^T - mean_o J_M(Wx)^T r(x) x^T`` with
``r(x) = M(Wx) - M(x)``. ``W`` moves *up* this gradient; labels are then
re-derived from the new differential scores with the threshold selector.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..datamodel import Provenance
from ..models.access import ModelAccess
from ..errors import DimensionMismatchError, DivergenceError, NumericalError, PreconditionError
from .surrogate import gradient_source
from .differential import DifferentialMetric, phi
from .threshold import ThresholdResult, determine_threshold
from .transforms import MultiplicativeConfig, ProjectionTransform

log = logging.getLogger(__name__)

SINGULAR_TOL = 1e-9


def initial_W(d: int, cfg: MultiplicativeConfig) -> np.ndarray:
    """Identity plus symmetric noise with spectral norm ``init_scale``.

    Eigenvalues lie in ``[1 - scale, 1 + scale]`` so the start is positive
    definite whenever ``scale < 1``.
    """
    if cfg.W_init is not None:
        W = np.array(cfg.W_init, dtype=float)
        if W.shape != (d, d):
            raise DimensionMismatchError(f"W_init must be {d}x{d}, got {W.shape}")
        return W
    W = np.eye(d)
    if cfg.init_scale > 0:
        rng = np.random.default_rng([cfg.seed, 7])
        A = rng.normal(size=(d, d))
        S = 0.5 * (A + A.T)
        W += cfg.init_scale * S / np.linalg.norm(S, 2)
    return W


def _half_sq_residual(model, W, X, base):
    Y = X @ W.T
    R = np.atleast_2d(model.predict_proba(Y)) - base
    return Y, R


def projection_objective(W, model, D_t, D_o, base_t=None, base_o=None) -> float:
    """Mean half squared output shift on ``D_t`` minus the same on ``D_o``."""
    D_t = np.atleast_2d(np.asarray(D_t, dtype=float))
    D_o = np.atleast_2d(np.asarray(D_o, dtype=float))
    base_t = model.predict_proba(D_t) if base_t is None else base_t
    base_o = model.predict_proba(D_o) if base_o is None else base_o
    _, Rt = _half_sq_residual(model, W, D_t, base_t)
    _, Ro = _half_sq_residual(model, W, D_o, base_o)
    return float(0.5 * np.mean(np.sum(Rt ** 2, axis=1)) - 0.5 * np.mean(np.sum(Ro ** 2, axis=1)))


def gradient_W(W, model, D_t, D_o, jacobian_model=None, base_t=None, base_o=None) -> np.ndarray:
    """Gradient of :func:`projection_objective` with respect to ``W``.

    ``model`` supplies outputs; ``jacobian_model`` (default ``model``)
    supplies the input Jacobian through ``prob_vjp``. Under black-box access
    the latter is a surrogate.
    """
    W = np.asarray(W, dtype=float)
    D_t = np.atleast_2d(np.asarray(D_t, dtype=float))
    D_o = np.atleast_2d(np.asarray(D_o, dtype=float))
    d = W.shape[0]
    if W.shape != (d, d) or D_t.shape[1] != d or D_o.shape[1] != d:
        raise DimensionMismatchError("W must be d x d and point sets must have dimension d")
    if len(D_t) == 0 or len(D_o) == 0:
        raise PreconditionError("both point sets must be non-empty")
    jac = model if jacobian_model is None else jacobian_model
    base_t = model.predict_proba(D_t) if base_t is None else base_t
    base_o = model.predict_proba(D_o) if base_o is None else base_o

    Yt, Rt = _half_sq_residual(model, W, D_t, base_t)
    Yo, Ro = _half_sq_residual(model, W, D_o, base_o)
    Ut = jac.prob_vjp(Yt, Rt)
    Uo = jac.prob_vjp(Yo, Ro)
    G = Ut.T @ D_t / len(D_t) - Uo.T @ D_o / len(D_o)
    if not np.all(np.isfinite(G)):
        raise NumericalError("projection gradient is not finite")
    return G


class _SingularityGuard:
    """Track the smallest singular value of W without an SVD per step.

    Weyl's inequality bounds the drop by ``|dW|_2 <= |dW|_F``; an exact SVD
    is only taken once that bound has eaten half the last exact value.
    """

    def __init__(self, W):
        self.exact = self.bound = self._svd_min(W)
        self.violations = []

    @staticmethod
    def _svd_min(W):
        return float(np.linalg.svd(W, compute_uv=False)[-1])

    def update(self, W, dW, step):
        self.bound -= float(np.linalg.norm(dW))
        if self.bound < 0.5 * self.exact:
            self.exact = self.bound = self._svd_min(W)
        if self.bound <= SINGULAR_TOL:
            self.violations.append({"step": step, "min_singular_value": self.exact})
            log.warning("W nearly singular at step %d (sigma_min=%.3g)", step, self.exact)


def optimize_W(W, model, D_t, D_o, lr: float, steps: int, jacobian_model=None,
               guard: Optional[_SingularityGuard] = None, step_offset: int = 0):
    """Run ``steps`` ascent updates with fixed labels; returns ``(W, objective_trace)``.

    The trace holds the objective before the first update and after each one.
    """
    D_t = np.atleast_2d(np.asarray(D_t, dtype=float))
    D_o = np.atleast_2d(np.asarray(D_o, dtype=float))
    base_t = model.predict_proba(D_t)
    base_o = model.predict_proba(D_o)
    W = np.array(W, dtype=float)
    trace = [projection_objective(W, model, D_t, D_o, base_t, base_o)]
    for s in range(steps):
        G = gradient_W(W, model, D_t, D_o, jacobian_model, base_t, base_o)
        dW = lr * G
        W = W + dW
        if guard is not None:
            guard.update(W, dW, step_offset + s)
        obj = projection_objective(W, model, D_t, D_o, base_t, base_o)
        if not np.isfinite(obj):
            raise DivergenceError(f"projection objective became non-finite at step {step_offset + s}")
        trace.append(obj)
    return W, trace


@dataclass
class MultiplicativeFit:
    W: np.ndarray
    labels: dict  # group_id -> Provenance
    scores: list  # final group scores, in group order
    threshold: ThresholdResult
    trace: list  # objective after each outer iteration
    inner_trace: list = field(default_factory=list)
    relabel_counts: list = field(default_factory=list)
    singular_violations: list = field(default_factory=list)
    stopped_early: Optional[str] = None

    @property
    def transform(self) -> ProjectionTransform:
        return ProjectionTransform(self.W)


def _group_scores(model, W, group_X, group_base, metric):
    return [float(np.mean(phi(np.atleast_2d(model.predict_proba(X @ W.T)), base, metric)))
            for X, base in zip(group_X, group_base)]


def fit_multiplicative(groups, model, cfg: MultiplicativeConfig = MultiplicativeConfig(),
                       metric=DifferentialMetric.L2, jacobian_model=None) -> MultiplicativeFit:
    """Alternate projection ascent and relabelling over audit groups.

    ``model`` is only queried for probabilities (a black-box handle is
    fine); ``jacobian_model`` must expose ``prob_vjp`` and defaults to
    ``model``. Given a :class:`ModelAccess`, the Jacobian source is resolved
    with :func:`gradient_source`.
    """
    metric = DifferentialMetric.parse(metric)
    if len(groups) < 2:
        raise PreconditionError("multiplicative fitting needs at least 2 groups")
    if isinstance(model, ModelAccess):
        if jacobian_model is None:
            jacobian_model, _ = gradient_source(model, np.vstack([g.features() for g in groups]))
        model = model.model
    jac = model if jacobian_model is None else jacobian_model
    if not hasattr(jac, "prob_vjp"):
        raise PreconditionError("a differentiable model or surrogate is required for the projection gradient")

    group_X = [g.features() for g in groups]
    group_base = [np.atleast_2d(model.predict_proba(X)) for X in group_X]
    d = group_X[0].shape[1]
    W = initial_W(d, cfg)
    guard = _SingularityGuard(W)

    scores = _group_scores(model, W, group_X, group_base, metric)
    thr = determine_threshold(scores)
    is_t = np.array(scores) > thr.tau

    trace, inner_trace, relabels = [], [], []
    stopped = None
    for it in range(cfg.max_outer_iters):
        if is_t.all() or not is_t.any():
            stopped = f"one side empty at outer iteration {it}"
            log.warning("multiplicative fit stopped: %s", stopped)
            break
        D_t = np.vstack([X for X, t in zip(group_X, is_t) if t])
        D_o = np.vstack([X for X, t in zip(group_X, is_t) if not t])
        W, inner = optimize_W(W, model, D_t, D_o, cfg.lr, cfg.inner_grad_steps, jac, guard,
                              step_offset=it * cfg.inner_grad_steps)
        inner_trace.append(inner)
        trace.append(inner[-1])

        scores = _group_scores(model, W, group_X, group_base, metric)
        if not np.all(np.isfinite(scores)):
            raise DivergenceError("differential scores became non-finite")
        thr = determine_threshold(scores)
        new_t = np.array(scores) > thr.tau
        relabels.append(int(np.sum(new_t != is_t)))
        is_t = new_t

    labels = {g.group_id: Provenance.from_bool(bool(t)) for g, t in zip(groups, is_t)}
    return MultiplicativeFit(W, labels, scores, thr, trace, inner_trace, relabels,
                             guard.violations, stopped)
