"""Scoring audit groups and turning the scores into verdicts."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

from ..audit.differential import DifferentialMetric, phi
from ..audit.multiplicative import fit_multiplicative
from ..audit.surrogate import gradient_source
from ..audit.threshold import determine_threshold
from ..audit.transforms import AdditiveConfig, ProjectionTransform, audit_function_apply
from ..datamodel import AuditReport, AuditVerdict, DifferentialScore, Provenance, groups_dim, validate_group
from ..errors import PreconditionError
from ..models.access import ModelAccess
from .methods import AuditMethod, MethodKind
from .metrics import evaluate
from .stats import differential_significance

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ResolvedAudit:
    """An audit method made ready to score points.

    ``transform`` is an :class:`AdditiveConfig` (with ``gradient_model`` for
    gradient-sign offsets), a fitted :class:`ProjectionTransform`, or
    ``None`` for the confidence baseline.
    """

    kind: MethodKind
    transform: Any = None
    gradient_model: Any = None
    info: dict = field(default_factory=dict)

    def apply(self, X, rng: Optional[np.random.Generator] = None) -> np.ndarray:
        cfg = self.transform
        if isinstance(cfg, AdditiveConfig) and cfg.epsilon != 0 and cfg.eta_source == "gradient_sign":
            return audit_function_apply(X, cfg, self.gradient_model.input_gradient(X))
        if isinstance(cfg, AdditiveConfig) and cfg.eta_source == "gaussian_noise":
            return audit_function_apply(X, cfg, rng)
        return audit_function_apply(X, cfg)


def _has_gradient(model) -> bool:
    return hasattr(model, "input_gradient") and hasattr(model, "prob_vjp")


def resolve_method(method: AuditMethod, access: ModelAccess, groups, metric=DifferentialMetric.L2,
                   surrogate_C: float = 1.0) -> ResolvedAudit:
    """Fit whatever the method needs (surrogate, projection) on the audit points."""
    kind = method.kind
    cfg = method.config
    if kind is MethodKind.CC:
        return ResolvedAudit(kind)
    if kind is MethodKind.RN or (kind is MethodKind.ADD and cfg.epsilon == 0):
        return ResolvedAudit(kind, cfg)
    X = np.vstack([g.features() for g in groups])
    if kind is MethodKind.ADD:
        if access.is_white_box and not _has_gradient(access.model):
            log.warning("%s has no input gradient; falling back to Gaussian offsets",
                        type(access.model).__name__)
            fallback = AdditiveConfig(epsilon=cfg.epsilon, eta_source="gaussian_noise", sigma=cfg.sigma)
            return ResolvedAudit(kind, fallback, info={"eta_fallback": "gaussian_noise"})
        grad_model, surrogate = gradient_source(access, X, C=surrogate_C)
        info = {} if surrogate is None else {"surrogate_fidelity": surrogate.fidelity}
        return ResolvedAudit(kind, cfg, grad_model, info)
    # multiplicative
    jac, surrogate = gradient_source(access, X, C=surrogate_C)
    fit = fit_multiplicative(groups, access.model, cfg, metric, jacobian_model=jac)
    info = {
        "objective_trace": [float(v) for v in fit.trace],
        "relabel_counts": list(fit.relabel_counts),
        "stopped_early": fit.stopped_early,
        "singular_violations": len(fit.singular_violations),
        "_W": fit.W,
    }
    if surrogate is not None:
        info["surrogate_fidelity"] = surrogate.fidelity
    return ResolvedAudit(kind, ProjectionTransform(fit.W), jac, info)


def point_values(X, access: ModelAccess, resolved: ResolvedAudit, metric=DifferentialMetric.L2,
                 rng: Optional[np.random.Generator] = None) -> np.ndarray:
    """Per-point differential ``phi(M(A(x)), M(x))``, or max-class confidence for CC."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    base = np.atleast_2d(access.predict_proba(X))
    if resolved.kind is MethodKind.CC:
        return base.max(axis=1)
    audited = np.atleast_2d(access.predict_proba(resolved.apply(X, rng)))
    return np.atleast_1d(phi(audited, base, DifferentialMetric.parse(metric)))


def group_score(group, access: ModelAccess, resolved: ResolvedAudit, metric=DifferentialMetric.L2,
                rng: Optional[np.random.Generator] = None) -> DifferentialScore:
    vals = point_values(group.features(), access, resolved, metric, rng)
    return DifferentialScore(group.group_id, float(np.mean(vals)))


def _score_all(groups, access, resolved, metric, seed, jobs):
    def one(i):
        rng = np.random.default_rng([seed, i])
        vals = point_values(groups[i].features(), access, resolved, metric, rng)
        return vals

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            per_point = list(pool.map(one, range(len(groups))))  # map preserves index order
    else:
        per_point = [one(i) for i in range(len(groups))]
    scores = [DifferentialScore(g.group_id, float(np.mean(v))) for g, v in zip(groups, per_point)]
    return scores, per_point


def run_audit(groups, access: ModelAccess, method: AuditMethod, metric=DifferentialMetric.L2,
              seed: int = 0, jobs: int = 1, surrogate_C: float = 1.0,
              echo: Optional[dict] = None) -> AuditReport:
    """Score every group, pick the threshold and emit one verdict per group.

    Group ``i`` draws its Gaussian offsets from ``default_rng([seed, i])``,
    so the report does not depend on ``jobs``. When every group carries a
    truth flag the report also holds metrics and a Welch test of group
    scores (training versus non-training).

    Keys of ``report.extras`` starting with ``_`` hold in-memory objects
    (per-point values, the fitted projection) and are not serialized.
    """
    groups = [validate_group(g) for g in groups]
    if len(groups) < 4:
        raise PreconditionError(f"run_audit needs at least 4 groups, got {len(groups)}")
    groups_dim(groups)
    metric = DifferentialMetric.parse(metric)
    if jobs < 1:
        raise PreconditionError("jobs must be >= 1")

    resolved = resolve_method(method, access, groups, metric, surrogate_C)
    scores, per_point = _score_all(groups, access, resolved, metric, seed, jobs)
    thr = determine_threshold([s.value for s in scores])
    verdicts = [AuditVerdict.from_score(s, thr.tau) for s in scores]

    truth = [g.truth for g in groups]
    metrics = significance = None
    if all(t is not None for t in truth):
        metrics = evaluate(verdicts, scores, truth).to_dict()
        tr = [s.value for s, t in zip(scores, truth) if t is Provenance.TRAINING]
        nt = [s.value for s, t in zip(scores, truth) if t is Provenance.NON_TRAINING]
        try:
            significance = differential_significance(tr, nt)
        except PreconditionError as exc:
            log.info("no significance test: %s", exc)

    config_echo = {
        "method": method.kind.value,
        "metric": metric.value,
        "access": access.mode.value,
        "seed": int(seed),
        "method_config": method.echo()["config"],
        "surrogate_C": surrogate_C,
        "n_groups": len(groups),
    }
    if echo:
        config_echo["run"] = dict(echo)
    extras = {k: v for k, v in resolved.info.items()}
    extras["split_index"] = thr.split_index
    extras["_point_values"] = per_point
    extras["_truth"] = truth
    return AuditReport(tuple(verdicts), thr.tau, int(seed), config_echo, metrics, significance,
                       tuple(thr.curve_rows()), extras)


def point_significance(report: AuditReport, per_class_labels=None) -> dict:
    """Welch test on per-point values of training versus non-training groups.

    With ``per_class_labels`` (one label array per group) the test is run
    within each class and the result holds a ``per_class`` list as well;
    the top-level ``t``/``p`` stay pooled.
    """
    pv = report.extras["_point_values"]
    truth = report.extras["_truth"]
    if any(t is None for t in truth):
        raise PreconditionError("every group needs a truth flag")
    is_t = np.concatenate([np.full(len(v), t is Provenance.TRAINING) for v, t in zip(pv, truth)])
    vals = np.concatenate(pv)
    out = dict(differential_significance(vals[is_t], vals[~is_t]))
    if per_class_labels is not None:
        labels = np.concatenate([np.asarray(lab) for lab in per_class_labels])
        rows = []
        for c in np.unique(labels):
            m = labels == c
            try:
                rows.append({"class": int(c), **differential_significance(vals[m & is_t], vals[m & ~is_t])})
            except PreconditionError as exc:
                log.info("class %s skipped: %s", c, exc)
        out["per_class"] = rows
    return out
