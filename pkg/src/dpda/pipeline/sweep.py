from __future__ import annotations

import json

import numpy as np

from ..errors import PreconditionError, ValidationError
from ..models.access import ModelAccess
from ..models.mlp import resume_mlp, train_mlp
from .experiment import ExperimentConfig, build_benchmark, build_method, run_experiment
from .runner import point_significance, run_audit

AXES = ("classes", "data_size", "features", "epochs", "group_size")
_AXIS_FIELD = {"classes": "n_classes", "data_size": "n", "features": "dim", "group_size": "group_size"}


def epoch_sweep(bench, mlp_hyperparams: dict, epoch_checkpoints, method, seed: int = 0,
                metric="l2", access: str = "wb", jobs: int = 1) -> list:
    """Train an MLP incrementally and audit it at every checkpoint.

    Each row holds the epoch, training accuracy, the Welch test on
    per-point differentials (training versus non-training points) and the
    group-level AUC / F-measure. Resuming is bit-identical to training for
    the full number of epochs in one go.
    """
    checkpoints = [int(e) for e in epoch_checkpoints]
    if not checkpoints or checkpoints[0] < 1 or any(b <= a for a, b in zip(checkpoints, checkpoints[1:])):
        raise PreconditionError("checkpoints must be positive and strictly ascending")
    hyper = {k: v for k, v in dict(mlp_hyperparams).items() if k != "epochs"}
    X, y = bench.train_set.X, bench.train_set.y
    n_classes = len(bench.manifest.classes)
    groups = list(bench.groups)

    rows = []
    model, done = None, 0
    for epoch in checkpoints:
        if model is None:
            model = train_mlp(X, y, epochs=epoch, seed=seed, n_classes=n_classes, **hyper)
        else:
            model = resume_mlp(model, X, y, epoch - done)
        done = epoch
        report = run_audit(groups, ModelAccess(access, model), method, metric, seed=seed, jobs=jobs)
        try:
            sig = point_significance(report)
        except PreconditionError:
            sig = {"t": None, "p": None}
        rows.append({
            "epoch": epoch,
            "train_acc": float(np.mean(model.predict(X) == y)),
            "t_statistic": sig["t"],
            "p_value": sig["p"],
            "auc": report.metrics["auc"],
            "f_measure": report.metrics["f_measure"],
        })
    return rows


def run_setting(cfg: ExperimentConfig, jobs: int = 1) -> dict:
    """Metrics for one configuration (what a sweep row records)."""
    report, _, _ = run_experiment(cfg, jobs=jobs)
    m = report.metrics
    return {"auc": m["auc"], "f_measure": m["f_measure"], "precision": m["precision"],
            "recall": m["recall"], "threshold": report.threshold}


def parameter_sweep(axis: str, values, base: ExperimentConfig, jobs: int = 1) -> list:
    """One row per value of ``axis`` with the other settings fixed to ``base``.

    Each row carries the full config as JSON under ``config`` so it can be
    replayed with :func:`replay_row`. The ``epochs`` axis requires the MLP
    family and delegates to :func:`epoch_sweep`.
    """
    if axis not in AXES:
        raise ValidationError(f"unknown sweep axis {axis!r}; choose from {AXES}")
    values = [int(v) for v in values]
    if not values:
        raise PreconditionError("empty sweep range")
    rows = []
    if axis == "epochs":
        if base.family != "mlp":
            raise PreconditionError("the epochs axis needs family=mlp")
        bench = build_benchmark(base)
        traj = epoch_sweep(bench, base.hyper, sorted(values), build_method(base), base.seed,
                           base.metric, base.access, jobs)
        for r in traj:
            cfg = base.replace(hyper={**base.hyper, "epochs": r["epoch"]})
            rows.append({"axis": axis, "value": r["epoch"], **{k: r[k] for k in ("auc", "f_measure")},
                         "train_acc": r["train_acc"], "p_value": r["p_value"],
                         "config": json.dumps(cfg.to_dict(), sort_keys=True)})
        return rows
    for v in values:
        cfg = base.replace(**{_AXIS_FIELD[axis]: v})
        rows.append({"axis": axis, "value": v, **run_setting(cfg, jobs),
                     "config": json.dumps(cfg.to_dict(), sort_keys=True)})
    return rows


def replay_row(row: dict, jobs: int = 1) -> dict:
    return run_setting(ExperimentConfig.from_dict(json.loads(row["config"])), jobs)
