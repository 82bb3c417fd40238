"""Audit orchestration, baselines, evaluation and significance testing."""

from .experiment import (
    ExperimentConfig,
    build_benchmark,
    build_dataset,
    build_method,
    build_model,
    run_experiment,
)
from .methods import AuditMethod, ConfidenceConfig, MethodKind
from .metrics import MetricsBundle, data_similarity, evaluate, f_measure, rank_auc
from .runner import (
    ResolvedAudit,
    group_score,
    point_significance,
    point_values,
    resolve_method,
    run_audit,
)
from .stats import betainc_reg, differential_significance, t_two_sided_p, welch_t_test
from .sweep import AXES, epoch_sweep, parameter_sweep, replay_row, run_setting

__all__ = [
    "ExperimentConfig", "build_benchmark", "build_dataset", "build_method", "build_model",
    "run_experiment",
    "AuditMethod", "ConfidenceConfig", "MethodKind",
    "MetricsBundle", "data_similarity", "evaluate", "f_measure", "rank_auc",
    "ResolvedAudit", "group_score", "point_significance", "point_values", "resolve_method", "run_audit",
    "betainc_reg", "differential_significance", "t_two_sided_p", "welch_t_test",
    "AXES", "epoch_sweep", "parameter_sweep", "replay_row", "run_setting",
]
