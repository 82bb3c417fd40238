from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.spatial.distance import cdist
from scipy.stats import rankdata

from ..datamodel import Provenance
from ..errors import PreconditionError, ValidationError


@dataclass(frozen=True)
class MetricsBundle:
    precision: float
    recall: float
    f_measure: float
    auc: Optional[float]
    tp: int
    fp: int
    fn: int
    tn: int

    def to_dict(self) -> dict:
        return asdict(self)


def f_measure(precision: float, recall: float) -> float:
    s = precision + recall
    return 2.0 * precision * recall / s if s > 0 else 0.0


def rank_auc(scores, positive) -> Optional[float]:
    """Mann-Whitney AUC with tied scores counted as one half; ``None`` if a class is empty."""
    scores = np.asarray(scores, dtype=float)
    positive = np.asarray(positive, dtype=bool)
    n_pos = int(positive.sum())
    n_neg = positive.size - n_pos
    if n_pos == 0 or n_neg == 0:
        return None
    ranks = rankdata(scores)  # average ranks for ties
    u = ranks[positive].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def evaluate(verdicts: Sequence, scores: Sequence, truth: Sequence) -> MetricsBundle:
    """Group-level precision, recall, F-measure and AUC with "training" as the positive class.

    ``scores`` may be floats or :class:`DifferentialScore` objects; ``truth``
    holds one provenance flag per verdict.
    """
    if len(verdicts) != len(truth) or len(scores) != len(truth):
        raise ValidationError("verdicts, scores and truth must align")
    if any(t is None for t in truth):
        raise PreconditionError("every group needs a ground-truth flag for evaluation")
    actual = np.array([Provenance(t) is Provenance.TRAINING for t in truth])
    decided = np.array([v.decided is Provenance.TRAINING for v in verdicts])
    values = [getattr(s, "value", s) for s in scores]

    tp = int(np.sum(decided & actual))
    fp = int(np.sum(decided & ~actual))
    fn = int(np.sum(~decided & actual))
    tn = int(np.sum(~decided & ~actual))
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    return MetricsBundle(precision, recall, f_measure(precision, recall),
                         rank_auc(values, actual), tp, fp, fn, tn)


def data_similarity(train_points, nontrain_points) -> float:
    """Average Euclidean distance over all (training, non-training) pairs."""
    A = np.atleast_2d(np.asarray(train_points, dtype=float))
    B = np.atleast_2d(np.asarray(nontrain_points, dtype=float))
    if A.size == 0 or B.size == 0:
        raise PreconditionError("both point sets must be non-empty")
    return float(cdist(A, B).mean())
