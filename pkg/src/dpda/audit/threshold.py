"""Split a list of differential scores into a high and a low group.

Scores are sorted in descending order and every split position ``i`` (the
top ``i`` scores versus the remaining ``m - i``, both sides holding at least
two scores) is rated by the absolute difference of the two population
standard deviations. The best split minimises that difference.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import PreconditionError

TIE_TOL = 1e-12


@dataclass(frozen=True)
class ThresholdResult:
    tau: float
    split_index: int  # number of scores on the high side
    curve: tuple  # curve[k] is the rating of split ``k + 2``

    @property
    def split_indices(self) -> range:
        return range(2, 2 + len(self.curve))

    def curve_rows(self) -> list:
        return list(zip(self.split_indices, self.curve))


def split_curve(scores) -> np.ndarray:
    q = np.sort(np.asarray(scores, dtype=float))[::-1]
    m = len(q)
    # std is shift invariant; shifting first makes constant runs exactly 0
    return np.array([abs(np.std(q[:i] - q[0]) - np.std(q[i:] - q[i])) for i in range(2, m - 1)])


def pick_split(curve, m: int) -> int:
    """Smallest rating wins; near-ties go to the split closest to ``m // 2``, then the lower index."""
    curve = np.asarray(curve)
    best = curve.min()
    tol = TIE_TOL * max(1.0, abs(best))
    candidates = [i for i, v in zip(range(2, m - 1), curve) if v - best <= tol]
    return min(candidates, key=lambda i: (abs(i - m // 2), i))


def determine_threshold(scores) -> ThresholdResult:
    scores = np.asarray(scores, dtype=float)
    m = scores.size
    if m < 4:
        raise PreconditionError(f"threshold selection needs at least 4 scores, got {m}")
    if not np.all(np.isfinite(scores)):
        raise PreconditionError("scores must be finite")
    q = np.sort(scores)[::-1]
    curve = split_curve(q)
    i = pick_split(curve, m)
    # midpoint keeps the strict ">" rule consistent with the chosen partition
    tau = 0.5 * (q[i - 1] + q[i])
    return ThresholdResult(float(tau), int(i), tuple(float(v) for v in curve))
