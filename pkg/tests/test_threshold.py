import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dpda.audit import determine_threshold
from dpda.errors import PreconditionError


def brute_threshold(scores):
    """Literal loop: every admissible split, population std, same tie rule."""
    q = sorted(scores, reverse=True)
    m = len(q)
    ratings = {}
    for i in range(2, m - 1):
        left, right = q[:i], q[i:]
        ratings[i] = abs(float(np.std(left)) - float(np.std(right)))
    best = min(ratings.values())
    tol = 1e-12 * max(1.0, abs(best))
    ties = [i for i, v in ratings.items() if v - best <= tol]
    i = min(ties, key=lambda k: (abs(k - m // 2), k))
    return i, (q[i - 1] + q[i]) / 2


def test_two_plateaus():
    res = determine_threshold([5, 5, 5, 1, 1, 1])
    assert res.split_index == 3
    assert res.tau == 3.0
    assert min(res.curve) == 0.0


def test_all_equal_takes_middle_split():
    res = determine_threshold([0.7] * 9)
    assert all(v == 0.0 for v in res.curve)
    assert res.split_index == 4
    assert res.tau == 0.7


def test_two_gaussian_clusters():
    rng = np.random.default_rng(0)
    scores = np.concatenate([rng.normal(1.0, 0.05, 50), rng.normal(0.2, 0.05, 50)])
    res = determine_threshold(rng.permutation(scores))
    assert 45 <= res.split_index <= 55


def test_matches_brute_force_on_random_lists():
    rng = np.random.default_rng(17)
    for _ in range(1000):
        m = int(rng.integers(4, 40))
        kind = rng.integers(3)
        if kind == 0:
            s = rng.normal(size=m)
        elif kind == 1:
            s = rng.integers(0, 4, size=m).astype(float)  # heavy ties
        else:
            s = np.concatenate([rng.normal(1, 0.1, m // 2), rng.normal(0, 0.1, m - m // 2)])
        res = determine_threshold(s)
        i, tau = brute_threshold(list(s))
        assert res.split_index == i
        assert res.tau == tau


def test_needs_four_scores():
    with pytest.raises(PreconditionError):
        determine_threshold([1.0, 2.0, 3.0])


def test_rejects_non_finite():
    with pytest.raises(PreconditionError):
        determine_threshold([1.0, 2.0, np.nan, 3.0])


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(0, 10, allow_nan=False), min_size=4, max_size=60))
def test_partition_consistent_with_strict_rule(scores):
    res = determine_threshold(scores)
    above = sum(s > res.tau for s in scores)
    q = sorted(scores, reverse=True)
    # ties straddling the split may all fall below tau, never above
    assert above <= res.split_index
    assert all(s <= res.tau for s in q[res.split_index:])
    assert len(res.curve) == len(scores) - 3
