"""Forest of completely-random trees.

Each internal node picks a feature uniformly among those that still vary
at the node and a split point uniformly inside that feature's observed
range; no impurity criterion is consulted. Leaves keep raw class counts
and prediction applies Laplace smoothing (+1 per class).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..datamodel import ensure_dataset_arrays
from ..errors import PreconditionError
from ._common import as_batch, infer_n_classes


@dataclass(frozen=True, eq=False)
class CrtTree:
    feature: np.ndarray  # -1 marks a leaf
    split: np.ndarray
    left: np.ndarray
    right: np.ndarray
    counts: np.ndarray  # (nodes, c); non-zero rows only at leaves

    @property
    def n_nodes(self) -> int:
        return self.feature.shape[0]

    def is_leaf(self) -> np.ndarray:
        return self.feature < 0

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Leaf index reached by every row of ``X``."""
        node = np.zeros(len(X), dtype=int)
        rows = np.arange(len(X))
        while True:
            f = self.feature[node]
            active = f >= 0
            if not active.any():
                return node
            idx = rows[active]
            nd = node[active]
            go_left = X[idx, f[active]] <= self.split[nd]
            node[idx] = np.where(go_left, self.left[nd], self.right[nd])

    def leaf_distribution(self, X) -> np.ndarray:
        """Unsmoothed class frequencies at the reached leaves."""
        counts = self.counts[self.apply(np.asarray(X, dtype=float))]
        return counts / counts.sum(axis=1, keepdims=True)

    def to_dict(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "split": self.split.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "counts": self.counts.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CrtTree":
        return cls(
            np.array(d["feature"], dtype=int),
            np.array(d["split"], dtype=float),
            np.array(d["left"], dtype=int),
            np.array(d["right"], dtype=int),
            np.array(d["counts"], dtype=float).reshape(len(d["feature"]), -1),
        )


@dataclass(frozen=True, eq=False)
class CrtForestModel:
    trees: tuple
    n_features: int
    n_classes: int
    max_depth: int
    seed: int
    train_meta: dict = field(default_factory=dict)

    family = "forest"

    @property
    def n_trees(self) -> int:
        return len(self.trees)

    def predict_proba(self, X) -> np.ndarray:
        X, single = as_batch(X, self.n_features)
        P = np.zeros((len(X), self.n_classes))
        for tree in self.trees:
            counts = tree.counts[tree.apply(X)]
            P += (counts + 1.0) / (counts.sum(axis=1, keepdims=True) + self.n_classes)
        P /= len(self.trees)
        return P[0] if single else P

    def predict(self, X) -> np.ndarray:
        return np.atleast_2d(self.predict_proba(X)).argmax(axis=1)

    def to_params(self) -> dict:
        return {"n_trees": self.n_trees, "max_depth": self.max_depth,
                "trees": [t.to_dict() for t in self.trees]}

    @classmethod
    def from_params(cls, params, n_features, n_classes, seed, train_meta=None):
        trees = tuple(CrtTree.from_dict(t) for t in params["trees"])
        return cls(trees, n_features, n_classes, int(params["max_depth"]), seed, dict(train_meta or {}))


def _grow(X, y, c, max_depth, rng) -> CrtTree:
    feature, split, left, right, counts = [], [], [], [], []

    def new_node():
        feature.append(-1)
        split.append(0.0)
        left.append(-1)
        right.append(-1)
        counts.append(np.zeros(c))
        return len(feature) - 1

    root = new_node()
    stack = [(root, np.arange(len(X)), 0)]
    while stack:
        node, idx, depth = stack.pop()
        labels = y[idx]
        lo = X[idx].min(axis=0)
        hi = X[idx].max(axis=0)
        varying = np.flatnonzero(hi > lo)
        if depth >= max_depth or np.all(labels == labels[0]) or varying.size == 0:
            counts[node] = np.bincount(labels, minlength=c).astype(float)
            continue
        f = int(varying[rng.integers(varying.size)])
        s = float(rng.uniform(lo[f], hi[f]))
        mask = X[idx, f] <= s
        feature[node] = f
        split[node] = s
        left[node] = new_node()
        right[node] = new_node()
        stack.append((right[node], idx[~mask], depth + 1))
        stack.append((left[node], idx[mask], depth + 1))

    return CrtTree(
        np.array(feature, dtype=int),
        np.array(split, dtype=float),
        np.array(left, dtype=int),
        np.array(right, dtype=int),
        np.array(counts, dtype=float),
    )


def train_crt_forest(X, y, n_trees: int = 50, max_depth: int = 10, seed: int = 0,
                     n_classes=None) -> CrtForestModel:
    if n_trees < 1:
        raise PreconditionError("n_trees must be >= 1")
    if max_depth < 1:
        raise PreconditionError("max_depth must be >= 1")
    X, y = ensure_dataset_arrays(X, y)
    if len(X) == 0:
        raise PreconditionError("cannot grow trees on an empty dataset")
    c = infer_n_classes(y, n_classes)
    streams = np.random.SeedSequence(seed).spawn(n_trees)
    trees = tuple(_grow(X, y, c, max_depth, np.random.default_rng(s)) for s in streams)
    model = CrtForestModel(trees, X.shape[1], c, max_depth, int(seed))
    meta = {"train_accuracy": float(np.mean(model.predict(X) == y)), "n_train": len(X)}
    object.__setattr__(model, "train_meta", meta)
    return model
