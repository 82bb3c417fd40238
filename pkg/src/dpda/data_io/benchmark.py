"""Turning a labeled dataset into an audit benchmark.

The selected classes are shuffled, split into a training side (fed to the
target model) and a held-out side, and each side is cut into groups of at
most ``group_size`` points. A group therefore never mixes the two sides.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from ..datamodel import DataGroup, Provenance, validate_group
from ..errors import DataFormatError, PreconditionError, ValidationError
from .dataset import Dataset
from .tabular import feature_header, fmt_float, load_csv, save_csv


@dataclass(frozen=True)
class DatasetManifest:
    source: str
    dim: int
    classes: list  # original class ids, in remapped order
    counts: dict  # remapped class -> points kept
    seed: int
    split_ratio: float
    group_size: int
    n_train: int
    n_groups: int
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["counts"] = {str(k): v for k, v in self.counts.items()}
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "DatasetManifest":
        d = dict(d)
        d["counts"] = {int(k): int(v) for k, v in d["counts"].items()}
        return cls(**d)


@dataclass(frozen=True, eq=False)
class AuditBenchmark:
    train_set: Dataset
    groups: tuple
    manifest: DatasetManifest
    train_index: np.ndarray  # rows of the filtered pool that went to training
    group_index: tuple  # per group, rows of the filtered pool

    @property
    def truth(self) -> list:
        return [g.truth for g in self.groups]

    def groups_with(self, truth: Provenance) -> list:
        return [g for g in self.groups if g.truth is truth]


def check_benchmark(bench: AuditBenchmark) -> None:
    """Exhaustive membership check of the benchmark invariants (by pool index)."""
    train = set(int(i) for i in bench.train_index)
    if len(train) != len(bench.train_index):
        raise ValidationError("duplicate rows in the training index")
    seen = set()
    for g, idx in zip(bench.groups, bench.group_index):
        members = set(int(i) for i in idx)
        if seen & members:
            raise ValidationError(f"group {g.group_id} shares points with another group")
        seen |= members
        if g.truth is Provenance.TRAINING and not members <= train:
            raise ValidationError(f"training group {g.group_id} has points outside the training set")
        if g.truth is Provenance.NON_TRAINING and members & train:
            raise ValidationError(f"non-training group {g.group_id} overlaps the training set")
    recorded = sum(bench.manifest.counts.values())
    if recorded != len(seen):
        raise ValidationError(f"manifest counts {recorded} points but groups hold {len(seen)}")


def _chunks(index: np.ndarray, size: int):
    return [index[i:i + size] for i in range(0, len(index), size)]


def make_benchmark(data: Dataset, classes: Optional[Sequence[int]] = None, ratio: float = 0.5,
                   group_size: int = 10, seed: int = 0, multiclass: bool = False,
                   source: str = "unknown") -> AuditBenchmark:
    """Build a benchmark from ``data``.

    ``classes=None`` picks two classes at random. More than two classes
    requires ``multiclass=True``. Labels are remapped to ``0..k-1`` in the
    order of ``classes``. The last group on each side may be smaller than
    ``group_size``.
    """
    if group_size < 1:
        raise PreconditionError("group_size must be >= 1")
    if not 0.0 < ratio < 1.0:
        raise PreconditionError("ratio must lie strictly between 0 and 1")
    rng = np.random.default_rng(seed)
    present = data.classes
    if classes is None:
        classes = sorted(int(c) for c in rng.choice(present, size=2, replace=False))
    classes = [int(c) for c in classes]
    if len(set(classes)) != len(classes) or len(classes) < 2:
        raise PreconditionError("need at least two distinct classes")
    if len(classes) > 2 and not multiclass:
        raise PreconditionError("more than two classes requires multiclass=True")
    absent = [c for c in classes if c not in present]
    if absent:
        raise PreconditionError(f"classes {absent} are absent from the data")

    keep = np.flatnonzero(np.isin(data.y, classes))
    remap = {c: k for k, c in enumerate(classes)}
    X = data.X[keep]
    y = np.array([remap[int(v)] for v in data.y[keep]], dtype=int)
    n = len(X)
    n_train = int(round(ratio * n))
    if n_train < 1 or n_train > n - 1:
        raise PreconditionError(f"{n} points cannot be split at ratio {ratio}")

    order = rng.permutation(n)
    train_idx = np.sort(order[:n_train])
    other_idx = np.sort(order[n_train:])
    # shuffle within each side so consecutive groups do not follow class order
    train_idx = train_idx[rng.permutation(len(train_idx))]
    other_idx = other_idx[rng.permutation(len(other_idx))]

    raw = [(c, Provenance.TRAINING) for c in _chunks(train_idx, group_size)]
    raw += [(c, Provenance.NON_TRAINING) for c in _chunks(other_idx, group_size)]
    raw = [raw[i] for i in rng.permutation(len(raw))]
    width = max(4, len(str(len(raw) - 1)))
    groups, group_index = [], []
    for k, (idx, truth) in enumerate(raw):
        g = DataGroup.from_array(f"g{k:0{width}d}", X[idx], y[idx], truth)
        groups.append(validate_group(g))
        group_index.append(np.asarray(idx, dtype=int))

    manifest = DatasetManifest(
        source=source, dim=int(X.shape[1]), classes=classes,
        counts={k: int(np.sum(y == k)) for k in range(len(classes))},
        seed=int(seed), split_ratio=float(ratio), group_size=int(group_size),
        n_train=n_train, n_groups=len(groups),
    )
    bench = AuditBenchmark(Dataset(X[train_idx], y[train_idx]), tuple(groups), manifest,
                           train_idx, tuple(group_index))
    check_benchmark(bench)
    return bench


def save_benchmark(bench: AuditBenchmark, directory) -> Path:
    """Write ``manifest.json``, ``train.csv``, ``groups.csv`` and ``index.json``."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    (d / "manifest.json").write_text(json.dumps(bench.manifest.to_dict(), indent=2, sort_keys=True) + "\n")
    save_csv(bench.train_set, d / "train.csv")
    dim = bench.manifest.dim
    with (d / "groups.csv").open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["group_id", "truth"] + feature_header(dim) + ["label"])
        for g in bench.groups:
            truth = g.truth.value if g.truth is not None else ""
            for p in g.points:
                w.writerow([g.group_id, truth] + [fmt_float(v) for v in p.features] + [p.label])
    index = {
        "train": [int(i) for i in bench.train_index],
        "groups": {g.group_id: [int(i) for i in idx] for g, idx in zip(bench.groups, bench.group_index)},
    }
    (d / "index.json").write_text(json.dumps(index, sort_keys=True) + "\n")
    return d


def load_benchmark(directory) -> AuditBenchmark:
    d = Path(directory)
    try:
        manifest = DatasetManifest.from_dict(json.loads((d / "manifest.json").read_text()))
        index = json.loads((d / "index.json").read_text())
    except (OSError, json.JSONDecodeError, TypeError, KeyError) as exc:
        raise DataFormatError(f"{d}: unreadable benchmark metadata ({exc})") from exc
    train = load_csv(d / "train.csv")
    rows: dict = {}
    order: list = []
    with (d / "groups.csv").open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        nfeat = len(header) - 3
        if nfeat != manifest.dim:
            raise DataFormatError(f"{d}/groups.csv has {nfeat} features, manifest says {manifest.dim}")
        for rowno, row in enumerate(reader, start=1):
            gid, truth = row[0], row[1]
            try:
                feats = [float(v) for v in row[2:2 + nfeat]]
                label = int(row[-1]) if row[-1] != "" else None
            except ValueError:
                raise DataFormatError(f"{d}/groups.csv: non-numeric value in row {rowno}", rowno) from None
            if gid not in rows:
                rows[gid] = (truth, [], [])
                order.append(gid)
            rows[gid][1].append(feats)
            rows[gid][2].append(label)
    groups = tuple(
        validate_group(DataGroup.from_array(gid, np.array(rows[gid][1]), rows[gid][2],
                                            Provenance(rows[gid][0]) if rows[gid][0] else None))
        for gid in order
    )
    group_index = tuple(np.array(index["groups"][gid], dtype=int) for gid in order)
    bench = AuditBenchmark(train, groups, manifest, np.array(index["train"], dtype=int), group_index)
    check_benchmark(bench)
    return bench


def benchmark_digest(bench: AuditBenchmark) -> str:
    """SHA-256 over the serialized benchmark content."""
    h = hashlib.sha256()
    h.update(json.dumps(bench.manifest.to_dict(), sort_keys=True).encode())
    h.update(np.ascontiguousarray(bench.train_set.X).tobytes())
    h.update(np.ascontiguousarray(bench.train_set.y).tobytes())
    for g, idx in zip(bench.groups, bench.group_index):
        h.update(g.group_id.encode())
        h.update((g.truth.value if g.truth else "").encode())
        h.update(np.ascontiguousarray(g.features()).tobytes())
        h.update(np.ascontiguousarray(idx).tobytes())
    return h.hexdigest()
