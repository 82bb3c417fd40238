"""One flat config describing a whole run: data, split, target model and audit.

Both the command line and the parameter sweeps go through
:func:`build_benchmark`, :func:`build_model` and :func:`build_method`, so a
sweep row can be replayed exactly from its echoed config.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..data_io.benchmark import AuditBenchmark, make_benchmark
from ..data_io.dataset import Dataset
from ..data_io.mnist import load_mnist
from ..data_io.synth import synth_2d, synth_blobs
from ..errors import PreconditionError, ValidationError
from ..models import FAMILIES, train_model
from ..models.access import ModelAccess
from .methods import AuditMethod, MethodKind
from .runner import run_audit

SOURCES = ("synth2d", "blobs", "mnist")


@dataclass(frozen=True)
class ExperimentConfig:
    source: str = "synth2d"
    n: int = 100
    dim: int = 2
    n_classes: int = 2
    classes: Optional[tuple] = None  # mnist digits; None picks them from the seed
    sigma: float = 0.5
    separation: float = 4.0
    ratio: float = 0.5
    group_size: int = 10
    family: str = "lssvm"
    hyper: dict = field(default_factory=dict)
    method: str = "add"
    epsilon: float = 0.5
    noise_sigma: float = 1.0
    mul: dict = field(default_factory=dict)
    access: str = "wb"
    metric: str = "l2"
    seed: int = 0

    def __post_init__(self):
        if self.source not in SOURCES:
            raise ValidationError(f"unknown source {self.source!r}; choose from {SOURCES}")
        if self.family not in FAMILIES:
            raise ValidationError(f"unknown model family {self.family!r}; choose from {FAMILIES}")
        MethodKind.parse(self.method)
        if self.classes is not None:
            object.__setattr__(self, "classes", tuple(int(c) for c in self.classes))

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["classes"] = None if self.classes is None else list(self.classes)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        return cls(**d)

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)


def _mnist_subset(cfg: ExperimentConfig) -> tuple:
    data = load_mnist()
    rng = np.random.default_rng([cfg.seed, 7])
    classes = cfg.classes
    if classes is None:
        classes = tuple(sorted(int(c) for c in rng.choice(data.classes, size=cfg.n_classes, replace=False)))
    per_class = cfg.n // len(classes)
    keep = []
    for c in classes:
        idx = np.flatnonzero(data.y == c)
        if len(idx) < per_class:
            raise PreconditionError(f"digit {c} has only {len(idx)} images, {per_class} requested")
        keep.append(idx[:per_class])
    return data.subset(np.sort(np.concatenate(keep))), list(classes)


def build_dataset(cfg: ExperimentConfig) -> tuple:
    """``(dataset, classes)`` for the configured source."""
    if cfg.source == "synth2d":
        if cfg.n_classes != 2 or cfg.dim != 2:
            raise PreconditionError("synth2d is two classes in two dimensions; use blobs otherwise")
        return synth_2d(cfg.n, sigma=cfg.sigma, seed=cfg.seed), [0, 1]
    if cfg.source == "blobs":
        data = synth_blobs(cfg.n, cfg.dim, cfg.n_classes, cfg.separation, cfg.sigma, cfg.seed)
        return data, list(range(cfg.n_classes))
    return _mnist_subset(cfg)


def build_benchmark(cfg: ExperimentConfig) -> AuditBenchmark:
    data, classes = build_dataset(cfg)
    return make_benchmark(data, classes=classes, ratio=cfg.ratio, group_size=cfg.group_size,
                          seed=cfg.seed, multiclass=len(classes) > 2, source=cfg.source)


def build_model(cfg: ExperimentConfig, train_set: Dataset, n_classes: int):
    return train_model(cfg.family, train_set.X, train_set.y, seed=cfg.seed, n_classes=n_classes,
                       **cfg.hyper)


def build_method(cfg: ExperimentConfig) -> AuditMethod:
    kind = MethodKind.parse(cfg.method)
    if kind is MethodKind.ADD:
        return AuditMethod.add(cfg.epsilon)
    if kind is MethodKind.RN:
        return AuditMethod.rn(sigma=cfg.noise_sigma, epsilon=cfg.epsilon)
    if kind is MethodKind.MUL:
        return AuditMethod.mul(**cfg.mul)
    return AuditMethod.cc()


def run_experiment(cfg: ExperimentConfig, jobs: int = 1):
    """Build, train and audit; returns ``(report, benchmark, model)``."""
    bench = build_benchmark(cfg)
    model = build_model(cfg, bench.train_set, len(bench.manifest.classes))
    access = ModelAccess(cfg.access, model)
    report = run_audit(list(bench.groups), access, build_method(cfg), cfg.metric, seed=cfg.seed, jobs=jobs)
    return report, bench, model
