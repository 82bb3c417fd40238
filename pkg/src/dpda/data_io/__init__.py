"""Dataset synthesis, ingestion, and benchmark construction."""

from .benchmark import (
    AuditBenchmark,
    DatasetManifest,
    benchmark_digest,
    check_benchmark,
    load_benchmark,
    make_benchmark,
    save_benchmark,
)
from .dataset import Dataset
from .idx import load_idx, read_idx_images, read_idx_labels, write_idx
from .mnist import MnistUnavailable, export_sample_idx, load_mnist
from .synth import synth_2d, synth_blobs
from .tabular import load_csv, minmax_scale, save_csv

__all__ = [
    "AuditBenchmark", "DatasetManifest", "benchmark_digest", "check_benchmark",
    "load_benchmark", "make_benchmark", "save_benchmark",
    "Dataset",
    "load_idx", "read_idx_images", "read_idx_labels", "write_idx",
    "MnistUnavailable", "export_sample_idx", "load_mnist",
    "synth_2d", "synth_blobs",
    "load_csv", "minmax_scale", "save_csv",
]
