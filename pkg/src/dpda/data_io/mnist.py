"""Locating an MNIST sample without network access.

Resolution order:

1. ``$DPDA_MNIST_DIR`` holding ``train-images-idx3-ubyte`` and
   ``train-labels-idx1-ubyte`` (optionally ``.gz``).
2. The 5000-image sample (500 per digit) bundled with ``mlxtend``
   (``pip install 'dpda[mnist]'``).
"""

from __future__ import annotations

import gzip
import os
from pathlib import Path
from typing import Optional

import numpy as np

from ..errors import DataFormatError
from .dataset import Dataset
from .idx import load_idx, write_idx

IMAGE_NAMES = ("train-images-idx3-ubyte", "train-images-idx3-ubyte.gz")
LABEL_NAMES = ("train-labels-idx1-ubyte", "train-labels-idx1-ubyte.gz")


class MnistUnavailable(DataFormatError):
    pass


def _find(directory: Path, names):
    for name in names:
        p = directory / name
        if p.exists():
            return p
    return None


def _bundled_sample_raw():
    try:
        from importlib.resources import files

        resource = files("mlxtend.data").joinpath("data/mnist_5k.csv.gz")
    except ModuleNotFoundError as exc:
        raise MnistUnavailable(
            "no MNIST source: set DPDA_MNIST_DIR to a directory of IDX files or install mlxtend"
        ) from exc
    with resource.open("rb") as fh:
        table = np.loadtxt(gzip.open(fh), delimiter=",", dtype=np.int64)
    return table[:, :-1], table[:, -1].astype(int)


def load_mnist(limit: Optional[int] = None, directory=None) -> Dataset:
    """MNIST images in ``[0, 1]`` with ``d = 784``."""
    directory = directory or os.environ.get("DPDA_MNIST_DIR")
    if directory:
        d = Path(directory)
        images, labels = _find(d, IMAGE_NAMES), _find(d, LABEL_NAMES)
        if images is None or labels is None:
            raise MnistUnavailable(f"{d}: IDX training files not found")
        return load_idx(images, labels, limit)
    pixels, labels = _bundled_sample_raw()
    if limit is not None:
        pixels, labels = pixels[:limit], labels[:limit]
    return Dataset(pixels.astype(float) / 255.0, labels)


def export_sample_idx(directory, compress: bool = False) -> tuple:
    """Write the bundled sample as IDX files; returns ``(images_path, labels_path)``."""
    pixels, labels = _bundled_sample_raw()
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    suffix = ".gz" if compress else ""
    paths = (d / (IMAGE_NAMES[0] + suffix), d / (LABEL_NAMES[0] + suffix))
    write_idx(pixels.reshape(-1, 28, 28), labels, *paths, compress=compress)
    return paths
