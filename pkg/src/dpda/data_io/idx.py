"""Reader/writer for the IDX binary format used by the MNIST distribution.

Headers are big-endian: a 4-byte magic (``0x00000803`` for 3-d unsigned-byte
image tensors, ``0x00000801`` for 1-d label vectors) followed by one uint32
per dimension. Files may be gzip-compressed.
"""

from __future__ import annotations

import gzip
import struct
from pathlib import Path
from typing import Optional

import numpy as np

from ..errors import DataFormatError
from .dataset import Dataset

IMAGES_MAGIC = 0x00000803
LABELS_MAGIC = 0x00000801


def _read_bytes(path) -> bytes:
    raw = Path(path).read_bytes()
    if raw[:2] == b"\x1f\x8b":
        raw = gzip.decompress(raw)
    return raw


def _parse(raw: bytes, magic: int, ndim: int, path) -> np.ndarray:
    header_len = 4 + 4 * ndim
    if len(raw) < header_len:
        raise DataFormatError(f"{path}: file too short for an IDX header")
    found = struct.unpack(">I", raw[:4])[0]
    if found != magic:
        raise DataFormatError(f"{path}: bad magic number 0x{found:08x}, expected 0x{magic:08x}")
    dims = struct.unpack(f">{ndim}I", raw[4:header_len])
    expected = header_len + int(np.prod(dims))
    if len(raw) != expected:
        raise DataFormatError(f"{path}: {len(raw)} bytes but header declares {expected}")
    return np.frombuffer(raw, dtype=np.uint8, offset=header_len).reshape(dims)


def read_idx_images(path) -> np.ndarray:
    return _parse(_read_bytes(path), IMAGES_MAGIC, 3, path)


def read_idx_labels(path) -> np.ndarray:
    return _parse(_read_bytes(path), LABELS_MAGIC, 1, path)


def load_idx(images_path, labels_path, limit: Optional[int] = None) -> Dataset:
    """Flatten images to ``rows * cols`` features scaled to ``[0, 1]``."""
    images = read_idx_images(images_path)
    labels = read_idx_labels(labels_path)
    if images.shape[0] != labels.shape[0]:
        raise DataFormatError(f"{images.shape[0]} images but {labels.shape[0]} labels")
    if limit is not None:
        images = images[:limit]
        labels = labels[:limit]
    X = images.reshape(images.shape[0], -1).astype(float) / 255.0
    return Dataset(X, labels.astype(int))


def write_idx(images, labels, images_path, labels_path, compress: bool = False) -> None:
    images = np.asarray(images)
    labels = np.asarray(labels)
    if images.ndim != 3 or labels.ndim != 1 or len(images) != len(labels):
        raise DataFormatError("need images (n, rows, cols) and labels (n,)")
    if images.min() < 0 or images.max() > 255 or labels.min() < 0 or labels.max() > 255:
        raise DataFormatError("IDX unsigned-byte payload must lie in 0..255")
    img = struct.pack(">4I", IMAGES_MAGIC, *images.shape) + images.astype(np.uint8).tobytes()
    lab = struct.pack(">2I", LABELS_MAGIC, len(labels)) + labels.astype(np.uint8).tobytes()
    opener = gzip.compress if compress else (lambda b: b)
    Path(images_path).write_bytes(opener(img))
    Path(labels_path).write_bytes(opener(lab))
