"""Versioned JSON documents for trained models.

Layout: ``{"format_version", "family", "dim", "classes", "params", "seed", "train_meta"}``.
"""

from __future__ import annotations

import json
from pathlib import Path

from ..errors import DataFormatError
from .forest import CrtForestModel
from .lssvm import LsSvmModel
from .mlp import MlpModel

FORMAT_VERSION = 1


def model_to_dict(model) -> dict:
    seed = getattr(model, "seed", None)
    if seed is None and hasattr(model, "hyper"):
        seed = model.hyper.get("seed")
    return {
        "format_version": FORMAT_VERSION,
        "family": model.family,
        "dim": model.n_features,
        "classes": model.n_classes,
        "params": model.to_params(),
        "seed": seed,
        "train_meta": model.train_meta,
    }


def model_from_dict(doc: dict):
    if doc.get("format_version") != FORMAT_VERSION:
        raise DataFormatError(f"unsupported model format version {doc.get('format_version')!r}")
    family = doc.get("family")
    params = doc["params"]
    meta = doc.get("train_meta", {})
    if family == "lssvm":
        model = LsSvmModel.from_params(params, doc["classes"], meta)
    elif family == "forest":
        model = CrtForestModel.from_params(params, doc["dim"], doc["classes"], doc.get("seed"), meta)
    elif family == "mlp":
        model = MlpModel.from_params(params, meta)
    else:
        raise DataFormatError(f"unknown model family {family!r}")
    if model.n_features != doc["dim"] or model.n_classes != doc["classes"]:
        raise DataFormatError("model document dimensions disagree with its parameters")
    return model


def save_model(model, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(model_to_dict(model), sort_keys=True) + "\n")
    return path


def load_model(path):
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"{path}: invalid JSON ({exc})") from exc
    return model_from_dict(doc)
