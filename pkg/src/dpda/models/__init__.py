"""Target-model zoo: LS-SVM, completely-random forest, two-layer MLP."""

from .access import AccessMode, ModelAccess, PredictOnlyHandle
from .forest import CrtForestModel, CrtTree, train_crt_forest
from .lssvm import LsSvmModel, lssvm_input_gradient, train_lssvm
from .mlp import MlpModel, loss_input_gradient, resume_mlp, train_mlp
from .sensitivity import output_jacobian, sensitivity_estimate
from .serialize import load_model, model_from_dict, model_to_dict, save_model

FAMILIES = ("lssvm", "forest", "mlp")


def predict_proba(model, x):
    """Class probabilities for one vector or a batch of rows."""
    return model.predict_proba(x)


def is_differentiable(model) -> bool:
    return hasattr(model, "prob_vjp") and hasattr(model, "input_gradient")


def train_model(family: str, X, y, *, seed: int = 0, n_classes=None, **hyper):
    """Dispatch to the trainer for ``family`` with family-specific hyperparameters."""
    if family == "lssvm":
        return train_lssvm(X, y, C=hyper.get("C", 1.0), n_classes=n_classes)
    if family == "forest":
        return train_crt_forest(X, y, n_trees=hyper.get("n_trees", 50),
                                max_depth=hyper.get("max_depth", 10), seed=seed, n_classes=n_classes)
    if family == "mlp":
        return train_mlp(X, y, hidden=hyper.get("hidden", 64), epochs=hyper.get("epochs", 100),
                         lr=hyper.get("lr", 0.1), batch=hyper.get("batch", 32), seed=seed,
                         activation=hyper.get("activation", "relu"), n_classes=n_classes)
    raise ValueError(f"unknown model family {family!r}; choose from {FAMILIES}")


__all__ = [
    "AccessMode", "ModelAccess", "PredictOnlyHandle",
    "CrtForestModel", "CrtTree", "train_crt_forest",
    "LsSvmModel", "lssvm_input_gradient", "train_lssvm",
    "MlpModel", "loss_input_gradient", "resume_mlp", "train_mlp",
    "output_jacobian", "sensitivity_estimate",
    "load_model", "model_from_dict", "model_to_dict", "save_model",
    "FAMILIES", "predict_proba", "is_differentiable", "train_model",
]
