"""Auditing functions: additive gradient-sign offset, Gaussian offset, projection."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..errors import DimensionMismatchError, PreconditionError, ValidationError

EPSILON_MIN = math.exp(-8)
EPSILON_MAX = math.exp(8)
ETA_SOURCES = ("gradient_sign", "gaussian_noise")


class UnfittedTransformError(ValidationError):
    pass


@dataclass(frozen=True)
class AdditiveConfig:
    """``A(x) = x + epsilon * eta``.

    ``eta`` is either the sign of a loss gradient or Gaussian noise with
    per-coordinate standard deviation ``sigma``. ``epsilon = 0`` is accepted
    as the explicit identity transform.
    """

    epsilon: float = 0.5
    eta_source: str = "gradient_sign"
    sigma: float = 1.0

    def __post_init__(self):
        if self.eta_source not in ETA_SOURCES:
            raise ValidationError(f"eta_source must be one of {ETA_SOURCES}")
        if self.epsilon != 0 and not EPSILON_MIN <= self.epsilon <= EPSILON_MAX:
            raise ValidationError(f"epsilon={self.epsilon} outside [e^-8, e^8]")
        if self.sigma <= 0:
            raise ValidationError("sigma must be positive")


@dataclass(frozen=True)
class MultiplicativeConfig:
    lr: float = 1e-2
    max_outer_iters: int = 20
    inner_grad_steps: int = 10
    init_scale: float = 0.01
    W_init: Optional[np.ndarray] = None
    seed: int = 0

    def __post_init__(self):
        if self.max_outer_iters < 1:
            raise PreconditionError("max_outer_iters must be >= 1")
        if self.inner_grad_steps < 1:
            raise PreconditionError("inner_grad_steps must be >= 1")
        if self.lr <= 0:
            raise ValidationError("lr must be positive")
        if self.init_scale < 0:
            raise ValidationError("init_scale must be >= 0")

    def echo(self) -> dict:
        return {
            "lr": self.lr, "max_outer_iters": self.max_outer_iters,
            "inner_grad_steps": self.inner_grad_steps, "init_scale": self.init_scale,
            "W_init": None if self.W_init is None else np.asarray(self.W_init).tolist(),
            "seed": self.seed,
        }


@dataclass(frozen=True, eq=False)
class ProjectionTransform:
    """A fitted multiplicative auditing function ``A(x) = W x``."""

    W: np.ndarray

    def __post_init__(self):
        W = np.array(self.W, dtype=float)
        if W.ndim != 2 or W.shape[0] != W.shape[1]:
            raise ValidationError(f"W must be square, got shape {W.shape}")
        W.setflags(write=False)
        object.__setattr__(self, "W", W)

    def __call__(self, X):
        X = np.asarray(X, dtype=float)
        if X.shape[-1] != self.W.shape[1]:
            raise DimensionMismatchError(f"W expects dimension {self.W.shape[1]}, got {X.shape[-1]}")
        return X @ self.W.T

    def min_singular_value(self) -> float:
        return float(np.linalg.svd(self.W, compute_uv=False)[-1])


def additive_transform(x, grad, epsilon: float) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    grad = np.asarray(grad, dtype=float)
    if x.shape != grad.shape:
        raise DimensionMismatchError(f"x has shape {x.shape} but gradient has shape {grad.shape}")
    return x + epsilon * np.sign(grad)


def random_transform(x, sigma: float, rng: np.random.Generator) -> np.ndarray:
    if sigma <= 0:
        raise ValidationError("sigma must be positive")
    x = np.asarray(x, dtype=float)
    return x + rng.normal(0.0, sigma, size=x.shape)


def audit_function_apply(x, cfg, context=None) -> np.ndarray:
    """Apply a resolved auditing function.

    ``context`` is the loss gradient for gradient-sign offsets, a numpy
    ``Generator`` for Gaussian offsets, and unused for projections.
    """
    if isinstance(cfg, ProjectionTransform):
        return cfg(x)
    if isinstance(cfg, MultiplicativeConfig):
        raise UnfittedTransformError("multiplicative auditing function has not been fitted; call fit_multiplicative")
    if isinstance(cfg, AdditiveConfig):
        if cfg.epsilon == 0:
            return np.array(x, dtype=float)
        if cfg.eta_source == "gradient_sign":
            if context is None:
                raise ValidationError("gradient-sign offset needs a gradient")
            return additive_transform(x, context, cfg.epsilon)
        if not isinstance(context, np.random.Generator):
            raise ValidationError("Gaussian offset needs a numpy Generator")
        return random_transform(x, cfg.epsilon * cfg.sigma, context)
    raise ValidationError(f"unsupported auditing function config {type(cfg).__name__}")
