from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Any

from ..audit.transforms import AdditiveConfig, MultiplicativeConfig
from ..errors import ValidationError


class MethodKind(str, enum.Enum):
    ADD = "add"  # gradient-sign additive offset
    MUL = "mul"  # learned projection
    RN = "rn"  # Gaussian additive offset
    CC = "cc"  # confidence baseline, no transform

    @classmethod
    def parse(cls, value) -> "MethodKind":
        try:
            return cls(str(getattr(value, "value", value)).lower())
        except ValueError:
            raise ValidationError(f"unknown audit method {value!r}; choose from add, mul, rn, cc") from None


@dataclass(frozen=True)
class ConfidenceConfig:
    """The confidence baseline has nothing to configure."""

    def echo(self) -> dict:
        return {}


_EXPECTED = {
    MethodKind.ADD: AdditiveConfig,
    MethodKind.RN: AdditiveConfig,
    MethodKind.MUL: MultiplicativeConfig,
    MethodKind.CC: ConfidenceConfig,
}


@dataclass(frozen=True)
class AuditMethod:
    """An audit method kind together with its single config object."""

    kind: MethodKind
    config: Any

    def __post_init__(self):
        kind = MethodKind.parse(self.kind)
        object.__setattr__(self, "kind", kind)
        if not isinstance(self.config, _EXPECTED[kind]):
            raise ValidationError(
                f"method {kind.value} needs a {_EXPECTED[kind].__name__}, got {type(self.config).__name__}"
            )
        if kind is MethodKind.ADD and self.config.eta_source != "gradient_sign":
            raise ValidationError("the additive method uses gradient-sign offsets; use rn for Gaussian noise")
        if kind is MethodKind.RN and self.config.eta_source != "gaussian_noise":
            raise ValidationError("the rn method needs eta_source='gaussian_noise'")

    @classmethod
    def add(cls, epsilon: float = 0.5) -> "AuditMethod":
        return cls(MethodKind.ADD, AdditiveConfig(epsilon=epsilon))

    @classmethod
    def rn(cls, sigma: float = 1.0, epsilon: float = 1.0) -> "AuditMethod":
        """Gaussian offsets with effective standard deviation ``epsilon * sigma``."""
        return cls(MethodKind.RN, AdditiveConfig(epsilon=epsilon, eta_source="gaussian_noise", sigma=sigma))

    @classmethod
    def mul(cls, **kwargs) -> "AuditMethod":
        return cls(MethodKind.MUL, MultiplicativeConfig(**kwargs))

    @classmethod
    def cc(cls) -> "AuditMethod":
        return cls(MethodKind.CC, ConfidenceConfig())

    def echo(self) -> dict:
        if isinstance(self.config, AdditiveConfig):
            cfg = {"epsilon": self.config.epsilon, "eta_source": self.config.eta_source,
                   "sigma": self.config.sigma}
        else:
            cfg = self.config.echo()
        return {"kind": self.kind.value, "config": cfg}
