"""Uniform handle over the quantum and classical kernels used by the pipeline."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .classical import RbfSpec, default_gamma, rbf_gram
from .featuremap import FeatureMapSpec, quantum_gram

KERNEL_NAMES = ("qk1", "qk2", "rbf")
DEFAULT_ANGLE_SCALE = 0.5


@dataclass(frozen=True)
class KernelConfig:
    """Which kernel to use and its hyperparameters.

    ``gamma`` only applies to ``rbf``; ``None`` means 1/d. ``layers`` and
    ``angle_scale`` only apply to the quantum kernels. The default angle scale of
    1/2 keeps the circuit injective over the scaler's whole clip window
    [-pi/2, 3pi/2]: the leading rotation pair acts as Ry(2 * alpha * x), and with
    alpha = 1 a clipped outlier at -pi/2 would alias onto normals near pi/2.
    """

    name: str
    layers: int = 2
    gamma: float | None = None
    angle_scale: float = DEFAULT_ANGLE_SCALE

    def __post_init__(self):
        name = str(self.name).lower()
        if name not in KERNEL_NAMES:
            raise ValueError(f"unknown kernel {self.name!r}; expected one of {KERNEL_NAMES}")
        object.__setattr__(self, "name", name)
        if int(self.layers) < 1:
            raise ValueError(f"layers must be >= 1, got {self.layers}")
        if self.gamma is not None and not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if not (np.isfinite(self.angle_scale) and self.angle_scale > 0):
            raise ValueError(f"angle_scale must be positive, got {self.angle_scale}")

    def resolved_gamma(self, n_features: int) -> float:
        return self.gamma if self.gamma is not None else default_gamma(n_features)

    def to_dict(self) -> dict:
        return {"name": self.name, "layers": self.layers, "gamma": self.gamma,
                "angle_scale": self.angle_scale}

    @classmethod
    def from_dict(cls, data: dict) -> KernelConfig:
        return cls(
            name=data["name"],
            layers=data.get("layers", 2),
            gamma=data.get("gamma"),
            angle_scale=data.get("angle_scale", DEFAULT_ANGLE_SCALE),
        )


def kernel_matrix(config: KernelConfig, X, Y=None, threads: int | None = None) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    d = X.shape[1]
    if config.name == "rbf":
        return rbf_gram(RbfSpec(config.resolved_gamma(d)), X, Y)
    spec = FeatureMapSpec(config.name.upper(), n_qubits=d, layers=config.layers,
                          angle_scales=(config.angle_scale,) * d)
    return quantum_gram(spec, X, Y, threads=threads)
