"""Gaussian RBF baseline kernel."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class RbfSpec:
    gamma: float

    def __post_init__(self):
        if not (np.isfinite(self.gamma) and self.gamma > 0):
            raise ValueError(f"gamma must be a positive finite number, got {self.gamma}")


def default_gamma(n_features: int) -> float:
    """Dimension-normalised width, 1/d."""
    if n_features < 1:
        raise ValueError("need at least one feature")
    return 1.0 / n_features


def rbf_kernel(spec: RbfSpec, x, y) -> float:
    """exp(-gamma * ||x - y||^2)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise ValueError(f"shape mismatch: {x.shape} vs {y.shape}")
    return float(np.exp(-spec.gamma * np.sum((x - y) ** 2)))


def rbf_gram(spec: RbfSpec, X, Y=None) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    symmetric = Y is None
    Y = X if symmetric else np.atleast_2d(np.asarray(Y, dtype=float))
    if X.shape[1] != Y.shape[1]:
        raise ValueError(f"feature dimension mismatch: {X.shape[1]} vs {Y.shape[1]}")
    # Explicit differences rather than the |x|^2 + |y|^2 - 2xy expansion keep the
    # diagonal at exactly 1 and distances nonnegative.
    sq = np.sum((X[:, None, :] - Y[None, :, :]) ** 2, axis=-1)
    K = np.exp(-spec.gamma * sq)
    if symmetric:
        K = 0.5 * (K + K.T)
    return K
