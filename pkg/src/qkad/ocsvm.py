"""nu one-class SVM over a precomputed kernel.

Dual problem::

    min_a  1/2 a^T K a   s.t.  0 <= a_i <= 1/(nu n),  sum_i a_i = 1

solved by pairwise (SMO-style) coordinate updates on the maximal violating
pair. The decision function is ``f(x) = sum_i a_i k(x_i, x) - rho``; negative
scores are anomalies.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

logger = logging.getLogger(__name__)

DEFAULT_NU = 0.1
KKT_TOL = 1e-6
MAX_ITER = 100_000
INTERIOR_TOL = 1e-8
SYMMETRY_TOL = 1e-10
PSD_TOL = 1e-8

NORMAL = "normal"
ANOMALY = "anomaly"


@dataclass
class OcSvmModel:
    nu: float
    dual_weights: np.ndarray
    rho: float
    support_indices: np.ndarray
    training_feature_ref: str = ""
    n_iter: int = field(default=0, compare=False)
    kkt_violation: float = field(default=0.0, compare=False)

    @property
    def n_train(self) -> int:
        return self.dual_weights.size


def check_gram(gram) -> np.ndarray:
    K = np.asarray(gram, dtype=float)
    if K.ndim != 2 or K.shape[0] != K.shape[1] or K.shape[0] == 0:
        raise ValueError(f"Gram matrix must be square and non-empty, got shape {K.shape}")
    if not np.all(np.isfinite(K)):
        raise ValueError("Gram matrix has non-finite entries")
    if np.max(np.abs(K - K.T)) > SYMMETRY_TOL:
        raise ValueError("Gram matrix is not symmetric")
    return K


def box_bound(nu: float, n: int) -> float:
    if not (np.isfinite(nu) and 0 < nu <= 1):
        raise ValueError(f"nu must be in (0, 1], got {nu}")
    if nu * n < 1 - 1e-12:
        raise ValueError(f"nu={nu} infeasible for n={n} samples; need nu >= 1/n")
    return 1.0 / (nu * n)


def dual_objective(gram, alpha) -> float:
    alpha = np.asarray(alpha, dtype=float)
    return 0.5 * float(alpha @ np.asarray(gram, dtype=float) @ alpha)


def _offset(grad, alpha, C):
    """rho from the KKT conditions.

    Averaged over free weights when there are any; otherwise rho is only
    pinned to [max grad at the upper bound, min grad at zero] and the midpoint
    is taken (the finite end if one side is empty), as LIBSVM does.
    """
    at_zero = alpha <= INTERIOR_TOL
    at_upper = alpha >= C - INTERIOR_TOL
    interior = ~at_zero & ~at_upper
    if interior.any():
        return float(np.mean(grad[interior]))
    lo = float(np.max(grad[at_upper])) if at_upper.any() else None
    hi = float(np.min(grad[at_zero])) if at_zero.any() else None
    if lo is None:
        return hi
    if hi is None:
        return lo
    return 0.5 * (lo + hi)


def train(gram, nu: float = DEFAULT_NU, *, tol: float = KKT_TOL, max_iter: int = MAX_ITER,
          feature_ref: str = "") -> OcSvmModel:
    """Fit the dual weights and offset on a training Gram matrix.

    Starts from uniform weights 1/n, which is feasible for every valid nu.
    """
    K = check_gram(gram)
    n = K.shape[0]
    C = box_bound(nu, n)
    min_eig = float(np.linalg.eigvalsh(K)[0])
    if min_eig < -PSD_TOL:
        logger.warning("Gram matrix is not PSD (min eigenvalue %.3e); solving as is", min_eig)

    alpha = np.full(n, 1.0 / n)
    grad = K @ alpha
    diag = np.diag(K)
    violation = 0.0
    it = 0
    for it in range(1, max_iter + 1):
        up = alpha < C
        down = alpha > 0
        g_up = np.where(up, grad, np.inf)
        g_down = np.where(down, grad, -np.inf)
        i = int(np.argmin(g_up))
        j = int(np.argmax(g_down))
        violation = float(g_down[j] - g_up[i])
        if violation < tol:
            break
        curvature = diag[i] + diag[j] - 2.0 * K[i, j]
        step = violation / curvature if curvature > 1e-12 else np.inf
        step = min(step, C - alpha[i], alpha[j])
        alpha[i] += step
        alpha[j] -= step
        # Pin exact bounds so the active sets stay clean.
        if C - alpha[i] < 1e-15:
            alpha[i] = C
        if alpha[j] < 1e-15:
            alpha[j] = 0.0
        grad += step * (K[:, i] - K[:, j])
    else:
        logger.warning("SMO stopped after %d iterations with KKT violation %.3e", max_iter, violation)

    grad = K @ alpha
    rho = _offset(grad, alpha, C)
    support = np.flatnonzero(alpha > INTERIOR_TOL)
    return OcSvmModel(
        nu=float(nu),
        dual_weights=alpha,
        rho=rho,
        support_indices=support,
        training_feature_ref=feature_ref,
        n_iter=it,
        kkt_violation=max(violation, 0.0),
    )


def decision(model: OcSvmModel, kernel_row) -> float:
    """f(x) = sum_i alpha_i k(x_i, x) - rho for one kernel row."""
    row = np.asarray(kernel_row, dtype=float)
    if row.shape != (model.n_train,):
        raise ValueError(f"kernel row of shape {row.shape}, expected ({model.n_train},)")
    return float(model.dual_weights @ row - model.rho)


def decision_batch(model: OcSvmModel, kernel_rows) -> np.ndarray:
    """Scores for a (m, n_train) block of kernel rows."""
    rows = np.atleast_2d(np.asarray(kernel_rows, dtype=float))
    if rows.shape[1] != model.n_train:
        raise ValueError(f"kernel rows have {rows.shape[1]} columns, expected {model.n_train}")
    return rows @ model.dual_weights - model.rho


def label_for(score: float) -> str:
    # score == 0 counts as normal
    return ANOMALY if score < 0 else NORMAL


def predict(model: OcSvmModel, kernel_row) -> str:
    return label_for(decision(model, kernel_row))
