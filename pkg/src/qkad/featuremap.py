"""QK1/QK2 encoding circuits and the fidelity kernel built on them.

Circuit layout for ``layers = L`` on ``n`` qubits, in order of application::

    R(x) -> [R(x) -> E] * L

where ``R(x)`` is the rotation layer ``Ry(alpha_j * x_j)`` on every qubit ``j``
and ``E`` is the data-independent entangler:

* QK1: ``CNOT(j, j+1)`` for ``j = 0..n-2`` (nearest-neighbour chain),
* QK2: ``CNOT(i, j)`` for every ``i < j`` in lexicographic order.

The control is always the lower qubit index. With ``L = 1`` the circuit is
``E * R(2x)``, so ``E`` drops out of the fidelity and QK1 and QK2 coincide with
``prod_j cos^2(alpha_j (x_j - y_j))``. From ``L = 2`` on, the entangler sits
between data rotations and the two families differ.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .statevector import MAX_QUBITS, StateVector, apply_cnot, apply_ry, init_zero, overlap


class FeatureMapKind(str, Enum):
    QK1 = "QK1"
    QK2 = "QK2"


@dataclass(frozen=True)
class FeatureMapSpec:
    kind: FeatureMapKind
    n_qubits: int
    layers: int = 2
    angle_scales: tuple = field(default=None)

    def __post_init__(self):
        if not isinstance(self.kind, FeatureMapKind):
            object.__setattr__(self, "kind", FeatureMapKind(str(self.kind).upper()))
        if not 1 <= int(self.n_qubits) <= MAX_QUBITS:
            raise ValueError(f"n_qubits must be in [1, {MAX_QUBITS}], got {self.n_qubits}")
        if int(self.layers) < 1:
            raise ValueError(f"layers must be >= 1, got {self.layers}")
        scales = self.angle_scales
        if scales is None:
            scales = (1.0,) * self.n_qubits
        scales = tuple(float(a) for a in scales)
        if len(scales) != self.n_qubits:
            raise ValueError(
                f"{len(scales)} angle scales given for {self.n_qubits} qubits"
            )
        if not all(np.isfinite(scales)):
            raise ValueError("angle scales must be finite")
        object.__setattr__(self, "angle_scales", scales)


@dataclass(frozen=True)
class GateCounts:
    rotations: int
    cnots: int


def entangler_pairs(kind: FeatureMapKind, n_qubits: int) -> list[tuple[int, int]]:
    """(control, target) pairs of one entangler block, in application order."""
    kind = FeatureMapKind(kind)
    if kind is FeatureMapKind.QK1:
        return [(j, j + 1) for j in range(n_qubits - 1)]
    return [(i, j) for i in range(n_qubits) for j in range(i + 1, n_qubits)]


def gate_counts(spec: FeatureMapSpec) -> GateCounts:
    n = spec.n_qubits
    return GateCounts(
        rotations=(spec.layers + 1) * n,
        cnots=spec.layers * len(entangler_pairs(spec.kind, n)),
    )


def _angles(spec: FeatureMapSpec, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (spec.n_qubits,):
        raise ValueError(
            f"feature vector of shape {x.shape} does not match {spec.n_qubits} qubits"
        )
    theta = np.asarray(spec.angle_scales) * x
    if not np.all(np.isfinite(theta)):
        raise ValueError("rotation angles must be finite")
    return theta


def encode(spec: FeatureMapSpec, x) -> StateVector:
    """Prepare |phi(x)> = U(x)|0...0>."""
    theta = _angles(spec, x)
    pairs = entangler_pairs(spec.kind, spec.n_qubits)
    state = init_zero(spec.n_qubits)
    for q, t in enumerate(theta):
        apply_ry(state, q, t)
    for _ in range(spec.layers):
        for q, t in enumerate(theta):
            apply_ry(state, q, t)
        for control, target in pairs:
            apply_cnot(state, control, target)
    return state


def quantum_kernel(spec: FeatureMapSpec, x, y) -> float:
    """Fidelity kernel |<phi(x)|phi(y)>|^2."""
    return abs(overlap(encode(spec, x), encode(spec, y))) ** 2


def encode_all(spec: FeatureMapSpec, X, threads: int | None = None) -> np.ndarray:
    """Stack the encoded states of every row of ``X`` into an (N, 2**n) array."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if threads is not None and threads > 1 and len(X) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            states = list(pool.map(lambda row: encode(spec, row), X))
    else:
        states = [encode(spec, row) for row in X]
    out = np.empty((len(X), 2**spec.n_qubits), dtype=np.complex128)
    for i, s in enumerate(states):
        out[i] = s.amplitudes
    return out


def quantum_gram(spec: FeatureMapSpec, X, Y=None, threads: int | None = None) -> np.ndarray:
    """Kernel matrix K[i, j] = k(X[i], Y[j]); ``Y=None`` gives the symmetric Gram of ``X``.

    Each sample is encoded once and the matrix is formed from pairwise overlaps.
    """
    phi_x = encode_all(spec, X, threads)
    if Y is None:
        K = np.abs(phi_x.conj() @ phi_x.T) ** 2
        return 0.5 * (K + K.T)
    phi_y = encode_all(spec, Y, threads)
    return np.abs(phi_x.conj() @ phi_y.T) ** 2
