"""Minimal pure-state simulator for Ry/CNOT circuits.

Qubit ``q`` is bit ``q`` of the amplitude index (qubit 0 is the least
significant bit), so ``|q1 q0>`` = ``|01>`` lives at index 1.

Gates act in place on the state's amplitude buffer through strided views
and return the same object, which keeps every gate O(2**n) without ever
building a 2**n x 2**n matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MAX_QUBITS = 12


@dataclass
class StateVector:
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        _check_qubit_count(self.n_qubits)
        amps = np.asarray(self.amplitudes, dtype=np.complex128)
        if amps.shape != (2**self.n_qubits,):
            raise ValueError(
                f"expected {2**self.n_qubits} amplitudes for {self.n_qubits} qubits, "
                f"got shape {amps.shape}"
            )
        self.amplitudes = amps

    def copy(self) -> StateVector:
        return StateVector(self.n_qubits, self.amplitudes.copy())

    def norm(self) -> float:
        return float(np.sqrt(np.vdot(self.amplitudes, self.amplitudes).real))


def _check_qubit_count(n_qubits):
    if isinstance(n_qubits, bool) or not isinstance(n_qubits, (int, np.integer)):
        raise ValueError(f"qubit count must be an integer, got {n_qubits!r}")
    if not 1 <= n_qubits <= MAX_QUBITS:
        raise ValueError(f"qubit count must be in [1, {MAX_QUBITS}], got {n_qubits}")


def _check_index(state: StateVector, qubit, name="qubit"):
    if isinstance(qubit, bool) or not isinstance(qubit, (int, np.integer)):
        raise ValueError(f"{name} index must be an integer, got {qubit!r}")
    if not 0 <= qubit < state.n_qubits:
        raise ValueError(
            f"{name} index {qubit} out of range for {state.n_qubits} qubits"
        )


def init_zero(n_qubits: int) -> StateVector:
    """Return ``|0...0>`` on ``n_qubits`` qubits."""
    _check_qubit_count(n_qubits)
    amps = np.zeros(2**n_qubits, dtype=np.complex128)
    amps[0] = 1.0
    return StateVector(n_qubits, amps)


def _pair_view(state: StateVector, qubit: int) -> np.ndarray:
    # Axis 1 of the view is the target bit; axes 0 and 2 are the higher and lower bits.
    return state.amplitudes.reshape(2 ** (state.n_qubits - qubit - 1), 2, 2**qubit)


def apply_ry(state: StateVector, qubit: int, theta: float) -> StateVector:
    """Rotate ``qubit`` about the y axis by ``theta`` radians (in place).

    Uses Ry(theta) = [[cos(theta/2), -sin(theta/2)], [sin(theta/2), cos(theta/2)]].
    """
    _check_index(state, qubit)
    c = np.cos(theta / 2.0)
    s = np.sin(theta / 2.0)
    view = _pair_view(state, qubit)
    a0 = view[:, 0, :].copy()
    a1 = view[:, 1, :]
    view[:, 0, :] = c * a0 - s * a1
    view[:, 1, :] = s * a0 + c * a1
    return state


def apply_cnot(state: StateVector, control: int, target: int) -> StateVector:
    """Flip ``target`` on every basis state whose ``control`` bit is 1 (in place)."""
    _check_index(state, control, "control")
    _check_index(state, target, "target")
    if control == target:
        raise ValueError("control and target must differ")
    n = state.n_qubits
    tensor = state.amplitudes.reshape((2,) * n)
    # Tensor axis k holds qubit n-1-k.
    c_axis = n - 1 - control
    t_axis = n - 1 - target
    idx = [slice(None)] * n
    idx[c_axis] = 1
    sub = tensor[tuple(idx)]
    sub_t_axis = t_axis if t_axis < c_axis else t_axis - 1
    sub[...] = np.flip(sub, axis=sub_t_axis).copy()
    return state


def overlap(a: StateVector, b: StateVector) -> complex:
    """Inner product <a|b>, conjugate-linear in ``a``."""
    if a.n_qubits != b.n_qubits:
        raise ValueError(
            f"cannot overlap states on {a.n_qubits} and {b.n_qubits} qubits"
        )
    return complex(np.vdot(a.amplitudes, b.amplitudes))
