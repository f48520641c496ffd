"""Independent reference implementations used only by the tests.

None of these share code with the package paths they check.
"""

import itertools

import numpy as np


# --- dense circuit oracle -------------------------------------------------------

def ry_matrix(theta):
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def single_qubit_op(n, qubit, m):
    """Full 2^n x 2^n operator of ``m`` on ``qubit`` (qubit 0 = least significant bit)."""
    out = np.array([[1.0 + 0j]])
    for q in reversed(range(n)):
        out = np.kron(out, m if q == qubit else np.eye(2))
    return out


def cnot_matrix(n, control, target):
    dim = 2**n
    proj0 = np.diag([1.0, 0.0]).astype(complex)
    proj1 = np.diag([0.0, 1.0]).astype(complex)
    x = np.array([[0, 1], [1, 0]], dtype=complex)
    ops0 = [proj0 if q == control else np.eye(2) for q in range(n)]
    ops1 = [proj1 if q == control else (x if q == target else np.eye(2)) for q in range(n)]

    def kron_all(ops):
        out = np.array([[1.0 + 0j]])
        for q in reversed(range(n)):
            out = np.kron(out, ops[q])
        return out

    m = kron_all(ops0) + kron_all(ops1)
    assert m.shape == (dim, dim)
    return m


def rotation_layer(n, angles):
    out = np.array([[1.0 + 0j]])
    for q in reversed(range(n)):
        out = np.kron(out, ry_matrix(angles[q]))
    return out


def entangler_matrix(kind, n):
    pairs = ([(j, j + 1) for j in range(n - 1)] if kind == "QK1"
             else [(i, j) for i in range(n) for j in range(i + 1, n)])
    m = np.eye(2**n, dtype=complex)
    for c, t in pairs:
        m = cnot_matrix(n, c, t) @ m
    return m


def dense_feature_state(kind, x, alpha, layers):
    n = len(x)
    theta = np.asarray(alpha) * np.asarray(x)
    R = rotation_layer(n, theta)
    E = entangler_matrix(kind, n)
    U = R
    for _ in range(layers):
        U = E @ R @ U
    psi0 = np.zeros(2**n, dtype=complex)
    psi0[0] = 1
    return U @ psi0


def product_kernel(x, y, alpha):
    return float(np.prod(np.cos(np.asarray(alpha) * (np.asarray(x) - np.asarray(y))) ** 2))


# --- brute-force one-class SVM dual ------------------------------------------

def ocsvm_bruteforce(K, nu, tol=1e-9):
    """Exact nu-OCSVM dual by enumerating active sets (n <= 7).

    For every split of indices into {at zero, at upper bound, free}, solve the
    KKT equalities and keep feasible points satisfying the sign conditions.
    Returns (alpha, rho, objective) of the best one.
    """
    K = np.asarray(K, dtype=float)
    n = K.shape[0]
    C = 1.0 / (nu * n)
    best = None
    for assign in itertools.product((0, 1, 2), repeat=n):
        L = [i for i in range(n) if assign[i] == 0]
        U = [i for i in range(n) if assign[i] == 1]
        F = [i for i in range(n) if assign[i] == 2]
        remaining = 1.0 - C * len(U)
        alpha = np.zeros(n)
        alpha[U] = C
        if F:
            m = len(F)
            A = np.zeros((m + 1, m + 1))
            A[:m, :m] = K[np.ix_(F, F)]
            A[:m, m] = -1.0
            A[m, :m] = 1.0
            rhs = np.zeros(m + 1)
            rhs[:m] = -K[np.ix_(F, U)].sum(axis=1) * C if U else 0.0
            rhs[m] = remaining
            sol, *_ = np.linalg.lstsq(A, rhs, rcond=None)
            if np.linalg.norm(A @ sol - rhs) > 1e-9:
                continue
            alpha[F] = sol[:m]
            rho = sol[m]
            if np.any(alpha[F] < -tol) or np.any(alpha[F] > C + tol):
                continue
        else:
            if abs(remaining) > 1e-12:
                continue
            g = K @ alpha
            lo = max(g[U]) if U else -np.inf
            hi = min(g[L]) if L else np.inf
            if lo > hi + 1e-9:
                continue
            rho = 0.5 * (lo + hi) if np.isfinite(lo) and np.isfinite(hi) else (lo if np.isfinite(lo) else hi)
        g = K @ alpha
        if L and np.any(g[L] < rho - 1e-9):
            continue
        if U and np.any(g[U] > rho + 1e-9):
            continue
        obj = 0.5 * alpha @ K @ alpha
        if best is None or obj < best[2] - 1e-14:
            best = (alpha.copy(), float(rho), float(obj))
    return best


def random_psd_gram(rng, n, dim=3, gamma=0.7):
    X = rng.normal(size=(n, dim))
    sq = ((X[:, None, :] - X[None, :, :]) ** 2).sum(-1)
    return np.exp(-gamma * sq), X
