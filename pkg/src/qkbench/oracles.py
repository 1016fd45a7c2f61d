"""Slow reference implementations used to cross-check the fast paths.

Nothing here shares code with the production routines: circuits are built as
explicit dense matrices from Kronecker products, phases by enumerating Pauli-Z
subsets bit by bit, and the SVM dual by accelerated projected gradient.
"""

from __future__ import annotations

import math
from itertools import combinations

import numpy as np

_H = np.array([[1, 1], [1, -1]], dtype=np.complex128) / math.sqrt(2)


def pair_formula(kind: str, a: float, b: float) -> float:
    pi = math.pi
    if kind in ("zz", "default"):
        return (pi - a) * (pi - b)
    if kind == "suzuki8":
        return pi * a * b
    if kind == "suzuki9":
        return pi / 2 * (1 - a) * (1 - b)
    if kind == "suzuki10":
        return math.exp(abs(a - b) ** 2 / (8 / math.log(pi)))
    if kind == "suzuki11":
        return pi / (3 * math.cos(a) * math.cos(b))
    if kind == "suzuki12":
        return pi * math.cos(a) * math.cos(b)
    raise ValueError(kind)


def subset_phases(kind: str, x) -> np.ndarray:
    """Phase of every basis state from explicit enumeration of 1- and 2-qubit Z subsets."""
    n = len(x)
    out = np.zeros(2**n)
    subsets = [(i,) for i in range(n)] + list(combinations(range(n), 2))
    for b in range(2**n):
        total = 0.0
        for S in subsets:
            coeff = float(x[S[0]]) if len(S) == 1 else pair_formula(kind, x[S[0]], x[S[1]])
            sign = 1
            for q in S:
                sign *= -1 if (b >> q) & 1 else 1
            total += coeff * sign
        out[b] = total
    return out


def dense_hadamard(n: int) -> np.ndarray:
    M = np.array([[1.0 + 0j]])
    for _ in range(n):
        M = np.kron(_H, M)
    return M


def dense_ry_layer(angles) -> np.ndarray:
    """Kronecker product with qubit 0 as the least-significant factor."""
    M = np.array([[1.0 + 0j]])
    for theta in angles:
        c, s = math.cos(theta / 2), math.sin(theta / 2)
        M = np.kron(np.array([[c, -s], [s, c]], dtype=np.complex128), M)
    return M


def dense_feature_unitary(kind: str, x, reps: int) -> np.ndarray:
    n = len(x)
    U_phi = np.diag(np.exp(1j * subset_phases(kind, x)))
    block = U_phi @ dense_hadamard(n)
    U = np.eye(2**n, dtype=np.complex128)
    for _ in range(reps):
        U = block @ U
    return U


def dense_state(kind: str, x, reps: int, fiducial=None) -> np.ndarray:
    n = len(x)
    psi = np.zeros(2**n, dtype=np.complex128)
    psi[0] = 1
    if fiducial is not None:
        psi = dense_ry_layer(fiducial) @ psi
    return dense_feature_unitary(kind, x, reps) @ psi


def dense_kernel(kind: str, x, y, reps: int, fiducial=None) -> float:
    """``|<0| U_f^dag D(x)^dag D(y) U_f |0>|^2`` via full matrix products."""
    n = len(x)
    Uf = np.eye(2**n) if fiducial is None else dense_ry_layer(fiducial)
    M = Uf.conj().T @ dense_feature_unitary(kind, x, reps).conj().T @ dense_feature_unitary(kind, y, reps) @ Uf
    return float(abs(M[0, 0]) ** 2)


def _project(v, y, c):
    """Euclidean projection onto ``{0 <= a <= c, y.a = 0}`` by bisection on the multiplier."""
    def excess(mu):
        return float(y @ np.clip(v - mu * y, 0.0, c))

    lo, hi = -1.0, 1.0
    while excess(lo) < 0:
        lo *= 2
    while excess(hi) > 0:
        hi *= 2
    for _ in range(200):
        mid = (lo + hi) / 2
        if excess(mid) > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-15 * max(1.0, abs(mid)):
            break
    return np.clip(v - (lo + hi) / 2 * y, 0.0, c)


def qp_dual(K, y, c: float, tol: float = 1e-8, max_iter: int = 500_000):
    """Maximize the SVM dual by FISTA projected gradient; returns ``(alpha, objective)``."""
    K = np.asarray(K, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    Q = K * np.outer(y, y)
    L = max(float(np.linalg.eigvalsh(Q).max()), 1e-12)
    alpha = np.zeros(len(y))
    z = alpha.copy()
    t = 1.0
    for _ in range(max_iter):
        nxt = _project(z - (Q @ z - 1.0) / L, y, c)
        step = np.linalg.norm(nxt - alpha)
        t_next = (1 + math.sqrt(1 + 4 * t * t)) / 2
        z = nxt + (t - 1) / t_next * (nxt - alpha)
        alpha, t = nxt, t_next
        if step < tol:
            break
    return alpha, float(alpha.sum() - 0.5 * alpha @ Q @ alpha)
