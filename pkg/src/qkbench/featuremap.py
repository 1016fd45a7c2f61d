"""Pauli-Z feature-map circuits: ``(U_phi(x) H^n)^reps |0^n>``.

``U_phi(x)`` is diagonal, with phase
``sum_i phi_i(x) z_i(b) + sum_{i<j} phi_ij(x) z_i(b) z_j(b)`` on basis state ``b``.
Every feature gets its own qubit and every unordered qubit pair gets a pair
term (full entanglement).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from qkbench import statevec
from qkbench.errors import ConfigurationError, ContractError, EncodingRangeError, SingularEncodingError
from qkbench.statevec import PhaseVector, Statevector

SUZUKI11_MIN_DENOMINATOR = 1e-9
SUZUKI10_MAX_EXPONENT = 700.0


class Kind(str, enum.Enum):
    ZZ = "zz"
    DEFAULT = "default"
    SUZUKI8 = "suzuki8"
    SUZUKI9 = "suzuki9"
    SUZUKI10 = "suzuki10"
    SUZUKI11 = "suzuki11"
    SUZUKI12 = "suzuki12"


CONFIG_NAMES = {
    "q_kernel_zz": Kind.ZZ,
    "q_kernel_default": Kind.DEFAULT,
    "q_kernel_8": Kind.SUZUKI8,
    "q_kernel_9": Kind.SUZUKI9,
    "q_kernel_10": Kind.SUZUKI10,
    "q_kernel_11": Kind.SUZUKI11,
    "q_kernel_12": Kind.SUZUKI12,
}


def parse_kind(name: str | Kind) -> Kind:
    """Accept either an enum value (``"suzuki8"``) or a config name (``"q_kernel_8"``)."""
    if isinstance(name, Kind):
        return name
    if name in CONFIG_NAMES:
        return CONFIG_NAMES[name]
    try:
        return Kind(name)
    except ValueError:
        raise ConfigurationError(f"unknown feature-map kind {name!r}") from None


@dataclass(frozen=True)
class FeatureMapSpec:
    kind: Kind
    n_qubits: int
    reps: int = 2
    entanglement: str = "full"

    def __post_init__(self):
        object.__setattr__(self, "kind", parse_kind(self.kind))
        if not 1 <= self.n_qubits <= statevec.MAX_QUBITS:
            raise ConfigurationError(f"n_qubits must be in [1, {statevec.MAX_QUBITS}]")
        if self.reps < 1:
            raise ConfigurationError(f"reps must be >= 1, got {self.reps}")
        if self.entanglement != "full":
            raise ConfigurationError("only full entanglement is supported")


def phi_single(kind, x_i: float) -> float:
    return float(x_i)


def pair_angles(kind: Kind, xi: np.ndarray, xj: np.ndarray) -> np.ndarray:
    """Vectorized pair angle for arrays of feature values."""
    kind = parse_kind(kind)
    xi = np.asarray(xi, dtype=np.float64)
    xj = np.asarray(xj, dtype=np.float64)
    if kind in (Kind.ZZ, Kind.DEFAULT):
        return (np.pi - xi) * (np.pi - xj)
    if kind is Kind.SUZUKI8:
        return np.pi * xi * xj
    if kind is Kind.SUZUKI9:
        return (np.pi / 2) * (1 - xi) * (1 - xj)
    if kind is Kind.SUZUKI10:
        exponent = (xi - xj) ** 2 * (math.log(np.pi) / 8)
        if np.any(exponent > SUZUKI10_MAX_EXPONENT):
            raise EncodingRangeError(
                f"suzuki10 exponent {float(np.max(exponent)):.3g} exceeds {SUZUKI10_MAX_EXPONENT}"
            )
        return np.exp(exponent)
    if kind is Kind.SUZUKI11:
        denom = 3 * np.cos(xi) * np.cos(xj)
        if np.any(np.abs(denom) < 3 * SUZUKI11_MIN_DENOMINATOR):
            k = int(np.argmax(np.abs(denom) < 3 * SUZUKI11_MIN_DENOMINATOR))
            raise SingularEncodingError(
                f"suzuki11 denominator vanishes at (x_i, x_j) = "
                f"({np.ravel(xi * np.ones_like(xj))[k]:.6g}, {np.ravel(xj * np.ones_like(xi))[k]:.6g})"
            )
        return np.pi / denom
    if kind is Kind.SUZUKI12:
        return np.pi * np.cos(xi) * np.cos(xj)
    raise ConfigurationError(f"unhandled kind {kind}")


def phi_pair(kind, x_i: float, x_j: float) -> float:
    return float(pair_angles(kind, x_i, x_j))


def _check_width(spec: FeatureMapSpec, X: np.ndarray) -> None:
    if X.shape[-1] != spec.n_qubits:
        raise ContractError(
            f"feature vector has {X.shape[-1]} entries, feature map expects {spec.n_qubits}"
        )
    if not np.all(np.isfinite(X)):
        raise ContractError("feature vector contains non-finite values")


def phases_batch(spec: FeatureMapSpec, X: np.ndarray) -> np.ndarray:
    """``(N, 2**n)`` diagonal phases for a ``(N, n)`` batch of feature vectors.

    Built qubit by qubit: appending qubit ``k`` doubles the table as
    ``[p + l_k, p - l_k]`` where ``l_k = x_k + sum_{i<k} phi_ik z_i`` is itself
    grown by doubling, so the cost is O(2**n) per sample.
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    _check_width(spec, X)
    N, n = X.shape
    if spec.kind is Kind.SUZUKI11:
        for i, j in combinations(range(n), 2):
            bad = np.abs(np.cos(X[:, i]) * np.cos(X[:, j])) < SUZUKI11_MIN_DENOMINATOR
            if np.any(bad):
                row = int(np.flatnonzero(bad)[0])
                raise SingularEncodingError(
                    f"suzuki11 pair ({i}, {j}) of sample {row}: |cos(x_{i}) cos(x_{j})| "
                    f"< {SUZUKI11_MIN_DENOMINATOR}"
                )
    phases = np.zeros((N, 1))
    for k in range(n):
        lin = X[:, k:k + 1].copy()
        for i in range(k):
            angle = pair_angles(spec.kind, X[:, i], X[:, k])[:, None]
            lin = np.concatenate((lin + angle, lin - angle), axis=1)
        phases = np.concatenate((phases + lin, phases - lin), axis=1)
    return phases


def diagonal_phases(spec: FeatureMapSpec, x) -> PhaseVector:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ContractError("diagonal_phases takes a single feature vector")
    return PhaseVector(spec.n_qubits, phases_batch(spec, x)[0])


def prepare_batch(spec: FeatureMapSpec, X: np.ndarray, initial: np.ndarray | None = None) -> np.ndarray:
    """Feature states for a batch, optionally starting from ``initial`` instead of ``|0^n>``."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    phase_factors = np.exp(1j * phases_batch(spec, X))
    if initial is None:
        amps = np.zeros((X.shape[0], 1 << spec.n_qubits), dtype=np.complex128)
        amps[:, 0] = 1.0
    else:
        amps = np.broadcast_to(np.asarray(initial, dtype=np.complex128), phase_factors.shape).copy()
    for _ in range(spec.reps):
        amps = statevec.hadamard_batch(amps)
        amps *= phase_factors
    return amps


def unprepare_batch(spec: FeatureMapSpec, X: np.ndarray, amps: np.ndarray) -> np.ndarray:
    """Apply the adjoint feature-map circuit: reversed blocks, negated phases."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    inverse_factors = np.exp(-1j * phases_batch(spec, X))
    out = np.array(amps, dtype=np.complex128, copy=True)
    for _ in range(spec.reps):
        out *= inverse_factors
        out = statevec.hadamard_batch(out)
    return out


def prepare_state(spec: FeatureMapSpec, x, initial: Statevector | None = None) -> Statevector:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ContractError("prepare_state takes a single feature vector")
    init = None if initial is None else initial.amplitudes
    return Statevector(spec.n_qubits, prepare_batch(spec, x, init)[0])
