"""Statevector engine restricted to Hadamard layers and diagonal phase layers.

Basis convention: qubit ``i`` is bit ``i`` of the basis index (bit 0 least
significant). ``Z`` has eigenvalue +1 on a 0 bit and -1 on a 1 bit.

Every public operation returns a fresh :class:`Statevector`; amplitude arrays
held by a state are marked read-only. The ``*_batch`` helpers work on raw
``(..., 2**n)`` complex arrays and are what the kernel code uses internally.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from qkbench.errors import ConfigurationError, ContractError

MAX_QUBITS = 24


def _check_qubits(n_qubits: int) -> None:
    if not isinstance(n_qubits, (int, np.integer)) or not 1 <= n_qubits <= MAX_QUBITS:
        raise ConfigurationError(
            f"n_qubits must be an integer in [1, {MAX_QUBITS}], got {n_qubits!r}"
        )


@dataclass(frozen=True)
class Statevector:
    """Pure state of an n-qubit register as ``2**n`` complex amplitudes."""

    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        _check_qubits(self.n_qubits)
        amps = np.array(self.amplitudes, dtype=np.complex128)
        if amps.shape != (1 << self.n_qubits,):
            raise ContractError(
                f"expected {1 << self.n_qubits} amplitudes for {self.n_qubits} qubits, "
                f"got shape {amps.shape}"
            )
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_array(cls, amplitudes) -> "Statevector":
        amps = np.asarray(amplitudes, dtype=np.complex128)
        n = int(amps.size).bit_length() - 1
        if amps.ndim != 1 or amps.size != 1 << n:
            raise ContractError(f"amplitude count {amps.size} is not a power of two")
        return cls(n, amps)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


@dataclass(frozen=True)
class PhaseVector:
    """Diagonal of a computational-basis phase gate, in radians."""

    n_qubits: int
    phases: np.ndarray

    def __post_init__(self):
        _check_qubits(self.n_qubits)
        phases = np.array(self.phases, dtype=np.float64)
        if phases.shape != (1 << self.n_qubits,):
            raise ContractError(
                f"expected {1 << self.n_qubits} phases for {self.n_qubits} qubits, "
                f"got shape {phases.shape}"
            )
        if not np.all(np.isfinite(phases)):
            raise ContractError("phase vector contains non-finite entries")
        phases.flags.writeable = False
        object.__setattr__(self, "phases", phases)


def z_eigenvalues(n_qubits: int) -> np.ndarray:
    """``(n, 2**n)`` int8 table of ``z_i(b)`` for every qubit ``i`` and basis index ``b``."""
    b = np.arange(1 << n_qubits, dtype=np.int64)
    bits = (b[None, :] >> np.arange(n_qubits, dtype=np.int64)[:, None]) & 1
    return (1 - 2 * bits).astype(np.int8)


def hadamard_batch(amps: np.ndarray) -> np.ndarray:
    """Normalized Walsh-Hadamard transform along the last axis (returns a new array)."""
    out = np.array(amps, dtype=np.complex128, copy=True)
    dim = out.shape[-1]
    n = dim.bit_length() - 1
    lead = out.shape[:-1]
    half = 1
    while half < dim:
        view = out.reshape(*lead, dim // (2 * half), 2, half)
        a = view[..., 0, :].copy()
        b = view[..., 1, :]
        view[..., 0, :] += b
        view[..., 1, :] = a - b
        half *= 2
    out *= 2.0 ** (-n / 2)
    return out


def ry_layer_batch(amps: np.ndarray, angles) -> np.ndarray:
    """Apply ``RY(angles[i])`` to qubit ``i`` of every state along the last axis."""
    out = np.array(amps, dtype=np.complex128, copy=True)
    dim = out.shape[-1]
    lead = out.shape[:-1]
    angles = np.asarray(angles, dtype=np.float64)
    if angles.shape != (dim.bit_length() - 1,):
        raise ContractError(f"expected {dim.bit_length() - 1} rotation angles, got {angles.shape}")
    for i, theta in enumerate(angles):
        c, s = np.cos(theta / 2), np.sin(theta / 2)
        view = out.reshape(*lead, dim >> (i + 1), 2, 1 << i)
        a0 = view[..., 0, :].copy()
        a1 = view[..., 1, :].copy()
        view[..., 0, :] = c * a0 - s * a1
        view[..., 1, :] = s * a0 + c * a1
    return out


def phase_batch(amps: np.ndarray, phases: np.ndarray) -> np.ndarray:
    """Multiply amplitudes by ``exp(i * phases)`` elementwise (broadcasting)."""
    return amps * np.exp(1j * phases)


def zero_state(n_qubits: int) -> Statevector:
    _check_qubits(n_qubits)
    amps = np.zeros(1 << n_qubits, dtype=np.complex128)
    amps[0] = 1.0
    return Statevector(n_qubits, amps)


def hadamard_all(state: Statevector) -> Statevector:
    """Apply ``H`` to every qubit."""
    return Statevector(state.n_qubits, hadamard_batch(state.amplitudes))


def apply_phases(state: Statevector, phases: PhaseVector) -> Statevector:
    if state.n_qubits != phases.n_qubits:
        raise ContractError(
            f"phase vector is for {phases.n_qubits} qubits, state has {state.n_qubits}"
        )
    return Statevector(state.n_qubits, phase_batch(state.amplitudes, phases.phases))


def inner_product(a: Statevector, b: Statevector) -> complex:
    """``<a|b>`` with the first argument conjugated."""
    if a.n_qubits != b.n_qubits:
        raise ContractError(f"qubit counts differ: {a.n_qubits} vs {b.n_qubits}")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def make_rng(*key: int) -> np.random.Generator:
    """Counter-based (Philox) generator keyed by a tuple of non-negative integers."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(k) for k in key])))


def sample_outcomes(probabilities: np.ndarray, shots: int, rng: np.random.Generator) -> np.ndarray:
    """Draw basis indices by inverse-CDF lookup of uniform variates."""
    cdf = np.cumsum(probabilities)
    cdf /= cdf[-1]
    u = rng.random(shots)
    return np.minimum(np.searchsorted(cdf, u, side="right"), cdf.size - 1)


def sample_zero_frequency(state: Statevector, shots: int, seed: int) -> float:
    """Fraction of ``shots`` simulated measurements that return the all-zero bitstring."""
    if not isinstance(shots, (int, np.integer)) or shots < 1:
        raise ConfigurationError(f"shots must be a positive integer, got {shots!r}")
    outcomes = sample_outcomes(state.probabilities(), int(shots), make_rng(seed))
    return float(np.count_nonzero(outcomes == 0)) / shots
