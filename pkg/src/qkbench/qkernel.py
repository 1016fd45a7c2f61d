"""Fidelity quantum kernels ``K(x, y) = |<0|U(x)^dagger U(y)|0>|^2``.

Exact mode takes overlaps of simulated statevectors. Sampled mode runs the
composed circuit ``U(x)^dagger U(y)|0>`` and counts all-zero outcomes over a
finite number of shots, with one Philox stream per matrix entry keyed by
``(seed, i, j)`` so that results do not depend on evaluation order.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from qkbench import featuremap, statevec
from qkbench.errors import ConfigurationError, ContractError, FormatError, ResourceError
from qkbench.featuremap import FeatureMapSpec

DEFAULT_SHOTS = 1024
DEFAULT_MEMORY_BUDGET = 1 << 30

_MAGIC = b"QKGM"
_VERSION = 1
_HEADER = struct.Struct("<4sIQQBQQ")


@dataclass(frozen=True)
class Sampled:
    """Shot-sampling mode for kernel estimation."""

    shots: int = DEFAULT_SHOTS
    seed: int = 0

    def __post_init__(self):
        if self.shots < 1:
            raise ConfigurationError(f"shots must be >= 1, got {self.shots}")


EXACT = "exact"


@dataclass
class GramMatrix:
    entries: np.ndarray
    mode: str = EXACT
    shots: int = 0
    seed: int = 0
    symmetric: bool = False
    meta: dict = field(default_factory=dict)

    @property
    def size_a(self) -> int:
        return self.entries.shape[0]

    @property
    def size_b(self) -> int:
        return self.entries.shape[1]

    @classmethod
    def from_array(cls, entries, symmetric: bool | None = None) -> "GramMatrix":
        entries = np.asarray(entries, dtype=np.float64)
        if symmetric is None:
            symmetric = entries.shape[0] == entries.shape[1] and np.array_equal(entries, entries.T)
        return cls(entries, symmetric=symmetric)

    def save(self, path) -> None:
        """Write the flat binary QKGM format (little-endian header + row-major f8)."""
        mode_tag = 0 if self.mode == EXACT else 1
        header = _HEADER.pack(
            _MAGIC, _VERSION, self.size_a, self.size_b, mode_tag, self.shots, self.seed
        )
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(np.ascontiguousarray(self.entries, dtype="<f8").tobytes())

    @classmethod
    def load(cls, path) -> "GramMatrix":
        data = Path(path).read_bytes()
        if len(data) < _HEADER.size:
            raise FormatError(f"{path}: truncated QKGM header")
        magic, version, size_a, size_b, mode_tag, shots, seed = _HEADER.unpack_from(data)
        if magic != _MAGIC:
            raise FormatError(f"{path}: bad magic {magic!r}")
        if version != _VERSION:
            raise FormatError(f"{path}: unsupported QKGM version {version}")
        if mode_tag not in (0, 1):
            raise FormatError(f"{path}: unknown mode tag {mode_tag}")
        body = data[_HEADER.size:]
        if len(body) != 8 * size_a * size_b:
            raise FormatError(f"{path}: expected {size_a * size_b} entries")
        entries = np.frombuffer(body, dtype="<f8").reshape(size_a, size_b).astype(np.float64)
        mode = EXACT if mode_tag == 0 else "sampled"
        symmetric = size_a == size_b and np.array_equal(entries, entries.T)
        return cls(entries, mode=mode, shots=shots, seed=seed, symmetric=symmetric)


def _as_matrix(spec: FeatureMapSpec, X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2 or X.shape[0] == 0:
        raise ContractError("expected a nonempty list of feature vectors")
    if X.shape[1] != spec.n_qubits:
        raise ContractError(
            f"feature vectors have {X.shape[1]} entries, feature map expects {spec.n_qubits}"
        )
    return X


def _zero_count(probabilities: np.ndarray, shots: int, rng: np.random.Generator) -> float:
    outcomes = statevec.sample_outcomes(probabilities, shots, rng)
    return float(np.count_nonzero(outcomes == 0)) / shots


def kernel_entry(spec: FeatureMapSpec, x, y, mode=EXACT, fiducial: np.ndarray | None = None) -> float:
    """Single kernel value; ``fiducial`` angles prepend a per-qubit ``RY`` layer."""
    x = _as_matrix(spec, x)
    y = _as_matrix(spec, y)
    if x.shape[0] != 1 or y.shape[0] != 1:
        raise ContractError("kernel_entry takes two single feature vectors")
    if mode == EXACT:
        sx = _prepare(spec, x, fiducial)[0]
        sy = _prepare(spec, y, fiducial)[0]
        return float(abs(np.vdot(sx, sy)) ** 2)
    composed = _composed(spec, x, _prepare(spec, y, fiducial), fiducial)[0]
    return _zero_count(np.abs(composed) ** 2, mode.shots, statevec.make_rng(mode.seed))


def _initial(spec, fiducial):
    if fiducial is None:
        return None
    return statevec.ry_layer_batch(statevec.zero_state(spec.n_qubits).amplitudes, fiducial)


def _prepare(spec, X, fiducial):
    return featuremap.prepare_batch(spec, X, _initial(spec, fiducial))


def _composed(spec, x, states, fiducial):
    """``U_fid^dagger U(x)^dagger`` applied to each row of ``states``."""
    out = featuremap.unprepare_batch(spec, x, states)
    if fiducial is not None:
        # RY layers on distinct qubits commute, so the adjoint is RY(-angles).
        out = statevec.ry_layer_batch(out, -np.asarray(fiducial, dtype=np.float64))
    return out


def _states_fit(n_states: int, n_qubits: int, budget: int) -> bool:
    return n_states * (16 << n_qubits) <= budget


def gram(
    spec: FeatureMapSpec,
    X,
    mode=EXACT,
    *,
    memory_budget: int = DEFAULT_MEMORY_BUDGET,
    blocked: bool = True,
    fiducial: np.ndarray | None = None,
) -> GramMatrix:
    """Symmetric kernel matrix over ``X``; diagonal fixed at 1."""
    X = _as_matrix(spec, X)
    n = X.shape[0]
    block = _block_rows(n, spec.n_qubits, memory_budget, blocked, factor=2)
    K = np.eye(n)
    if mode == EXACT:
        for r0 in range(0, n, block):
            rows = _prepare(spec, X[r0:r0 + block], fiducial)
            for c0 in range(r0, n, block):
                cols = rows if c0 == r0 else _prepare(spec, X[c0:c0 + block], fiducial)
                K[r0:r0 + block, c0:c0 + block] = np.abs(np.conj(rows) @ cols.T) ** 2
        K = np.triu(K, 1)
        K = K + K.T
        np.fill_diagonal(K, 1.0)
        return GramMatrix(K, symmetric=True)

    for r0 in range(0, n, block):
        for c0 in range(r0, n, block):
            cols = _prepare(spec, X[c0:c0 + block], fiducial)
            for i in range(r0, min(r0 + block, n)):
                lo = max(c0, i + 1)
                hi = min(c0 + block, n)
                if lo >= hi:
                    continue
                probs = np.abs(_composed(spec, X[i], cols[lo - c0:hi - c0], fiducial)) ** 2
                for j in range(lo, hi):
                    rng = statevec.make_rng(mode.seed, i, j)
                    K[i, j] = K[j, i] = _zero_count(probs[j - lo], mode.shots, rng)
    return GramMatrix(K, mode="sampled", shots=mode.shots, seed=mode.seed, symmetric=True)


def cross_gram(
    spec: FeatureMapSpec,
    A,
    B,
    mode=EXACT,
    *,
    memory_budget: int = DEFAULT_MEMORY_BUDGET,
    blocked: bool = True,
    fiducial: np.ndarray | None = None,
) -> GramMatrix:
    """Rectangular kernel block ``K[i, j] = k(A[i], B[j])``."""
    A = _as_matrix(spec, A)
    B = _as_matrix(spec, B)
    block = _block_rows(max(A.shape[0], B.shape[0]), spec.n_qubits, memory_budget, blocked, factor=2)
    K = np.empty((A.shape[0], B.shape[0]))
    for c0 in range(0, B.shape[0], block):
        cols = _prepare(spec, B[c0:c0 + block], fiducial)
        if mode == EXACT:
            for r0 in range(0, A.shape[0], block):
                rows = _prepare(spec, A[r0:r0 + block], fiducial)
                K[r0:r0 + block, c0:c0 + block] = np.abs(np.conj(rows) @ cols.T) ** 2
            continue
        for i in range(A.shape[0]):
            probs = np.abs(_composed(spec, A[i], cols, fiducial)) ** 2
            for jj in range(cols.shape[0]):
                j = c0 + jj
                K[i, j] = _zero_count(probs[jj], mode.shots, statevec.make_rng(mode.seed, i, j))
    if mode == EXACT:
        return GramMatrix(K)
    return GramMatrix(K, mode="sampled", shots=mode.shots, seed=mode.seed)


def _block_rows(n: int, n_qubits: int, budget: int, blocked: bool, factor: int) -> int:
    if _states_fit(factor * n, n_qubits, budget):
        return max(n, 1)
    if not blocked:
        raise ResourceError(
            f"{factor * n} statevectors of {n_qubits} qubits exceed the "
            f"{budget / 2**20:.0f} MiB budget; pass blocked=True to recompute states in blocks"
        )
    per_block = budget // (factor * (16 << n_qubits))
    if per_block < 1:
        raise ResourceError(
            f"a single {n_qubits}-qubit statevector pair exceeds the {budget / 2**20:.0f} MiB budget"
        )
    return int(per_block)


def psd_clip(K: GramMatrix) -> GramMatrix:
    """Nearest PSD matrix by zeroing negative eigenvalues; the diagonal is not rescaled."""
    E = np.asarray(K.entries, dtype=np.float64)
    if E.ndim != 2 or E.shape[0] != E.shape[1] or not np.allclose(E, E.T, rtol=0, atol=1e-12):
        raise ContractError("psd_clip requires a symmetric square matrix")
    w, V = np.linalg.eigh((E + E.T) / 2)
    repaired = (V * np.clip(w, 0.0, None)) @ V.T
    repaired = (repaired + repaired.T) / 2
    return GramMatrix(
        repaired, mode=K.mode, shots=K.shots, seed=K.seed, symmetric=True, meta=dict(K.meta)
    )
