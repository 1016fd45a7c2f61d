"""Quantum kernel alignment with a trainable ``RY`` fiducial layer.

The trained kernel is ``K_lam(x, y) = |<0|U_lam^dag D(x)^dag D(y) U_lam|0>|^2``,
where ``D`` is a base feature-map circuit and ``U_lam`` rotates qubit ``i`` by
``RY(lam_i)``. The parameters are fitted with SPSA on the SVM dual objective.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from qkbench import qkernel, statevec, svm
from qkbench.errors import ConfigurationError, ContractError
from qkbench.featuremap import FeatureMapSpec
from qkbench.qkernel import EXACT, GramMatrix

INITIAL_LAMBDA = 0.1


@dataclass(frozen=True)
class CovariantKernelSpec:
    base: FeatureMapSpec

    @property
    def lambda_dim(self) -> int:
        return self.base.n_qubits


@dataclass(frozen=True)
class QkaConfig:
    max_iterations: int = 10
    learning_rate: float = 0.05
    perturbation: float = 0.05
    svm_c: float = svm.DEFAULT_C
    seed: int = 0

    def __post_init__(self):
        if self.max_iterations < 0:
            raise ConfigurationError("max_iterations must be >= 0")
        if self.learning_rate <= 0 or self.perturbation <= 0:
            raise ConfigurationError("learning_rate and perturbation must be > 0")
        if self.svm_c <= 0:
            raise ConfigurationError("svm_c must be > 0")


@dataclass
class QkaResult:
    lambda_star: np.ndarray
    loss_history: list = field(default_factory=list)
    initial_loss: float = float("nan")

    def to_dict(self) -> dict:
        return {
            "lambda_star": [float(v) for v in self.lambda_star],
            "loss_history": [float(v) for v in self.loss_history],
            "initial_loss": float(self.initial_loss),
        }


def _check_lambda(lam, n_qubits: int) -> np.ndarray:
    lam = np.asarray(lam, dtype=np.float64)
    if lam.shape != (n_qubits,):
        raise ContractError(f"expected {n_qubits} fiducial angles, got shape {lam.shape}")
    return lam


def fiducial_state(lam, n_qubits: int) -> statevec.Statevector:
    lam = _check_lambda(lam, n_qubits)
    amps = statevec.ry_layer_batch(statevec.zero_state(n_qubits).amplitudes, lam)
    return statevec.Statevector(n_qubits, amps)


def kernel_entry_lambda(spec: CovariantKernelSpec, lam, x, y, mode=EXACT) -> float:
    lam = _check_lambda(lam, spec.lambda_dim)
    return qkernel.kernel_entry(spec.base, x, y, mode, fiducial=lam)


def gram_lambda(spec: CovariantKernelSpec, lam, X, mode=EXACT) -> GramMatrix:
    lam = _check_lambda(lam, spec.lambda_dim)
    return qkernel.gram(spec.base, X, mode, fiducial=lam)


def cross_gram_lambda(spec: CovariantKernelSpec, lam, A, B, mode=EXACT) -> GramMatrix:
    lam = _check_lambda(lam, spec.lambda_dim)
    return qkernel.cross_gram(spec.base, A, B, mode, fiducial=lam)


def svc_loss(K, labels, c: float) -> float:
    """Optimal SVM dual objective for kernel ``K`` (smaller means a wider margin)."""
    E = np.asarray(getattr(K, "entries", K), dtype=np.float64)
    if E.ndim != 2 or E.shape[0] != E.shape[1] or not np.allclose(E, E.T, rtol=0, atol=1e-12):
        raise ContractError("svc_loss requires a symmetric kernel matrix")
    if c <= 0:
        raise ConfigurationError(f"c must be > 0, got {c}")
    return svm.smo_train(E, labels, c, svm.DEFAULT_TOL).dual_objective


def binary_targets(labels, pair=None) -> np.ndarray:
    """Reduce class labels to ``+1/-1``.

    Two-class input maps the lower class to ``+1``. With more classes the
    rarest class (lowest label on ties) is ``+1`` against the rest, unless
    ``pair=(a, b)`` is given, in which case samples of other classes get 0
    and are dropped by the caller.
    """
    labels = np.asarray(labels)
    classes, counts = np.unique(labels, return_counts=True)
    if classes.size < 2:
        raise ContractError("kernel alignment needs two classes")
    if pair is not None:
        a, b = pair
        return np.where(labels == a, 1.0, np.where(labels == b, -1.0, 0.0))
    if classes.size == 2:
        return np.where(labels == classes[0], 1.0, -1.0)
    rare = classes[int(np.argmin(counts))]
    return np.where(labels == rare, 1.0, -1.0)


def spsa_train(spec: CovariantKernelSpec, X, labels, cfg: QkaConfig, pair=None) -> QkaResult:
    """Fit fiducial angles by SPSA with constant gains.

    ``labels`` may be ``+1/-1`` or multiclass (see :func:`binary_targets`).
    """
    X = np.asarray(X, dtype=np.float64)
    y = binary_targets(labels, pair)
    if pair is not None:
        keep = y != 0
        X, y = X[keep], y[keep]
    if X.shape[0] < 2 or np.unique(y).size < 2:
        raise ContractError("kernel alignment needs at least two samples from two classes")

    def loss(lam):
        return svc_loss(gram_lambda(spec, lam, X), y, cfg.svm_c)

    rng = np.random.default_rng(cfg.seed)
    lam = np.full(spec.lambda_dim, INITIAL_LAMBDA)
    result = QkaResult(lambda_star=lam.copy(), initial_loss=loss(lam))
    c = cfg.perturbation
    for _ in range(cfg.max_iterations):
        delta = rng.choice(np.array([-1.0, 1.0]), size=spec.lambda_dim)
        g = (loss(lam + c * delta) - loss(lam - c * delta)) / (2 * c) * delta
        lam = lam - cfg.learning_rate * g
        result.loss_history.append(loss(lam))
    result.lambda_star = lam
    return result
