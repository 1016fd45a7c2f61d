"""Soft-margin SVMs over precomputed kernel matrices.

The binary solver is SMO with maximal-violating-pair working-set selection.
It only ever sees the Gram matrix, so quantum and classical kernels run
through identical code. Multiclass problems use the all-pairs (one-vs-one)
scheme with majority voting.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from qkbench.errors import ConfigurationError, ContractError, ConvergenceError, DataError

DEFAULT_C = 1.0
DEFAULT_TOL = 1e-6
_TAU = 1e-12


class ClassicalKind(str, enum.Enum):
    LINEAR = "linear"
    RBF = "rbf"
    POLY = "poly"
    SIGMOID = "sigmoid"


@dataclass(frozen=True)
class ClassicalKernelSpec:
    """Classical kernel; ``None`` hyperparameters are filled by :meth:`resolve`.

    ``a``/``b`` are the offset/degree for ``poly`` and the slope/offset for
    ``sigmoid``.
    """

    kind: ClassicalKind
    sigma: float | None = None
    a: float | None = None
    b: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", ClassicalKind(self.kind))
        if self.kind is ClassicalKind.RBF and self.sigma is not None and self.sigma <= 0:
            raise ConfigurationError(f"rbf sigma must be > 0, got {self.sigma}")
        if self.kind is ClassicalKind.POLY and self.b is not None:
            if self.b < 1 or float(self.b) != int(self.b):
                raise ConfigurationError(f"poly degree must be an integer >= 1, got {self.b}")

    def resolve(self, X) -> "ClassicalKernelSpec":
        """Fill unset hyperparameters from training data ``X``."""
        X = np.asarray(X, dtype=np.float64)
        d = X.shape[1]
        sigma, a, b = self.sigma, self.a, self.b
        if self.kind is ClassicalKind.RBF and sigma is None:
            var = float(X.var())
            sigma = math.sqrt(d * var / 2) if var > 0 else 1.0
        elif self.kind is ClassicalKind.POLY:
            a = 0.0 if a is None else a
            b = 3 if b is None else b
        elif self.kind is ClassicalKind.SIGMOID:
            a = 1.0 / d if a is None else a
            b = 0.0 if b is None else b
        return ClassicalKernelSpec(self.kind, sigma, a, b)


def classical_gram(spec: ClassicalKernelSpec, A, B) -> np.ndarray:
    A = np.atleast_2d(np.asarray(A, dtype=np.float64))
    B = np.atleast_2d(np.asarray(B, dtype=np.float64))
    if A.shape[1] != B.shape[1]:
        raise ContractError(f"feature counts differ: {A.shape[1]} vs {B.shape[1]}")
    dots = A @ B.T
    if spec.kind is ClassicalKind.LINEAR:
        return dots
    if spec.kind is ClassicalKind.RBF:
        if spec.sigma is None:
            raise ConfigurationError("rbf sigma unset; call resolve() first")
        sq = (A * A).sum(1)[:, None] + (B * B).sum(1)[None, :] - 2 * dots
        return np.exp(-np.clip(sq, 0.0, None) / (2 * spec.sigma**2))
    if spec.a is None or spec.b is None:
        raise ConfigurationError(f"{spec.kind.value} parameters unset; call resolve() first")
    if spec.kind is ClassicalKind.POLY:
        return (dots + spec.a) ** int(spec.b)
    return np.tanh(spec.a * dots - spec.b)


def classical_kernel(spec: ClassicalKernelSpec, x, y) -> float:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ContractError("classical_kernel takes two equal-length vectors")
    if spec.kind is ClassicalKind.RBF:
        return float(np.exp(-np.sum((x - y) ** 2) / (2 * spec.sigma**2)))
    return float(classical_gram(spec, x[None], y[None])[0, 0])


@dataclass
class BinaryModel:
    alpha_y: np.ndarray
    support_indices: np.ndarray
    bias: float
    c: float
    dual_objective: float = float("nan")
    iterations: int = 0

    @property
    def alpha(self) -> np.ndarray:
        return np.abs(self.alpha_y)


def _as_square(K) -> np.ndarray:
    E = np.asarray(getattr(K, "entries", K), dtype=np.float64)
    if E.ndim != 2 or E.shape[0] != E.shape[1]:
        raise ContractError(f"expected a square kernel matrix, got shape {E.shape}")
    return E


def _check_binary_labels(labels, n) -> np.ndarray:
    y = np.asarray(labels, dtype=np.float64)
    if y.shape != (n,):
        raise ContractError(f"expected {n} labels, got shape {y.shape}")
    if not np.all((y == 1) | (y == -1)):
        raise ContractError("binary labels must be +1 or -1")
    if np.all(y == 1) or np.all(y == -1):
        raise ContractError("both classes must be present")
    return y


def dual_objective(K, y, alpha) -> float:
    """``sum(alpha) - 1/2 (alpha*y)^T K (alpha*y)``."""
    ay = np.asarray(alpha) * np.asarray(y)
    return float(np.sum(alpha) - 0.5 * ay @ _as_square(K) @ ay)


def smo_train(K, labels, c: float = DEFAULT_C, tol: float = DEFAULT_TOL, max_iter: int | None = None) -> BinaryModel:
    """Solve ``max sum(a) - 1/2 a^T Q a`` s.t. ``0 <= a <= c``, ``y^T a = 0``.

    Stops when the maximal KKT violation ``m(a) - M(a)`` drops below ``tol``.
    """
    E = _as_square(K)
    n = E.shape[0]
    y = _check_binary_labels(labels, n)
    if c <= 0:
        raise ConfigurationError(f"c must be > 0, got {c}")
    if max_iter is None:
        max_iter = max(100_000, 10 * n * n)

    Q = E * np.outer(y, y)
    diag = np.diag(Q).copy()
    alpha = np.zeros(n)
    grad = -np.ones(n)
    pos = y > 0

    it = 0
    gap = math.inf
    while True:
        up = (pos & (alpha < c)) | (~pos & (alpha > 0))
        low = (pos & (alpha > 0)) | (~pos & (alpha < c))
        score = -y * grad
        s_up = np.where(up, score, -np.inf)
        s_low = np.where(low, score, np.inf)
        i = int(np.argmax(s_up))
        j = int(np.argmin(s_low))
        gap = s_up[i] - s_low[j]
        if gap < tol:
            break
        if it >= max_iter:
            raise ConvergenceError(
                f"SMO did not converge in {max_iter} iterations; KKT residual {gap:.3g} > {tol:.3g}"
            )
        it += 1

        old_i, old_j = alpha[i], alpha[j]
        if y[i] != y[j]:
            quad = max(diag[i] + diag[j] + 2 * Q[i, j], _TAU)
            delta = (-grad[i] - grad[j]) / quad
            diff = old_i - old_j
            ai, aj = old_i + delta, old_j + delta
            if diff > 0:
                if aj < 0:
                    aj, ai = 0.0, diff
            elif ai < 0:
                ai, aj = 0.0, -diff
            if diff > 0:
                if ai > c:
                    ai, aj = c, c - diff
            elif aj > c:
                aj, ai = c, c + diff
        else:
            quad = max(diag[i] + diag[j] - 2 * Q[i, j], _TAU)
            delta = (grad[i] - grad[j]) / quad
            total = old_i + old_j
            ai, aj = old_i - delta, old_j + delta
            if total > c:
                if ai > c:
                    ai, aj = c, total - c
            elif aj < 0:
                aj, ai = 0.0, total
            if total > c:
                if aj > c:
                    aj, ai = c, total - c
            elif ai < 0:
                ai, aj = 0.0, total
        alpha[i], alpha[j] = ai, aj
        grad += Q[:, i] * (ai - old_i) + Q[:, j] * (aj - old_j)

    score = -y * grad
    free = (alpha > 0) & (alpha < c)
    if np.any(free):
        bias = float(np.mean(score[free]))
    else:
        up = (pos & (alpha < c)) | (~pos & (alpha > 0))
        low = (pos & (alpha > 0)) | (~pos & (alpha < c))
        hi = np.min(score[low]) if np.any(low) else np.max(score)
        lo = np.max(score[up]) if np.any(up) else np.min(score)
        bias = float((hi + lo) / 2)

    sv = np.flatnonzero(alpha > 0)
    objective = float(np.sum(alpha) - 0.5 * alpha @ Q @ alpha)
    return BinaryModel(
        alpha_y=alpha[sv] * y[sv],
        support_indices=sv,
        bias=bias,
        c=float(c),
        dual_objective=objective,
        iterations=it,
    )


def predict_binary(model: BinaryModel, k_row) -> tuple[float, int]:
    """Decision value and ``+1/-1`` label for one sample; ``sign(0)`` is +1."""
    k_row = np.asarray(k_row, dtype=np.float64)
    if model.support_indices.size and (k_row.ndim != 1 or k_row.size <= model.support_indices.max()):
        raise ContractError("kernel row does not cover every support index")
    decision = float(model.alpha_y @ k_row[model.support_indices]) + model.bias
    return decision, 1 if decision >= 0 else -1


def _decisions(model: BinaryModel, K_rows: np.ndarray) -> np.ndarray:
    if model.support_indices.size and K_rows.shape[1] <= model.support_indices.max():
        raise ContractError("kernel rows do not cover every support index")
    return K_rows[:, model.support_indices] @ model.alpha_y + model.bias


@dataclass
class OvoModel:
    classes: list
    pair_models: dict = field(default_factory=dict)


def ovo_train(K, labels, c: float = DEFAULT_C, tol: float = DEFAULT_TOL, classes=None) -> OvoModel:
    """One binary SMO model per unordered class pair; the lower class is ``+1``."""
    E = _as_square(K)
    labels = np.asarray(labels)
    if labels.shape != (E.shape[0],):
        raise ContractError(f"expected {E.shape[0]} labels, got shape {labels.shape}")
    present = sorted(np.unique(labels).tolist())
    classes = present if classes is None else list(classes)
    missing = [k for k in classes if k not in present]
    if missing:
        raise DataError(f"classes without training samples: {missing}")
    if len(classes) < 2:
        raise ContractError("need at least two classes")

    model = OvoModel(classes=classes)
    for a, b in combinations(classes, 2):
        idx = np.flatnonzero((labels == a) | (labels == b))
        y = np.where(labels[idx] == a, 1.0, -1.0)
        sub = smo_train(E[np.ix_(idx, idx)], y, c, tol)
        sub.support_indices = idx[sub.support_indices]
        model.pair_models[(a, b)] = sub
    return model


def ovo_predict(model: OvoModel, K_cross) -> np.ndarray:
    """Majority vote; ties go to the larger summed ``|decision|``, then class order."""
    R = np.atleast_2d(np.asarray(getattr(K_cross, "entries", K_cross), dtype=np.float64))
    k = len(model.classes)
    pos = {cls: t for t, cls in enumerate(model.classes)}
    votes = np.zeros((R.shape[0], k), dtype=np.int64)
    strength = np.zeros((R.shape[0], k))
    rows = np.arange(R.shape[0])
    for (a, b), sub in model.pair_models.items():
        d = _decisions(sub, R)
        winner = np.where(d >= 0, pos[a], pos[b])
        votes[rows, winner] += 1
        strength[rows, winner] += np.abs(d)
    out = []
    for r in range(R.shape[0]):
        tied = np.flatnonzero(votes[r] == votes[r].max())
        if tied.size > 1:
            best = strength[r, tied].max()
            tied = tied[strength[r, tied] == best]
        out.append(model.classes[int(tied[0])])
    return np.array(out)
