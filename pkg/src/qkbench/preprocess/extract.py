"""Linear feature extraction (PCA, Fisher LDA) and Mahalanobis outlier filtering."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from qkbench.errors import ConfigurationError, ContractError, NumericError
from qkbench.preprocess.stats import chi2_quantile

RIDGE = 1e-6


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    """Flip each column so its largest-magnitude entry is positive."""
    idx = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[idx, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


@dataclass
class PcaModel:
    mean: np.ndarray
    components: np.ndarray  # (m, d), orthonormal rows
    explained_variance: np.ndarray
    total_variance: float

    def transform(self, X) -> np.ndarray:
        return (np.asarray(X, dtype=np.float64) - self.mean) @ self.components.T

    @property
    def explained_variance_ratio(self) -> np.ndarray:
        if self.total_variance == 0:
            return np.zeros_like(self.explained_variance)
        return self.explained_variance / self.total_variance


def fit_pca(X, m: int) -> PcaModel:
    X = np.asarray(X, dtype=np.float64)
    n, d = X.shape
    if not 1 <= m <= min(n, d):
        raise ConfigurationError(f"m must be in [1, {min(n, d)}], got {m}")
    mean = X.mean(0)
    cov = (X - mean).T @ (X - mean) / n
    w, V = np.linalg.eigh(cov)
    order = np.argsort(w)[::-1][:m]
    comps = _fix_signs(V[:, order]).T
    return PcaModel(mean, comps, np.clip(w[order], 0.0, None), float(np.clip(w, 0, None).sum()))


def pca(X, m: int):
    """Returns ``(projected, components, explained_variance)``."""
    model = fit_pca(X, m)
    return model.transform(X), model.components, model.explained_variance


@dataclass
class LdaModel:
    mean: np.ndarray
    directions: np.ndarray  # (d, m), unit columns

    def transform(self, X) -> np.ndarray:
        return (np.asarray(X, dtype=np.float64) - self.mean) @ self.directions


def fit_lda(X, y, m: int) -> LdaModel:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    classes = np.unique(y)
    if not 1 <= m <= classes.size - 1:
        raise ConfigurationError(f"LDA supports at most {classes.size - 1} directions, got m={m}")
    d = X.shape[1]
    mean = X.mean(0)
    Sw = np.zeros((d, d))
    Sb = np.zeros((d, d))
    for c in classes:
        Xc = X[y == c]
        mu = Xc.mean(0)
        Sw += (Xc - mu).T @ (Xc - mu)
        diff = (mu - mean)[:, None]
        Sb += Xc.shape[0] * diff @ diff.T
    Sw += RIDGE * np.trace(Sw) / d * np.eye(d)
    try:
        w, V = scipy.linalg.eigh(Sb, Sw)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"within-class scatter is singular: {exc}") from exc
    order = np.argsort(w)[::-1][:m]
    V = V[:, order]
    V = V / np.linalg.norm(V, axis=0)
    return LdaModel(mean, _fix_signs(V))


def lda(X, y, m: int):
    """Returns ``(projected, directions)`` with directions as unit columns."""
    model = fit_lda(X, y, m)
    return model.transform(X), model.directions


def mahalanobis_filter(X, alpha: float = 0.975):
    """Keep rows whose squared Mahalanobis distance is within the chi-square ``alpha`` quantile.

    Returns ``(kept_indices, squared_distances)``.
    """
    X = np.asarray(X, dtype=np.float64)
    n, d = X.shape
    if n <= d:
        raise ContractError(f"need more samples than features ({n} <= {d})")
    if not 0 < alpha < 1:
        raise ConfigurationError(f"alpha must be in (0, 1), got {alpha}")
    mu = X.mean(0)
    cov = np.cov(X, rowvar=False).reshape(d, d)
    cov = cov + RIDGE * np.trace(cov) / d * np.eye(d)
    try:
        chol = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as exc:
        raise NumericError("covariance is singular even after regularization") from exc
    z = scipy.linalg.solve_triangular(chol, (X - mu).T, lower=True)
    dist = (z * z).sum(0)
    cutoff = chi2_quantile(alpha, d)
    return np.flatnonzero(dist <= cutoff), dist
