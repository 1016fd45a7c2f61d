"""Per-feature rescalers, fitted on one matrix and applied to another.

Standard deviations use the population convention (divide by n).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from qkbench.errors import ConfigurationError, ContractError, DataError, DomainError
from qkbench.preprocess.stats import golden_section_max, normal_cdf, normal_quantile

LAMBDA_BOUNDS = (-5.0, 5.0)
LAMBDA_TOL = 1e-6
MAX_QUANTILES = 1000
QUANTILE_CLIP = 1e-7


class Method(str, enum.Enum):
    STANDARD = "standard"
    MINMAX = "minmax"
    MAXABS = "maxabs"
    ROBUST = "robust"
    L2NORM = "l2norm"
    LOGISTIC = "logistic"
    LOGNORMAL = "lognormal"
    BOXCOX = "boxcox"
    YEOJOHNSON = "yeojohnson"
    QUANTILE_NORMAL = "quantile_normal"
    QUANTILE_UNIFORM = "quantile_uniform"


CONFIG_NAMES = {
    "StandardScaler": Method.STANDARD,
    "MinMaxScaler": Method.MINMAX,
    "MaxAbsScaler": Method.MAXABS,
    "RobustScaler": Method.ROBUST,
    "l2norm": Method.L2NORM,
    "logistic": Method.LOGISTIC,
    "lognormal": Method.LOGNORMAL,
    "boxcox": Method.BOXCOX,
    "yeojohnson": Method.YEOJOHNSON,
    "quantile_normal": Method.QUANTILE_NORMAL,
    "quantile_uniform": Method.QUANTILE_UNIFORM,
}


def parse_method(name) -> Method:
    if isinstance(name, Method):
        return name
    if name in CONFIG_NAMES:
        return CONFIG_NAMES[name]
    try:
        return Method(name)
    except ValueError:
        raise ConfigurationError(f"unknown rescaler {name!r}") from None


@dataclass
class RescalerParams:
    method: Method
    n_features: int
    stats: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)

    def state_bytes(self) -> bytes:
        """Canonical byte dump of the fitted state, for exact comparisons."""
        parts = [self.method.value.encode(), str(self.n_features).encode()]
        for key in sorted(self.stats):
            parts.append(key.encode())
            parts.append(np.ascontiguousarray(self.stats[key], dtype=np.float64).tobytes())
        return b"|".join(parts)


def box_cox(x, lam: float):
    x = np.asarray(x, dtype=np.float64)
    logx = np.log(x)
    if lam == 0:
        return logx
    return np.expm1(lam * logx) / lam


def yeo_johnson(y, lam: float):
    y = np.asarray(y, dtype=np.float64)
    out = np.empty_like(y)
    pos = y >= 0
    if lam == 0:
        out[pos] = np.log1p(y[pos])
    else:
        out[pos] = np.expm1(lam * np.log1p(y[pos])) / lam
    if lam == 2:
        out[~pos] = -np.log1p(-y[~pos])
    else:
        out[~pos] = -np.expm1((2 - lam) * np.log1p(-y[~pos])) / (2 - lam)
    return out


def _loglik_box_cox(x, lam):
    t = box_cox(x, lam)
    var = t.var()
    if not np.isfinite(var) or var <= 0:
        return -np.inf
    return (lam - 1) * np.log(x).sum() - x.size / 2 * np.log(var)


def _loglik_yeo_johnson(y, lam):
    t = yeo_johnson(y, lam)
    var = t.var()
    if not np.isfinite(var) or var <= 0:
        return -np.inf
    return (lam - 1) * (np.sign(y) * np.log1p(np.abs(y))).sum() - y.size / 2 * np.log(var)


def fit_power_lambda(column, method) -> float:
    column = np.asarray(column, dtype=np.float64)
    ll = _loglik_box_cox if parse_method(method) is Method.BOXCOX else _loglik_yeo_johnson
    return golden_section_max(lambda lam: ll(column, lam), *LAMBDA_BOUNDS, tol=LAMBDA_TOL)


def _quantile_cdf(column, quantiles, references):
    # Average of forward and reversed interpolation handles repeated quantile values.
    fwd = np.interp(column, quantiles, references)
    bwd = -np.interp(-column, -quantiles[::-1], -references[::-1])
    return 0.5 * (fwd + bwd)


def _as_matrix(X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ContractError(f"expected a samples x features matrix, got shape {X.shape}")
    return X


def fit_rescaler(method, X) -> RescalerParams:
    method = parse_method(method)
    X = _as_matrix(X)
    n, d = X.shape
    if n < 2:
        raise DataError("rescalers need at least 2 samples")
    params = RescalerParams(method, d)
    st = params.stats

    if method is Method.STANDARD:
        st["mean"] = X.mean(0)
        std = X.std(0)
        zero = std == 0
        if np.any(zero):
            params.warnings.append(f"zero variance in features {np.flatnonzero(zero).tolist()}; std set to 1")
            std = np.where(zero, 1.0, std)
        st["std"] = std
    elif method is Method.MINMAX:
        st["min"] = X.min(0)
        st["max"] = X.max(0)
    elif method is Method.MAXABS:
        st["maxabs"] = np.abs(X).max(0)
    elif method is Method.ROBUST:
        q1, q3 = np.percentile(X, [25, 75], axis=0)
        flat = np.flatnonzero(q3 <= q1)
        if flat.size:
            raise DomainError(f"RobustScaler needs Q3 > Q1; feature {int(flat[0])} has zero IQR")
        st["q1"], st["q3"] = q1, q3
    elif method in (Method.BOXCOX, Method.LOGNORMAL):
        bad = np.flatnonzero(np.any(X <= 0, axis=0))
        if bad.size:
            raise DomainError(
                f"{method.value} needs strictly positive data; feature {int(bad[0])} has values <= 0"
            )
        if method is Method.BOXCOX:
            st["lambda"] = np.array([fit_power_lambda(X[:, j], method) for j in range(d)])
        else:
            sigma = np.log(X).std(0)
            zero = sigma == 0
            if np.any(zero):
                params.warnings.append(f"constant log-features {np.flatnonzero(zero).tolist()}; sigma set to 1")
            st["sigma"] = np.where(zero, 1.0, sigma)
    elif method is Method.YEOJOHNSON:
        st["lambda"] = np.array([fit_power_lambda(X[:, j], method) for j in range(d)])
    elif method in (Method.QUANTILE_NORMAL, Method.QUANTILE_UNIFORM):
        nq = min(MAX_QUANTILES, n)
        references = np.linspace(0.0, 1.0, nq)
        st["references"] = references
        st["quantiles"] = np.quantile(X, references, axis=0)
    return params


def apply_rescaler(params: RescalerParams, X) -> np.ndarray:
    X = _as_matrix(X)
    if X.shape[1] != params.n_features:
        raise ContractError(f"rescaler was fitted on {params.n_features} features, got {X.shape[1]}")
    m, st = params.method, params.stats

    if m is Method.STANDARD:
        return (X - st["mean"]) / st["std"]
    if m is Method.MINMAX:
        span = st["max"] - st["min"]
        return (X - st["min"]) / np.where(span == 0, 1.0, span)
    if m is Method.MAXABS:
        return X / np.where(st["maxabs"] == 0, 1.0, st["maxabs"])
    if m is Method.ROBUST:
        return (X - st["q1"]) / (st["q3"] - st["q1"])
    if m is Method.L2NORM:
        norms = np.linalg.norm(X, axis=1, keepdims=True)
        return X / np.where(norms == 0, 1.0, norms)
    if m is Method.LOGISTIC:
        return special.expit(X)
    if m is Method.LOGNORMAL:
        if np.any(X <= 0):
            raise DomainError("lognormal transform needs strictly positive data")
        return normal_cdf(np.log(X) / st["sigma"])
    if m is Method.BOXCOX:
        if np.any(X <= 0):
            raise DomainError("boxcox transform needs strictly positive data")
        return np.column_stack([box_cox(X[:, j], lam) for j, lam in enumerate(st["lambda"])])
    if m is Method.YEOJOHNSON:
        return np.column_stack([yeo_johnson(X[:, j], lam) for j, lam in enumerate(st["lambda"])])

    refs, qs = st["references"], st["quantiles"]
    U = np.column_stack([_quantile_cdf(X[:, j], qs[:, j], refs) for j in range(X.shape[1])])
    if m is Method.QUANTILE_UNIFORM:
        return U
    return normal_quantile(np.clip(U, QUANTILE_CLIP, 1 - QUANTILE_CLIP))
