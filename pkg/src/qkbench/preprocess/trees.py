"""CART classification trees on Gini impurity, used only for feature importances."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from qkbench.errors import ConfigurationError, ContractError


class Selector(str, enum.Enum):
    DECISION_TREE = "decision_tree"
    RANDOM_FOREST = "random_forest"


@dataclass
class ImportanceReport:
    importances: np.ndarray
    method: Selector
    warnings: list = field(default_factory=list)


@dataclass(frozen=True)
class TreeConfig:
    max_depth: int | None = None
    min_samples_split: int = 2
    seed: int = 0


@dataclass(frozen=True)
class ForestConfig:
    n_trees: int = 100
    max_features: int | None = None
    bootstrap: bool = True
    seed: int = 0


def gini(counts) -> float:
    """``1 - sum p_i^2`` for a vector of class counts."""
    counts = np.asarray(counts, dtype=np.float64)
    total = counts.sum()
    if total == 0:
        return 0.0
    p = counts / total
    return float(1.0 - np.sum(p * p))


def _best_split(X, Y, features):
    """Lowest weighted child Gini over ``features``; ties go to lower feature, then threshold.

    ``Y`` is the one-hot label matrix of the node. Returns
    ``(feature, threshold, child_gini_sum, left_mask)`` or ``None``.
    """
    m = X.shape[0]
    best = None
    for f in sorted(features):
        col = X[:, f]
        order = np.argsort(col, kind="stable")
        xs = col[order]
        cut = np.flatnonzero(xs[1:] != xs[:-1])
        if cut.size == 0:
            continue
        left = np.cumsum(Y[order], axis=0)[cut]
        right = Y.sum(0) - left
        n_left = cut + 1.0
        n_right = m - n_left
        g_left = n_left - (left * left).sum(1) / n_left
        g_right = n_right - (right * right).sum(1) / n_right
        # Weighted child impurity times m: n_L*gini_L + n_R*gini_R.
        score = g_left + g_right
        k = int(np.argmin(score))
        if best is None or score[k] < best[2] - 1e-12:
            threshold = (xs[cut[k]] + xs[cut[k] + 1]) / 2
            best = (f, threshold, float(score[k]), col <= threshold)
    return best


def _grow(X, Y, importances, n_total, cfg, feature_draw):
    stack = [(np.arange(X.shape[0]), 0)]
    n_splits = 0
    while stack:
        idx, level = stack.pop()
        counts = Y[idx].sum(0)
        m = idx.size
        node_gini = gini(counts)
        if node_gini == 0 or m < cfg.min_samples_split:
            continue
        if cfg.max_depth is not None and level >= cfg.max_depth:
            continue
        split = _best_split(X[idx], Y[idx], feature_draw(X[idx]))
        if split is None:
            continue
        f, _, child_sum, left = split
        importances[f] += (m * node_gini - child_sum) / n_total
        n_splits += 1
        stack.append((idx[~left], level + 1))
        stack.append((idx[left], level + 1))
    return n_splits


def _one_hot(y):
    classes, inv = np.unique(np.asarray(y), return_inverse=True)
    if classes.size < 2:
        raise ContractError("feature importances need at least two classes")
    return np.eye(classes.size)[inv]


def _finish(raw, method, n_splits):
    total = raw.sum()
    if n_splits == 0 or total <= 0:
        return ImportanceReport(np.zeros_like(raw), method, ["no informative split; importances are zero"])
    return ImportanceReport(raw / total, method)


def tree_importances(X, y, cfg: TreeConfig = TreeConfig()) -> ImportanceReport:
    """Normalized mean decrease in Gini impurity of a single fully grown tree."""
    X = np.asarray(X, dtype=np.float64)
    Y = _one_hot(y)
    raw = np.zeros(X.shape[1])
    all_features = list(range(X.shape[1]))
    n = _grow(X, Y, raw, X.shape[0], cfg, lambda _: all_features)
    return _finish(raw, Selector.DECISION_TREE, n)


def forest_importances(X, y, cfg: ForestConfig = ForestConfig()) -> ImportanceReport:
    """Average of per-tree normalized importances over bootstrapped random-subspace trees."""
    X = np.asarray(X, dtype=np.float64)
    Y = _one_hot(y)
    n, d = X.shape
    max_features = cfg.max_features or math.ceil(math.sqrt(d))
    if not 1 <= max_features <= d:
        raise ConfigurationError(f"max_features must be in [1, {d}]")
    if cfg.n_trees < 1:
        raise ConfigurationError("n_trees must be >= 1")

    total = np.zeros(d)
    any_split = False
    for child in np.random.SeedSequence(cfg.seed).spawn(cfg.n_trees):
        rng = np.random.default_rng(child)
        rows = rng.integers(0, n, n) if cfg.bootstrap else np.arange(n)
        Yb = Y[rows]
        if np.count_nonzero(Yb.sum(0)) < 2:
            continue

        def draw(Xn, rng=rng):
            # Shuffle, then keep the first max_features non-constant columns.
            varying = [f for f in rng.permutation(d) if np.ptp(Xn[:, f]) > 0]
            return varying[:max_features]

        raw = np.zeros(d)
        if _grow(X[rows], Yb, raw, n, TreeConfig(), draw) and raw.sum() > 0:
            total += raw / raw.sum()
            any_split = True
    return _finish(total, Selector.RANDOM_FOREST, int(any_split))


def select_top_k(report: ImportanceReport, k: int) -> list[int]:
    """Indices of the ``k`` largest importances (lower index wins ties), ascending."""
    imp = np.asarray(report.importances)
    if not 1 <= k <= imp.size:
        raise ConfigurationError(f"k must be in [1, {imp.size}], got {k}")
    order = np.lexsort((np.arange(imp.size), -imp))
    return sorted(int(i) for i in order[:k])
