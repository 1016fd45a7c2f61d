"""Feature engineering: rescaling, tree-based selection, PCA/LDA, outlier filtering."""

from qkbench.preprocess.extract import fit_lda, fit_pca, lda, mahalanobis_filter, pca
from qkbench.preprocess.rescale import Method, RescalerParams, apply_rescaler, fit_rescaler
from qkbench.preprocess.stats import chi2_quantile, normal_quantile
from qkbench.preprocess.trees import (
    ForestConfig,
    ImportanceReport,
    TreeConfig,
    forest_importances,
    gini,
    select_top_k,
    tree_importances,
)

__all__ = [
    "ForestConfig",
    "ImportanceReport",
    "Method",
    "RescalerParams",
    "TreeConfig",
    "apply_rescaler",
    "chi2_quantile",
    "fit_lda",
    "fit_pca",
    "fit_rescaler",
    "forest_importances",
    "gini",
    "lda",
    "mahalanobis_filter",
    "normal_quantile",
    "pca",
    "select_top_k",
    "tree_importances",
]
