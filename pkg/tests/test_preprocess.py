import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from qkbench.errors import ConfigurationError, ContractError, DataError, DomainError
from qkbench.preprocess import extract, rescale, stats, trees
from qkbench.preprocess.rescale import Method, apply_rescaler, box_cox, fit_rescaler, yeo_johnson

ALL_METHODS = list(rescale.CONFIG_NAMES)

matrices = arrays(
    np.float64,
    st.tuples(st.integers(3, 25), st.integers(1, 4)),
    elements=st.floats(-50, 50, allow_nan=False, width=64),
)


def positive_data(seed, n=60, d=3):
    return np.exp(np.random.default_rng(seed).normal(0.3, 0.8, (n, d)))


def mp_normal_quantile(p):
    """Bisection on the arbitrary-precision normal CDF."""
    mpmath.mp.dps = 40
    lo, hi = mpmath.mpf(-40), mpmath.mpf(40)
    target = mpmath.mpf(p)
    for _ in range(200):
        mid = (lo + hi) / 2
        if mpmath.ncdf(mid) < target:
            lo = mid
        else:
            hi = mid
    return float((lo + hi) / 2)


# ---------------------------------------------------------------- stats


def test_normal_quantile_landmarks():
    assert abs(stats.normal_quantile(0.975) - 1.959964) < 1e-5
    assert stats.normal_quantile(0.5) == 0.0
    with pytest.raises(DomainError):
        stats.normal_quantile(0.0)
    with pytest.raises(DomainError):
        stats.normal_quantile(1.5)


@pytest.mark.parametrize("p", [1e-7, 1e-4, 0.01, 0.02425, 0.2, 0.5, 0.7, 0.97575, 0.999, 1 - 1e-7])
def test_normal_quantile_matches_arbitrary_precision(p):
    assert stats.normal_quantile(p) == pytest.approx(mp_normal_quantile(p), abs=1e-9)


@given(st.floats(1e-7, 1 - 1e-7))
def test_normal_quantile_odd_symmetry(p):
    assert abs(stats.normal_quantile(p) + stats.normal_quantile(1 - p)) < 1e-9


def test_normal_quantile_vectorized():
    p = np.array([0.1, 0.5, 0.9])
    out = stats.normal_quantile(p)
    assert out.shape == (3,)
    assert out[0] == -out[2]


@pytest.mark.parametrize("dof", [1, 2, 5, 43])
def test_chi2_quantile_matches_cdf(dof):
    q = stats.chi2_quantile(0.975, dof)
    assert float(mpmath.gammainc(dof / 2, 0, q / 2, regularized=True)) == pytest.approx(0.975, abs=1e-10)


def test_golden_section():
    assert stats.golden_section_max(lambda t: -(t - 1.3) ** 2, -5, 5) == pytest.approx(1.3, abs=1e-6)


# ---------------------------------------------------------------- rescalers


def test_standard_example():
    p = fit_rescaler("StandardScaler", [[1.0], [2.0], [3.0]])
    assert p.stats["mean"][0] == 2.0
    assert p.stats["std"][0] == pytest.approx(math.sqrt(2 / 3), abs=1e-15)


def test_minmax_example():
    p = fit_rescaler("MinMaxScaler", [[1.0], [2.0], [3.0]])
    assert (p.stats["min"][0], p.stats["max"][0]) == (1.0, 3.0)


def test_config_names():
    assert len(ALL_METHODS) == 11
    assert rescale.parse_method("boxcox") is Method.BOXCOX
    with pytest.raises(ConfigurationError):
        rescale.parse_method("Normalizer")


def test_standard_constant_column_warns():
    X = np.column_stack([np.ones(5), np.arange(5.0)])
    p = fit_rescaler("StandardScaler", X)
    assert p.stats["std"][0] == 1.0 and p.warnings
    assert np.all(apply_rescaler(p, X)[:, 0] == 0)


@pytest.mark.parametrize("method", ["boxcox", "lognormal"])
def test_positive_only_methods(method):
    X = np.array([[1.0, 2.0], [2.0, -1.0], [3.0, 4.0]])
    with pytest.raises(DomainError, match="1"):
        fit_rescaler(method, X)


def test_robust_degenerate_iqr():
    with pytest.raises(DomainError):
        fit_rescaler("RobustScaler", np.array([[1.0], [1.0], [1.0], [1.0], [5.0]]))


def test_robust_formula():
    X = np.arange(1.0, 10.0)[:, None]
    out = apply_rescaler(fit_rescaler("RobustScaler", X), X)
    q1, q3 = np.quantile(X, [0.25, 0.75])
    assert np.allclose(out[:, 0], (X[:, 0] - q1) / (q3 - q1))


def test_l2norm_rows():
    X = np.array([[3.0, 4.0], [0.0, 0.0]])
    out = apply_rescaler(fit_rescaler("l2norm", X), X)
    assert np.allclose(out, [[0.6, 0.8], [0.0, 0.0]])


def test_feature_count_contract():
    p = fit_rescaler("MinMaxScaler", np.ones((3, 2)) * [[1], [2], [3]])
    with pytest.raises(ContractError):
        apply_rescaler(p, np.ones((2, 3)))


def test_fit_needs_two_rows():
    with pytest.raises(DataError):
        fit_rescaler("StandardScaler", [[1.0, 2.0]])


@settings(max_examples=60, deadline=None)
@given(matrices)
def test_standardization_moments(X):
    out = apply_rescaler(fit_rescaler("StandardScaler", X), X)
    for j in range(X.shape[1]):
        if np.ptp(X[:, j]) > 1e-6:
            assert abs(out[:, j].mean()) < 1e-10
            assert abs(out[:, j].std() - 1) < 1e-10


@settings(max_examples=60, deadline=None)
@given(matrices)
def test_range_contracts(X):
    mm = apply_rescaler(fit_rescaler("MinMaxScaler", X), X)
    assert mm.min() >= 0 and mm.max() <= 1
    ma = apply_rescaler(fit_rescaler("MaxAbsScaler", X), X)
    assert np.abs(ma).max() <= 1
    lg = apply_rescaler(fit_rescaler("logistic", X), X / 10)
    assert lg.min() > 0 and lg.max() < 1
    qu = apply_rescaler(fit_rescaler("quantile_uniform", X), X)
    assert qu.min() >= 0 and qu.max() <= 1


@settings(max_examples=60, deadline=None)
@given(matrices, st.integers(0, 2**32 - 1))
def test_quantile_monotone(X, seed):
    probe = np.random.default_rng(seed).uniform(-80, 80, (30, X.shape[1]))
    for method in ("quantile_uniform", "quantile_normal"):
        out = apply_rescaler(fit_rescaler(method, X), probe)
        for j in range(X.shape[1]):
            order = np.argsort(probe[:, j], kind="stable")
            assert np.all(np.diff(out[order, j]) >= 0)


def test_quantile_normal_is_finite():
    X = np.arange(20.0)[:, None]
    out = apply_rescaler(fit_rescaler("quantile_normal", X), np.array([[-100.0], [100.0]]))
    assert np.all(np.isfinite(out))
    assert out[0, 0] == pytest.approx(stats.normal_quantile(1e-7))


def test_quantile_grid_size():
    X = np.random.default_rng(0).normal(size=(1500, 2))
    assert fit_rescaler("quantile_uniform", X).stats["quantiles"].shape == (1000, 2)
    assert fit_rescaler("quantile_uniform", X[:40]).stats["quantiles"].shape == (40, 2)


@pytest.mark.parametrize("x", [0.5, 1.0, 2.0, 10.0])
def test_box_cox_continuity(x):
    assert abs(box_cox(np.array([x]), 1e-8)[0] - math.log(x)) < 1e-6


@settings(max_examples=100)
@given(arrays(np.float64, st.integers(1, 30), elements=st.floats(-1e6, 1e6, allow_nan=False)))
def test_yeo_johnson_identity_at_one(y):
    assert np.all(np.abs(yeo_johnson(y, 1.0) - y) <= 1e-12 * np.maximum(1, np.abs(y)))


def test_yeo_johnson_branches():
    y = np.array([-2.0, -0.5, 0.0, 0.5, 2.0])
    assert np.allclose(yeo_johnson(y, 0.0)[3:], np.log1p(y[3:]))
    assert np.allclose(yeo_johnson(y, 2.0)[:2], -np.log1p(-y[:2]))
    lam = 0.7
    expected = np.where(
        y >= 0, (np.abs(y + 1) ** lam - 1) / lam, -(np.abs(1 - y) ** (2 - lam) - 1) / (2 - lam)
    )
    assert np.allclose(yeo_johnson(y, lam), expected, atol=1e-14)


def _grid_argmax(loglik, col):
    grid = np.arange(-5.0, 5.0 + 1e-12, 1e-3)
    values = np.array([loglik(col, lam) for lam in grid])
    return grid[np.argmax(values)]


def _boxcox_loglik(x, lam):
    z = np.log(x) if lam == 0 else (x**lam - 1) / lam
    return -len(x) / 2 * math.log(z.var()) + (lam - 1) * np.log(x).sum()


def _yj_loglik(y, lam):
    z = yeo_johnson(y, lam)
    return -len(y) / 2 * math.log(z.var()) + (lam - 1) * (np.sign(y) * np.log1p(np.abs(y))).sum()


@pytest.mark.parametrize("seed", range(3))
def test_boxcox_lambda_grid_oracle(seed):
    col = positive_data(seed)[:, 0]
    assert abs(rescale.fit_power_lambda(col, Method.BOXCOX) - _grid_argmax(_boxcox_loglik, col)) < 1e-3


@pytest.mark.parametrize("seed", range(3))
def test_yeojohnson_lambda_grid_oracle(seed):
    col = np.random.default_rng(seed).gamma(2.0, 1.5, 80) - 2.0
    assert abs(rescale.fit_power_lambda(col, Method.YEOJOHNSON) - _grid_argmax(_yj_loglik, col)) < 1e-3


@pytest.mark.parametrize("method", ALL_METHODS)
def test_every_method_runs_and_is_pure(method):
    X = positive_data(4)
    p = fit_rescaler(method, X)
    before = X.copy()
    a = apply_rescaler(p, X)
    b = apply_rescaler(fit_rescaler(method, X), X)
    assert np.array_equal(X, before)
    assert np.array_equal(a, b) and np.all(np.isfinite(a))
    assert p.state_bytes() == fit_rescaler(method, X).state_bytes()


def test_lognormal_formula():
    X = positive_data(1)
    p = fit_rescaler("lognormal", X)
    sigma = np.log(X).std(axis=0)
    assert np.allclose(apply_rescaler(p, X), stats.normal_cdf(np.log(X) / sigma))


# ---------------------------------------------------------------- trees


def test_gini_values():
    assert trees.gini([5, 0]) == 0.0
    assert trees.gini([3, 3]) == 0.5
    assert trees.gini([2, 2, 2]) == pytest.approx(2 / 3, abs=1e-15)


@given(st.lists(st.integers(0, 50), min_size=1, max_size=8))
def test_gini_bounds(counts):
    g = trees.gini(counts)
    k = len(counts)
    assert -1e-15 <= g <= 1 - 1 / k + 1e-12


def sign_fixture(seed):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(120, 5))
    y = (X[:, 0] > 0).astype(int)
    return X, y


def test_sign_fixture_tree():
    X, y = sign_fixture(0)
    rep = trees.tree_importances(X, y)
    assert np.argmax(rep.importances) == 0
    assert abs(rep.importances.sum() - 1) < 1e-9
    assert rep.importances[0] == 1.0


@pytest.mark.parametrize("seed", range(10))
def test_sign_fixture_forest(seed):
    X, y = sign_fixture(seed)
    rep = trees.forest_importances(X, y, trees.ForestConfig(seed=seed))
    assert np.argmax(rep.importances) == 0
    assert abs(rep.importances.sum() - 1) < 1e-9
    assert np.all(rep.importances >= 0)


def test_forest_degenerate_equals_tree():
    rng = np.random.default_rng(5)
    X = rng.normal(size=(40, 3))
    y = rng.integers(0, 3, 40)
    tree = trees.tree_importances(X, y).importances
    forest = trees.forest_importances(X, y, trees.ForestConfig(n_trees=1, max_features=3, bootstrap=False))
    assert np.allclose(forest.importances, tree, atol=1e-15)


def test_forest_deterministic():
    X, y = sign_fixture(1)
    a = trees.forest_importances(X, y, trees.ForestConfig(n_trees=10, seed=3)).importances
    b = trees.forest_importances(X, y, trees.ForestConfig(n_trees=10, seed=3)).importances
    assert np.array_equal(a, b)


def test_no_split_warning():
    rep = trees.tree_importances(np.ones((6, 2)), [0, 1, 0, 1, 0, 1])
    assert np.all(rep.importances == 0) and rep.warnings


def test_importances_need_two_classes():
    with pytest.raises(ContractError):
        trees.tree_importances(np.ones((4, 2)), [1, 1, 1, 1])


def test_select_top_k():
    rep = trees.ImportanceReport(np.array([0.1, 0.3, 0.3, 0.3]), trees.Selector.DECISION_TREE)
    assert trees.select_top_k(rep, 2) == [1, 2]
    assert trees.select_top_k(rep, 4) == [0, 1, 2, 3]
    with pytest.raises(ConfigurationError):
        trees.select_top_k(rep, 5)


def test_max_depth_limits_splits():
    X, y = sign_fixture(2)
    X[:, 0] += 0.3 * np.random.default_rng(0).normal(size=120)
    stump = trees.tree_importances(X, y, trees.TreeConfig(max_depth=1))
    assert np.count_nonzero(stump.importances) == 1


# ---------------------------------------------------------------- extraction


def test_pca_matches_svd():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(50, 4)) @ rng.normal(size=(4, 4))
    proj, comps, ev = extract.pca(X, 2)
    Xc = X - X.mean(0)
    _, s, vt = np.linalg.svd(Xc, full_matrices=False)
    assert np.allclose(ev, s[:2] ** 2 / len(X))
    assert comps.shape == (2, 4)
    for k in range(2):
        assert abs(abs(comps[k] @ vt[k]) - 1) < 1e-10
        assert comps[k, np.argmax(np.abs(comps[k]))] > 0
    assert np.allclose(proj, Xc @ comps.T)
    assert np.allclose(comps @ comps.T, np.eye(2), atol=1e-12)


def test_pca_variance_ratio():
    X = np.random.default_rng(1).normal(size=(30, 3))
    model = extract.fit_pca(X, 3)
    assert model.explained_variance_ratio.sum() == pytest.approx(1.0)
    with pytest.raises(ConfigurationError):
        extract.fit_pca(X, 4)


def test_lda_separates_classes():
    rng = np.random.default_rng(2)
    y = np.repeat([0, 1], 30)
    X = rng.normal(size=(60, 3))
    X[:, 2] += 10 * y
    proj, dirs = extract.lda(X, y, 1)
    assert abs(dirs[2, 0]) > 0.9
    assert np.allclose(np.linalg.norm(dirs, axis=0), 1)
    assert proj[y == 0].max() < proj[y == 1].min() or proj[y == 0].min() > proj[y == 1].max()
    with pytest.raises(ConfigurationError):
        extract.lda(X, y, 2)


def test_mahalanobis_filter():
    rng = np.random.default_rng(3)
    X = rng.normal(size=(200, 3))
    X[0] = [20, -20, 20]
    kept, d2 = extract.mahalanobis_filter(X)
    assert 0 not in kept
    assert len(d2) == 200
    counts = [len(extract.mahalanobis_filter(X, a)[0]) for a in (0.999, 0.975, 0.9, 0.5, 0.1)]
    assert counts == sorted(counts, reverse=True)
    with pytest.raises(ContractError):
        extract.mahalanobis_filter(X[:3])
