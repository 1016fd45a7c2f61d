import numpy as np
import pytest

from qkbench import oracles
from qkbench.errors import ConfigurationError, ContractError, ConvergenceError
from qkbench.svm import (
    BinaryModel,
    ClassicalKernelSpec,
    OvoModel,
    classical_gram,
    classical_kernel,
    ovo_predict,
    ovo_train,
    predict_binary,
    smo_train,
)
from qkbench.bench import data, pipeline
from qkbench.bench.config import from_dict


def kkt_residual(K, y, model, c):
    alpha = np.zeros(len(y))
    alpha[model.support_indices] = np.abs(model.alpha_y)
    f = K[:, model.support_indices] @ model.alpha_y + model.bias
    m = y * f
    res = 0.0
    for a, v in zip(alpha, m):
        if a <= 0:
            res = max(res, 1 - v)
        elif a >= c:
            res = max(res, v - 1)
        else:
            res = max(res, abs(v - 1))
    return res


def test_classical_kernel_examples(rng):
    lin = ClassicalKernelSpec("linear")
    assert classical_kernel(lin, [1, 2], [3, 4]) == 11
    x = rng.normal(size=4)
    assert classical_kernel(ClassicalKernelSpec("rbf", sigma=0.7), x, x) == 1
    y = rng.normal(size=4)
    poly = ClassicalKernelSpec("poly", a=0, b=1)
    assert classical_kernel(poly, x, y) == pytest.approx(classical_kernel(lin, x, y), abs=1e-14)
    sig = ClassicalKernelSpec("sigmoid", a=2.0, b=22.0)
    assert classical_kernel(sig, [1, 2], [3, 4]) == 0.0


def test_classical_defaults():
    X = np.array([[0.0, 1.0], [2.0, 3.0]])
    rbf = ClassicalKernelSpec("rbf").resolve(X)
    assert rbf.sigma**2 == pytest.approx(2 * X.var() / 2)
    assert ClassicalKernelSpec("poly").resolve(X).b == 3
    assert ClassicalKernelSpec("sigmoid").resolve(X).a == 0.5
    with pytest.raises(ConfigurationError):
        ClassicalKernelSpec("rbf", sigma=0)
    with pytest.raises(ConfigurationError):
        ClassicalKernelSpec("poly", a=1, b=1.5)


def test_classical_gram_matches_scalar(rng):
    A, B = rng.normal(size=(3, 4)), rng.normal(size=(5, 4))
    for spec in [ClassicalKernelSpec(k).resolve(A) for k in ("linear", "rbf", "poly", "sigmoid")]:
        G = classical_gram(spec, A, B)
        for i in range(3):
            for j in range(5):
                assert G[i, j] == pytest.approx(classical_kernel(spec, A[i], B[j]), rel=1e-12, abs=1e-12)


def test_two_point_analytic():
    x = np.array([-1.0, 1.0])
    y = np.array([-1.0, 1.0])
    K = np.outer(x, x)
    model = smo_train(K, y, c=10)
    assert model.bias == pytest.approx(0, abs=1e-12)
    assert sorted(model.support_indices.tolist()) == [0, 1]
    assert np.allclose(np.abs(model.alpha_y), 0.5, atol=1e-12)
    for t in (-2.0, 0.3, 1.7):
        assert predict_binary(model, t * x)[0] == pytest.approx(t, abs=1e-12)
    assert predict_binary(model, K[1])[0] == pytest.approx(1, abs=1e-12)
    assert predict_binary(model, K[0])[0] == pytest.approx(-1, abs=1e-12)


def test_separable_hard_margin(rng):
    X = np.vstack([rng.normal(-2, 0.3, (10, 2)), rng.normal(2, 0.3, (10, 2))])
    y = np.repeat([-1.0, 1.0], 10)
    K = X @ X.T
    model = smo_train(K, y, c=1e6)
    labels = [predict_binary(model, row)[1] for row in K]
    assert np.array_equal(labels, y)


@pytest.mark.parametrize("seed", range(5))
def test_smo_matches_qp_oracle(seed):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(8, 3))
    K = A @ A.T
    y = rng.permutation(np.array([1, 1, 1, 1, -1, -1, -1, -1.0]))
    c = 1.0
    model = smo_train(K, y, c, tol=1e-6)
    ref = oracles.qp_dual(K, y, c, tol=1e-8)[1]
    assert abs(model.dual_objective - ref) <= 1e-4 * abs(ref)
    assert kkt_residual(K, y, model, c) <= 1e-6
    assert np.all(np.abs(model.alpha_y) <= c + 1e-9)
    assert abs(np.sum(model.alpha_y)) <= 1e-6


def test_predict_binary_rules():
    empty = BinaryModel(np.zeros(0), np.zeros(0, dtype=int), bias=-0.25, c=1.0)
    assert predict_binary(empty, np.zeros(3)) == (-0.25, -1)
    tie = BinaryModel(np.zeros(0), np.zeros(0, dtype=int), bias=0.0, c=1.0)
    assert predict_binary(tie, np.zeros(3)) == (0.0, 1)
    m = BinaryModel(np.array([1.0]), np.array([4]), bias=0.0, c=1.0)
    with pytest.raises(ContractError):
        predict_binary(m, np.zeros(3))


def test_smo_errors():
    with pytest.raises(ContractError):
        smo_train(np.eye(3), [1, 1, 1])
    with pytest.raises(ContractError):
        smo_train(np.eye(3), [1, 0, -1])
    A = np.random.default_rng(0).normal(size=(30, 2))
    with pytest.raises(ConvergenceError, match="KKT residual"):
        smo_train(A @ A.T, np.where(np.arange(30) % 2, 1.0, -1.0), c=100, max_iter=1)


def test_ovo_counts(rng):
    X = rng.normal(size=(28, 2))
    K = X @ X.T
    for k in (2, 3, 14):
        labels = np.arange(28) % k
        model = ovo_train(K + np.eye(28), labels)
        assert len(model.pair_models) == k * (k - 1) // 2


def test_ovo_two_class_matches_binary(rng):
    X = np.vstack([rng.normal(-1, 0.5, (8, 2)), rng.normal(1, 0.5, (8, 2))])
    labels = np.repeat([3, 7], 8)
    K = X @ X.T
    model = ovo_train(K, labels)
    binary = smo_train(K, np.where(labels == 3, 1.0, -1.0))
    expected = [3 if predict_binary(binary, row)[1] > 0 else 7 for row in K]
    assert np.array_equal(ovo_predict(model, K), expected)


def test_ovo_unanimous_and_cyclic_tie():
    def stub(decision):
        return BinaryModel(np.zeros(0), np.zeros(0, dtype=int), bias=decision, c=1.0)

    unanimous = OvoModel([0, 1, 2], {(0, 1): stub(1.0), (0, 2): stub(0.5), (1, 2): stub(0.2)})
    assert ovo_predict(unanimous, np.zeros((1, 4))).tolist() == [0]
    # 0 beats 1 (0.3), 2 beats 0 (0.4), 1 beats 2 (0.9): one vote each.
    # |decision| sums: class 0 -> 0.3, class 1 -> 0.9, class 2 -> 0.4.
    cyclic = OvoModel([0, 1, 2], {(0, 1): stub(0.3), (0, 2): stub(-0.4), (1, 2): stub(0.9)})
    assert ovo_predict(cyclic, np.zeros((1, 4))).tolist() == [1]
    # Equal strengths fall back to class order.
    even = OvoModel([0, 1, 2], {(0, 1): stub(0.5), (0, 2): stub(-0.5), (1, 2): stub(0.5)})
    assert ovo_predict(even, np.zeros((1, 4))).tolist() == [0]


def test_three_blobs_rbf_cv():
    rng = np.random.default_rng(3)
    centers = np.array([[0, 0], [3, 0], [1.5, 2.6]])
    y = np.repeat(np.arange(3), 20)
    X = centers[y] + rng.normal(scale=0.3, size=(60, 2))
    ds = data.Dataset(X, y, ["a", "b", "c"], ["f0", "f1"])
    cfg = from_dict({"dataset_path": "-", "rescaler": "StandardScaler", "algorithm": "svm_rbf"})
    assert pipeline.kfold_cv(cfg, ds)["cv_mean"] >= 0.95
