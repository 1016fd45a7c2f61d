"""Quick oracle comparisons runnable from the command line."""

from __future__ import annotations

import numpy as np

from qkbench import featuremap, oracles, qka, qkernel, svm
from qkbench.featuremap import FeatureMapSpec, Kind


def _circuit_oracle(rng):
    worst = 0.0
    for kind in Kind:
        for n in (1, 2, 3):
            x = rng.uniform(-1, 1, n)
            fast = featuremap.prepare_state(FeatureMapSpec(kind, n), x).amplitudes
            worst = max(worst, np.abs(fast - oracles.dense_state(kind.value, x, 2)).max())
    return worst < 1e-12, f"max amplitude error {worst:.2e}"


def _gram_psd(rng):
    X = rng.uniform(0, 1, (12, 4))
    K = qkernel.gram(FeatureMapSpec("zz", 4), X).entries
    lo = float(np.linalg.eigvalsh(K).min())
    return lo >= -1e-10 and np.array_equal(K, K.T), f"min eigenvalue {lo:.2e}"


def _smo_oracle(rng):
    worst = 0.0
    for _ in range(5):
        A = rng.normal(size=(8, 3))
        K = A @ A.T
        y = np.where(np.arange(8) % 2 == 0, 1.0, -1.0)
        ref = oracles.qp_dual(K, y, 1.0)[1]
        got = svm.smo_train(K, y, 1.0).dual_objective
        worst = max(worst, abs(got - ref) / max(abs(ref), 1e-12))
    return worst < 1e-4, f"max relative dual gap {worst:.2e}"


def _qka_identity(rng):
    spec = qka.CovariantKernelSpec(FeatureMapSpec("zz", 3))
    worst = 0.0
    for _ in range(20):
        x, y = rng.uniform(0, 1, (2, 3))
        a = qka.kernel_entry_lambda(spec, np.zeros(3), x, y)
        worst = max(worst, abs(a - qkernel.kernel_entry(spec.base, x, y)))
    return worst < 1e-12, f"max |K_0 - K_base| {worst:.2e}"


CHECKS = {
    "circuit vs dense matrices": _circuit_oracle,
    "exact Gram is PSD and symmetric": _gram_psd,
    "SMO vs projected-gradient QP": _smo_oracle,
    "QKA at lambda=0 equals base kernel": _qka_identity,
}


def run(seed: int = 0, out=print) -> bool:
    rng = np.random.default_rng(seed)
    ok_all = True
    for name, check in CHECKS.items():
        ok, detail = check(rng)
        ok_all &= bool(ok)
        out(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    return ok_all
