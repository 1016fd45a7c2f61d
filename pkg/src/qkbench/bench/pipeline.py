"""Experiment harness: preprocessing, kernel construction, CV and held-out scoring."""

from __future__ import annotations

import contextlib
import logging
import platform
import time
from dataclasses import dataclass, field

import numpy as np
import scipy

import qkbench
from qkbench import qka, qkernel, svm
from qkbench.bench import data
from qkbench.bench.config import CLASSICAL_ALGORITHMS, QKA_ALGORITHM, ExperimentConfig
from qkbench.errors import ConfigurationError, QkbenchError
from qkbench.featuremap import FeatureMapSpec
from qkbench.preprocess import extract, rescale, trees
from qkbench.statevec import MAX_QUBITS

log = logging.getLogger(__name__)

CI_WIDTH = 2.0
DEFAULT_SAMPLE_CAPS = (260, 626, 1143, 2080, None)
QKA_BASE_KIND = "zz"


@dataclass
class FittedPrep:
    """Rescaler plus reducer state fitted on one training portion."""

    rescaler: rescale.RescalerParams
    reducer_kind: str
    selected: list[int] | None = None
    projector: object | None = None
    importances: trees.ImportanceReport | None = None

    def transform(self, X) -> np.ndarray:
        Z = rescale.apply_rescaler(self.rescaler, X)
        if self.selected is not None:
            Z = Z[:, self.selected]
        if self.projector is not None:
            Z = self.projector.transform(Z)
        return Z

    def state_bytes(self) -> bytes:
        parts = [self.rescaler.state_bytes(), self.reducer_kind.encode()]
        if self.selected is not None:
            parts.append(np.asarray(self.selected, dtype=np.int64).tobytes())
        if self.importances is not None:
            parts.append(np.asarray(self.importances.importances).tobytes())
        if self.projector is not None:
            for name in ("mean", "components", "directions"):
                value = getattr(self.projector, name, None)
                if value is not None:
                    parts.append(np.ascontiguousarray(value).tobytes())
        return b"|".join(parts)


def fit_prep(cfg: ExperimentConfig, X, y) -> FittedPrep:
    params = rescale.fit_rescaler(cfg.rescaler, X)
    Z = rescale.apply_rescaler(params, X)
    red = cfg.reducer
    prep = FittedPrep(params, red.kind)
    if red.kind == "select_tree":
        prep.importances = trees.tree_importances(Z, y, trees.TreeConfig(seed=cfg.seed))
        prep.selected = trees.select_top_k(prep.importances, red.k)
    elif red.kind == "select_forest":
        prep.importances = trees.forest_importances(Z, y, trees.ForestConfig(seed=cfg.seed))
        prep.selected = trees.select_top_k(prep.importances, red.k)
    elif red.kind == "pca":
        prep.projector = extract.fit_pca(Z, red.k)
    elif red.kind == "lda":
        prep.projector = extract.fit_lda(Z, y, red.k)
    return prep


def _kernel_seed(cfg: ExperimentConfig, tag: int) -> int:
    return cfg.seed * 1000 + tag


def build_kernels(cfg: ExperimentConfig, Ztr, ytr, Zte, tag: int = 0):
    """Train Gram, test-vs-train Gram and the optional QKA result."""
    if cfg.algorithm in CLASSICAL_ALGORITHMS:
        spec = svm.ClassicalKernelSpec(cfg.algorithm.removeprefix("svm_")).resolve(Ztr)
        return svm.classical_gram(spec, Ztr, Ztr), svm.classical_gram(spec, Zte, Ztr), None

    n_qubits = Ztr.shape[1]
    if n_qubits > MAX_QUBITS:
        raise ConfigurationError(
            f"{n_qubits} features need {n_qubits} qubits (max {MAX_QUBITS}); configure a reducer"
        )
    mode = qkernel.EXACT if cfg.shots is None else qkernel.Sampled(cfg.shots, _kernel_seed(cfg, tag))
    qka_result = None
    if cfg.algorithm == QKA_ALGORITHM:
        cov = qka.CovariantKernelSpec(FeatureMapSpec(QKA_BASE_KIND, n_qubits, cfg.reps))
        qcfg = qka.QkaConfig(
            max_iterations=cfg.qka.max_iterations,
            learning_rate=cfg.qka.learning_rate,
            perturbation=cfg.qka.perturbation,
            svm_c=cfg.svm_c,
            seed=_kernel_seed(cfg, tag),
        )
        qka_result = qka.spsa_train(cov, Ztr, ytr, qcfg)
        K = qka.gram_lambda(cov, qka_result.lambda_star, Ztr, mode)
        Kx = qka.cross_gram_lambda(cov, qka_result.lambda_star, Zte, Ztr, mode)
    else:
        spec = FeatureMapSpec(cfg.algorithm, n_qubits, cfg.reps)
        K = qkernel.gram(spec, Ztr, mode)
        Kx = qkernel.cross_gram(spec, Zte, Ztr, mode)
    if mode != qkernel.EXACT and cfg.psd_clip:
        K = qkernel.psd_clip(K)
    return K.entries, Kx.entries, qka_result


def fit_and_score(cfg: ExperimentConfig, prep: FittedPrep, Xtr, ytr, Xte, yte, tag: int = 0):
    """Accuracy of an OVO SVM trained on ``(Xtr, ytr)`` and scored on ``(Xte, yte)``."""
    Ztr = prep.transform(Xtr)
    Zte = prep.transform(Xte)
    K, Kx, qka_result = build_kernels(cfg, Ztr, ytr, Zte, tag)
    model = svm.ovo_train(K, ytr, cfg.svm_c)
    pred = svm.ovo_predict(model, Kx)
    return float(np.mean(pred == yte)), qka_result


def cv_statistics(scores) -> dict:
    s = np.asarray(scores, dtype=np.float64)
    mean = float(np.mean(s))
    std = float(np.std(s))
    return {"cv_mean": mean, "cv_std": std, "ci95": [mean - CI_WIDTH * std, mean + CI_WIDTH * std]}


def kfold_cv(cfg: ExperimentConfig, train: data.Dataset, fit_prep_once: bool = False, preps: list | None = None) -> dict:
    """Stratified k-fold CV; preprocessing is fitted on each fold's training rows.

    ``preps``, when given, collects each fold's fitted preprocessing state.
    """
    X, y = train.features, train.labels
    folds = data.stratified_folds(y, cfg.folds, cfg.seed)
    shared = fit_prep(cfg, X, y) if fit_prep_once else None
    scores = []
    for f, val_idx in enumerate(folds):
        tr_idx = np.setdiff1d(np.arange(len(y)), val_idx)
        prep = shared or fit_prep(cfg, X[tr_idx], y[tr_idx])
        if preps is not None:
            preps.append(prep)
        acc, _ = fit_and_score(cfg, prep, X[tr_idx], y[tr_idx], X[val_idx], y[val_idx], tag=f + 1)
        log.debug("fold %d accuracy %.4f", f, acc)
        scores.append(acc)
    return {"fold_scores": scores, **cv_statistics(scores)}


@dataclass
class CvReport:
    config: dict
    fold_scores: list
    cv_mean: float
    cv_std: float
    ci95: list
    test_accuracy: float
    timings: dict = field(default_factory=dict)
    qka: dict | None = None
    versions: dict = field(default_factory=dict)
    n_samples: int = 0

    def to_dict(self) -> dict:
        out = {
            "config": self.config,
            "fold_scores": list(self.fold_scores),
            "cv_mean": self.cv_mean,
            "cv_std": self.cv_std,
            "ci95": list(self.ci95),
            "test_accuracy": self.test_accuracy,
            "timings": dict(self.timings),
            "versions": dict(self.versions),
        }
        if self.qka is not None:
            out["qka"] = self.qka
        return out


def versions() -> dict:
    return {
        "qkbench": qkbench.__version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "python": platform.python_version(),
    }


@contextlib.contextmanager
def _stage(name: str, timings: dict):
    t0 = time.perf_counter()
    try:
        yield
    except QkbenchError as exc:
        raise type(exc)(f"[{name}] {exc}") from exc
    finally:
        timings[name] = time.perf_counter() - t0


def prepare_dataset(cfg: ExperimentConfig, timings: dict, dataset: data.Dataset | None = None) -> data.Dataset:
    with _stage("load", timings):
        ds = dataset if dataset is not None else data.load_csv(cfg.dataset_path, cfg.label_column)
    with _stage("clean", timings):
        ds = data.clean(ds, cfg.soma_column)
        if cfg.outlier_alpha is not None:
            kept, _ = extract.mahalanobis_filter(ds.features, cfg.outlier_alpha)
            ds = ds.subset(kept)
        if cfg.sample_cap is not None:
            ds = ds.subset(data.stratified_subsample(ds.labels, cfg.sample_cap, cfg.seed))
    return ds


def run_experiment(cfg: ExperimentConfig, fit_prep_once: bool = False, dataset: data.Dataset | None = None) -> CvReport:
    """load, clean, subsample, split, CV on train, refit on full train, score test."""
    timings: dict = {}
    t0 = time.perf_counter()
    ds = prepare_dataset(cfg, timings, dataset)
    with _stage("split", timings):
        train, test = data.split(ds, cfg.test_fraction, cfg.seed)
    with _stage("cv", timings):
        cv = kfold_cv(cfg, train, fit_prep_once)
    with _stage("final", timings):
        prep = fit_prep(cfg, train.features, train.labels)
        acc, qka_result = fit_and_score(
            cfg, prep, train.features, train.labels, test.features, test.labels, tag=0
        )
    timings["total"] = time.perf_counter() - t0
    return CvReport(
        config=cfg.to_dict(),
        fold_scores=cv["fold_scores"],
        cv_mean=cv["cv_mean"],
        cv_std=cv["cv_std"],
        ci95=cv["ci95"],
        test_accuracy=acc,
        timings=timings,
        qka=None if qka_result is None else qka_result.to_dict(),
        versions=versions(),
        n_samples=len(ds),
    )


def grid_configs(base: ExperimentConfig, rescalers, selectors, algorithms, sample_caps=(None,)):
    """Cartesian product of grid axes over a base config, in deterministic order."""
    k = base.reducer.k
    for cap in sample_caps:
        for r in rescalers:
            for sel in selectors:
                for alg in algorithms:
                    yield base.replace(
                        rescaler=r, algorithm=alg, sample_cap=cap, reducer={"kind": sel, "k": k}
                    )


def run_grid(configs, dataset: data.Dataset | None = None, fit_prep_once: bool = False) -> list[dict]:
    """Run every config; a failing cell yields ``{"config", "error"}`` instead of aborting."""
    results = []
    for cfg in configs:
        try:
            results.append(run_experiment(cfg, fit_prep_once, dataset).to_dict())
        except QkbenchError as exc:
            log.warning("grid cell %s/%s/%s failed: %s", cfg.rescaler, cfg.reducer.kind, cfg.algorithm, exc)
            results.append({"config": cfg.to_dict(), "error": f"{type(exc).__name__}: {exc}"})
    return results


def sample_scaling(cfg: ExperimentConfig, caps=DEFAULT_SAMPLE_CAPS, dataset: data.Dataset | None = None) -> list[dict]:
    """One score row per sample cap (``None`` means the full cleaned dataset)."""
    rows = []
    for cap in caps:
        report = run_experiment(cfg.replace(sample_cap=cap), dataset=dataset)
        rows.append({
            "sample_cap": cap,
            "n_samples": report.n_samples,
            "cv_mean": report.cv_mean,
            "cv_std": report.cv_std,
            "test_accuracy": report.test_accuracy,
        })
    return rows
