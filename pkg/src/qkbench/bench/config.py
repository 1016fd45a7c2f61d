"""Declarative experiment configuration, loaded from JSON with strict key checking."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from qkbench.errors import ConfigurationError
from qkbench.featuremap import CONFIG_NAMES as QUANTUM_NAMES
from qkbench.preprocess.rescale import CONFIG_NAMES as RESCALER_NAMES
from qkbench.statevec import MAX_QUBITS

CLASSICAL_ALGORITHMS = ("svm_linear", "svm_rbf", "svm_poly", "svm_sigmoid")
QKA_ALGORITHM = "q_kernel_training"
QUANTUM_ALGORITHMS = tuple(QUANTUM_NAMES) + (QKA_ALGORITHM,)
ALGORITHMS = CLASSICAL_ALGORITHMS + QUANTUM_ALGORITHMS
RESCALERS = tuple(RESCALER_NAMES)
REDUCER_KINDS = ("select_tree", "select_forest", "pca", "lda", "none")
SELECTOR_NAMES = {"decision_tree": "select_tree", "random_forest": "select_forest"}


@dataclass(frozen=True)
class ReducerConfig:
    kind: str = "none"
    k: int | None = None

    def __post_init__(self):
        kind = SELECTOR_NAMES.get(self.kind, self.kind)
        if kind not in REDUCER_KINDS:
            raise ConfigurationError(f"unknown reducer kind {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        if kind != "none" and (self.k is None or self.k < 1):
            raise ConfigurationError(f"reducer {kind!r} needs k >= 1")


@dataclass(frozen=True)
class QkaSettings:
    max_iterations: int = 10
    learning_rate: float = 0.05
    perturbation: float = 0.05


@dataclass(frozen=True)
class ExperimentConfig:
    dataset_path: str
    rescaler: str
    algorithm: str
    reducer: ReducerConfig = field(default_factory=ReducerConfig)
    sample_cap: int | None = None
    reps: int = 2
    shots: int | None = None
    svm_c: float = 1.0
    folds: int = 5
    test_fraction: float = 0.2
    seed: int = 0
    label_column: str = "label"
    soma_column: str | None = None
    outlier_alpha: float | None = None
    psd_clip: bool = True
    qka: QkaSettings = field(default_factory=QkaSettings)

    def __post_init__(self):
        if isinstance(self.reducer, dict):
            object.__setattr__(self, "reducer", ReducerConfig(**self.reducer))
        if isinstance(self.qka, dict):
            object.__setattr__(self, "qka", _strict(QkaSettings, self.qka))
        if self.rescaler not in RESCALERS:
            raise ConfigurationError(f"unknown rescaler {self.rescaler!r}; expected one of {RESCALERS}")
        if self.algorithm not in ALGORITHMS:
            raise ConfigurationError(f"unknown algorithm {self.algorithm!r}; expected one of {ALGORITHMS}")
        if not 0 < self.test_fraction < 1:
            raise ConfigurationError("test_fraction must be in (0, 1)")
        if self.folds < 2:
            raise ConfigurationError("folds must be >= 2")
        if self.reps < 1:
            raise ConfigurationError("reps must be >= 1")
        if self.svm_c <= 0:
            raise ConfigurationError("svm_c must be > 0")
        if self.shots is not None and self.shots < 1:
            raise ConfigurationError("shots must be >= 1")
        if self.sample_cap is not None and self.sample_cap < 2:
            raise ConfigurationError("sample_cap must be >= 2")
        if self.outlier_alpha is not None and not 0 < self.outlier_alpha < 1:
            raise ConfigurationError("outlier_alpha must be in (0, 1)")
        if self.is_quantum and self.reducer.k is not None and self.reducer.k > MAX_QUBITS:
            raise ConfigurationError(f"quantum algorithms support at most {MAX_QUBITS} qubits")

    @property
    def is_quantum(self) -> bool:
        return self.algorithm in QUANTUM_ALGORITHMS

    def to_dict(self) -> dict:
        return asdict(self)

    def replace(self, **changes) -> "ExperimentConfig":
        data = self.to_dict()
        data.update(changes)
        return from_dict(data)


def _strict(cls, data: dict):
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigurationError(f"unknown {cls.__name__} keys: {unknown}")
    return cls(**data)


def from_dict(data: dict) -> ExperimentConfig:
    if not isinstance(data, dict):
        raise ConfigurationError("config must be a JSON object")
    data = dict(data)
    if isinstance(data.get("reducer"), dict):
        data["reducer"] = _strict(ReducerConfig, data["reducer"])
    missing = [k for k in ("dataset_path", "rescaler", "algorithm") if k not in data]
    if missing:
        raise ConfigurationError(f"config is missing required keys {missing}")
    return _strict(ExperimentConfig, data)


def load_config(path) -> ExperimentConfig:
    return from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
