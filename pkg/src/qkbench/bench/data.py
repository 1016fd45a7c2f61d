"""Tabular dataset ingestion, cleaning and stratified resampling."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from qkbench.errors import ConfigurationError, DataError, FormatError

MISSING_LABEL = -1


@dataclass
class Dataset:
    features: np.ndarray
    labels: np.ndarray
    label_names: list[str]
    feature_names: list[str]
    notes: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.features.ndim != 2 or self.features.shape[0] != self.labels.shape[0]:
            raise DataError(
                f"feature rows ({self.features.shape}) and labels ({self.labels.shape}) disagree"
            )

    def __len__(self) -> int:
        return self.labels.shape[0]

    def subset(self, idx) -> "Dataset":
        idx = np.asarray(idx, dtype=np.int64)
        return Dataset(
            self.features[idx], self.labels[idx], list(self.label_names), list(self.feature_names)
        )

    def select_features(self, cols) -> "Dataset":
        cols = list(cols)
        return Dataset(
            self.features[:, cols], self.labels, list(self.label_names),
            [self.feature_names[c] for c in cols],
        )


def _parse_float(cell: str):
    try:
        return float(cell)
    except ValueError:
        return None


def load_csv(path, label_column: str = "label") -> Dataset:
    """Read a header-row CSV; numeric columns become features, empty cells become NaN.

    Columns whose non-empty cells are all non-numeric (names, ids) are ignored.
    A column mixing numbers and text is a format error.
    """
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or not any(cell.strip() for cell in rows[0]):
        raise FormatError(f"{path}: empty file or missing header row")
    header = [h.strip() for h in rows[0]]
    body = [r for r in rows[1:] if any(cell.strip() for cell in r)]
    if label_column not in header:
        raise FormatError(f"{path}: label column {label_column!r} not in header")
    for lineno, r in enumerate(body, start=2):
        if len(r) != len(header):
            raise FormatError(f"{path}: row {lineno} has {len(r)} cells, header has {len(header)}")

    label_idx = header.index(label_column)
    raw_labels = [r[label_idx].strip() for r in body]
    names = sorted({lab for lab in raw_labels if lab})
    code = {name: k for k, name in enumerate(names)}
    labels = np.array([code.get(lab, MISSING_LABEL) for lab in raw_labels], dtype=np.int64)

    feature_cols, notes = [], []
    for c, name in enumerate(header):
        if c == label_idx:
            continue
        cells = [r[c].strip() for r in body]
        filled = [(i, cell) for i, cell in enumerate(cells) if cell]
        if not filled:
            notes.append(f"column {name!r} is empty; ignored")
            continue
        bad = [(i, cell) for i, cell in filled if _parse_float(cell) is None]
        if len(bad) == len(filled):
            notes.append(f"column {name!r} is non-numeric; ignored")
            continue
        if bad:
            i, cell = bad[0]
            raise FormatError(f"{path}: row {i + 2}, column {name!r}: non-numeric value {cell!r}")
        feature_cols.append(c)

    X = np.full((len(body), len(feature_cols)), np.nan)
    for j, c in enumerate(feature_cols):
        for i, r in enumerate(body):
            cell = r[c].strip()
            if cell:
                X[i, j] = float(cell)
    return Dataset(X, labels, names, [header[c] for c in feature_cols], notes)


def clean(ds: Dataset, soma_column: str | None = None) -> Dataset:
    """Drop rows with any missing or non-finite value, and optionally rows with zero soma surface."""
    keep = np.all(np.isfinite(ds.features), axis=1) & (ds.labels != MISSING_LABEL)
    if soma_column is not None:
        if soma_column not in ds.feature_names:
            raise ConfigurationError(f"soma column {soma_column!r} not among features")
        keep &= ds.features[:, ds.feature_names.index(soma_column)] != 0
    if np.all(keep):
        return ds
    return ds.subset(np.flatnonzero(keep))


def _round_half_up(v: float) -> int:
    return int(math.floor(v + 0.5))


def stratified_split_indices(labels, test_fraction: float, seed: int, label_names=None):
    """Per-class shuffled split; returns sorted ``(train_idx, test_idx)``."""
    if not 0 < test_fraction < 1:
        raise ConfigurationError(f"test_fraction must be in (0, 1), got {test_fraction}")
    labels = np.asarray(labels)
    rng = np.random.default_rng(seed)
    train, test = [], []
    for c in np.unique(labels):
        idx = np.flatnonzero(labels == c)
        if idx.size < 2:
            name = label_names[c] if label_names is not None else c
            raise DataError(f"class {name!r} has a single sample; cannot split")
        idx = rng.permutation(idx)
        n_test = min(max(_round_half_up(idx.size * test_fraction), 1), idx.size - 1)
        test.append(idx[:n_test])
        train.append(idx[n_test:])
    return np.sort(np.concatenate(train)), np.sort(np.concatenate(test))


def split(ds: Dataset, test_fraction: float = 0.2, seed: int = 0):
    train_idx, test_idx = stratified_split_indices(ds.labels, test_fraction, seed, ds.label_names)
    return ds.subset(train_idx), ds.subset(test_idx)


def stratified_folds(labels, k: int, seed: int) -> list[np.ndarray]:
    """Validation index sets of a stratified k-fold partition.

    Classes are shuffled, laid end to end in class order, and dealt round-robin,
    so fold sizes differ by at most one overall and per class.
    """
    labels = np.asarray(labels)
    if k < 2:
        raise ConfigurationError(f"folds must be >= 2, got {k}")
    classes, counts = np.unique(labels, return_counts=True)
    if counts.min() < k:
        c = classes[int(np.argmin(counts))]
        raise DataError(f"class {c!r} has {counts.min()} samples, fewer than {k} folds")
    rng = np.random.default_rng(seed)
    order = np.concatenate([rng.permutation(np.flatnonzero(labels == c)) for c in classes])
    return [np.sort(order[f::k]) for f in range(k)]


def stratified_subsample(labels, cap: int, seed: int) -> np.ndarray:
    """Sorted indices of a class-proportional subsample of size ``cap`` (largest remainder)."""
    labels = np.asarray(labels)
    n = labels.size
    if cap >= n:
        return np.arange(n)
    if cap < 1:
        raise ConfigurationError(f"sample_cap must be >= 1, got {cap}")
    classes, counts = np.unique(labels, return_counts=True)
    quota = counts * cap / n
    alloc = np.floor(quota).astype(int)
    for t in np.argsort(-(quota - alloc), kind="stable")[: cap - alloc.sum()]:
        alloc[t] += 1
    rng = np.random.default_rng(seed)
    picks = [rng.permutation(np.flatnonzero(labels == c))[:a] for c, a in zip(classes, alloc)]
    return np.sort(np.concatenate(picks))


def make_blobs_dataset(
    n_samples: int,
    n_classes: int,
    n_features: int,
    n_informative: int,
    separation: float = 4.0,
    spread: float = 1.0,
    seed: int = 0,
    offset: float = 0.0,
) -> Dataset:
    """Gaussian-mixture table: class means differ only on the first ``n_informative`` columns.

    The remaining columns are class-independent noise. ``offset`` shifts every
    value, e.g. to make the table strictly positive for log-based rescalers.
    """
    rng = np.random.default_rng(seed)
    centers = rng.normal(scale=separation, size=(n_classes, n_informative))
    labels = np.arange(n_samples) % n_classes
    X = rng.normal(scale=spread, size=(n_samples, n_features))
    X[:, :n_informative] += centers[labels]
    perm = rng.permutation(n_samples)
    names = [f"class_{k:02d}" for k in range(n_classes)]
    return Dataset(X[perm] + offset, labels[perm], names, [f"f{j}" for j in range(n_features)])


def write_csv(ds: Dataset, path, label_column: str = "label") -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(list(ds.feature_names) + [label_column])
        for row, lab in zip(ds.features, ds.labels):
            cells = ["" if not np.isfinite(v) else repr(float(v)) for v in row]
            w.writerow(cells + [ds.label_names[lab]])
