"""Classifier family behind a uniform fit / predict-probability interface.

All models are deterministic given (spec, training data, seed), immutable
after fit, and emit two-column posterior matrices whose rows sum to one.
Argmax ties are broken toward class 0 everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..taskgen import Dataset

KINDS = ("logreg", "qda", "knn", "random_forest", "svm")


class FitError(ValueError):
    """Raised when a model cannot be fitted on the given data."""


class DegenerateFitError(FitError):
    """Training set does not contain enough examples of each class."""


@dataclass(frozen=True)
class ClassifierSpec:
    """Which classifier to fit, plus its kind-specific settings."""

    kind: str
    k: int = 5  # knn neighbourhood size
    n_trees: int = 500  # random_forest ensemble size
    max_features: int | None = None  # random_forest per-split subset; floor(sqrt(p)) when None
    c_grid: tuple[float, ...] = (0.1, 1.0, 10.0)  # svm penalty grid for CV
    ridge: float = 1e-6  # logreg penalty / qda covariance regularizer

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown classifier kind {self.kind!r}")
        if self.k < 1 or self.k % 2 == 0:
            raise ValueError("k must be odd and >= 1")
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        if self.max_features is not None and self.max_features < 1:
            raise ValueError("max_features must be >= 1")
        if not self.c_grid or any(c <= 0 for c in self.c_grid):
            raise ValueError("c_grid must be non-empty and positive")
        if not self.ridge > 0:
            raise ValueError("ridge must be > 0")

    @property
    def min_class_count(self) -> int:
        return 1 if self.kind in ("knn", "random_forest") else 2


def logreg(ridge: float = 1e-6) -> ClassifierSpec:
    return ClassifierSpec("logreg", ridge=ridge)


def qda(ridge: float = 1e-6) -> ClassifierSpec:
    return ClassifierSpec("qda", ridge=ridge)


def knn(k: int = 5) -> ClassifierSpec:
    return ClassifierSpec("knn", k=k)


def random_forest(n_trees: int = 500, max_features: int | None = None) -> ClassifierSpec:
    return ClassifierSpec("random_forest", n_trees=n_trees, max_features=max_features)


def svm(c_grid: tuple[float, ...] = (0.1, 1.0, 10.0)) -> ClassifierSpec:
    return ClassifierSpec("svm", c_grid=c_grid)


def spec_from_name(name: str) -> ClassifierSpec:
    """Spec for a factor-level name such as 'qda' or 'knn21'."""
    if name.startswith("knn") and name[3:].isdigit():
        return knn(k=int(name[3:]))
    return ClassifierSpec(name)


def _check_train(spec: ClassifierSpec, train: Dataset) -> None:
    counts = np.bincount(train.labels, minlength=2)
    need = spec.min_class_count
    if counts[0] < need or counts[1] < need:
        raise DegenerateFitError(
            f"{spec.kind} needs >= {need} examples per class, got {counts.tolist()}"
        )


def fit(spec: ClassifierSpec, train: Dataset, seed: int):
    """Fit a model of the requested kind. Deterministic given (spec, train, seed)."""
    _check_train(spec, train)
    from . import forest, knn_model, logreg_model, qda_model, svm_model

    fitters = {
        "logreg": logreg_model.fit_logreg,
        "qda": qda_model.fit_qda,
        "knn": knn_model.fit_knn,
        "random_forest": forest.fit_forest,
        "svm": svm_model.fit_svm,
    }
    return fitters[spec.kind](spec, train, seed)


def predict_proba(model, features: np.ndarray) -> np.ndarray:
    """Posterior matrix (m, 2); rows in [0,1] and summing to 1."""
    features = np.asarray(features, dtype=float)
    if features.ndim != 2 or features.shape[1] != model.training_dim:
        raise ValueError(
            f"feature width {features.shape} does not match training dim {model.training_dim}"
        )
    return model.predict_proba(features)


def predict(model, features: np.ndarray) -> np.ndarray:
    """Argmax class labels; exact posterior ties go to class 0."""
    proba = predict_proba(model, features)
    return (proba[:, 1] > proba[:, 0]).astype(int)


def score(model, test: Dataset) -> float:
    """Accuracy on a test set."""
    if test.n == 0:
        raise ValueError("test set must be non-empty")
    return float(np.mean(predict(model, test.features) == test.labels))


from .benchmarks import classifier_mismatch, optimum_error_rate  # noqa: E402,F401
