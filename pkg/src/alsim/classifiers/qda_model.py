"""Quadratic discriminant analysis with trace-scaled covariance ridge."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..taskgen import Dataset

_LOG_2PI = float(np.log(2.0 * np.pi))
_EPS_FLOOR = 1e-12


@dataclass(frozen=True)
class QdaModel:
    spec: object
    means: np.ndarray  # (2, p)
    inv_covs: np.ndarray  # (2, p, p)
    log_dets: np.ndarray  # (2,)
    log_priors: np.ndarray  # (2,)
    training_dim: int
    converged: bool = True

    def predict_proba(self, features: np.ndarray) -> np.ndarray:
        n, p = features.shape
        scores = np.empty((n, 2))
        for c in (0, 1):
            diff = features - self.means[c]
            quad = np.einsum("nd,de,ne->n", diff, self.inv_covs[c], diff)
            scores[:, c] = self.log_priors[c] - 0.5 * (quad + self.log_dets[c] + p * _LOG_2PI)
        scores -= scores.max(axis=1, keepdims=True)
        out = np.exp(scores)
        return out / out.sum(axis=1, keepdims=True)


def fit_qda(spec, train: Dataset, seed: int) -> QdaModel:
    """Per-class Gaussian fit; each covariance gets ridge eps*I with
    eps = spec.ridge * trace(cov)/p, floored so a constant class stays PD."""
    del seed
    p = train.p
    means = np.empty((2, p))
    inv_covs = np.empty((2, p, p))
    log_dets = np.empty(2)
    log_priors = np.empty(2)
    for c in (0, 1):
        rows = train.features[train.labels == c]
        means[c] = rows.mean(axis=0)
        centered = rows - means[c]
        cov = centered.T @ centered / (len(rows) - 1)
        eps = max(spec.ridge * float(np.trace(cov)) / p, _EPS_FLOOR)
        cov = cov + eps * np.eye(p)
        chol = np.linalg.cholesky(cov)
        inv_covs[c] = np.linalg.inv(cov)
        log_dets[c] = 2.0 * float(np.log(np.diag(chol)).sum())
        log_priors[c] = np.log(len(rows) / train.n)
    return QdaModel(
        spec=spec,
        means=means,
        inv_covs=inv_covs,
        log_dets=log_dets,
        log_priors=log_priors,
        training_dim=p,
    )
