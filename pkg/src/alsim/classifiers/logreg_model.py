"""Ridge-penalized logistic regression fitted by IRLS."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from ..taskgen import Dataset

MAX_ITER = 100
TOL = 1e-8
_W_FLOOR = 1e-10


@dataclass(frozen=True)
class LogRegModel:
    spec: object
    beta: np.ndarray  # intercept first
    training_dim: int
    converged: bool
    n_iter: int

    def predict_proba(self, features: np.ndarray) -> np.ndarray:
        eta = self.beta[0] + features @ self.beta[1:]
        p1 = expit(eta)
        return np.column_stack([1.0 - p1, p1])


def fit_logreg(spec, train: Dataset, seed: int) -> LogRegModel:
    """IRLS for the L2-penalized logistic log-likelihood.

    The ridge term (spec.ridge, applied to every coefficient) keeps the
    optimum finite on separable data and the normal equations well posed on
    tiny labelled sets. Non-convergence returns the last iterate flagged.
    """
    del seed  # fit is deterministic; seed kept for interface uniformity
    X = np.column_stack([np.ones(train.n), train.features])
    y = train.labels.astype(float)
    q = X.shape[1]
    penalty = spec.ridge * np.eye(q)
    beta = np.zeros(q)
    converged = False
    n_iter = 0
    for n_iter in range(1, MAX_ITER + 1):
        eta = X @ beta
        p = expit(eta)
        w = np.maximum(p * (1.0 - p), _W_FLOOR)
        z = eta + (y - p) / w
        lhs = X.T @ (w[:, None] * X) + penalty
        rhs = X.T @ (w * z)
        beta_new = np.linalg.solve(lhs, rhs)
        delta = float(np.max(np.abs(beta_new - beta)))
        beta = beta_new
        if not np.all(np.isfinite(beta)):
            break
        if delta < TOL:
            converged = True
            break
    return LogRegModel(
        spec=spec,
        beta=beta,
        training_dim=train.p,
        converged=converged,
        n_iter=n_iter,
    )
