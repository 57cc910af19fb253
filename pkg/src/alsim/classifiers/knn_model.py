"""k-nearest-neighbour classifier with deterministic distance tie handling."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..taskgen import Dataset


@dataclass(frozen=True)
class KnnModel:
    spec: object
    train_x: np.ndarray
    train_y: np.ndarray
    k_eff: int  # min(k, n); smaller labelled sets use every neighbour
    training_dim: int
    converged: bool = True

    def predict_proba(self, features: np.ndarray) -> np.ndarray:
        d2 = _sq_distances(features, self.train_x)
        k = self.k_eff
        ones = (self.train_y == 1)[None, :]
        if k >= self.train_x.shape[0]:
            p1 = np.full(features.shape[0], float(ones.sum()) / k)
            return np.column_stack([1.0 - p1, p1])
        # kth-smallest distance per row; exact ties at the boundary are taken
        # in index order, which is routine on discretized inputs
        kth = np.partition(d2, k - 1, axis=1)[:, k - 1 : k]
        closer = d2 < kth
        ones_closer = (closer & ones).sum(axis=1)
        tied = d2 == kth
        need = k - closer.sum(axis=1)
        n_tied = tied.sum(axis=1)
        ones_tied = (tied & ones).sum(axis=1)
        ambiguous = np.flatnonzero(n_tied > need)
        for i in ambiguous:  # only duplicated boundary distances land here
            take = np.flatnonzero(tied[i])[: need[i]]
            ones_tied[i] = np.count_nonzero(self.train_y[take] == 1)
        p1 = (ones_closer + ones_tied) / k
        return np.column_stack([1.0 - p1, p1])


def _sq_distances(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    d2 = (a * a).sum(axis=1)[:, None] + (b * b).sum(axis=1)[None, :] - 2.0 * (a @ b.T)
    return np.maximum(d2, 0.0)


def fit_knn(spec, train: Dataset, seed: int) -> KnnModel:
    del seed
    return KnnModel(
        spec=spec,
        train_x=train.features.copy(),
        train_y=train.labels.copy(),
        k_eff=min(spec.k, train.n),
        training_dim=train.p,
    )
