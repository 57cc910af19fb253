"""Random forest: fully grown Gini trees on bootstrap samples.

Each split searches a fresh random subset of floor(sqrt(p)) features and the
forest posterior is the fraction of tree votes, so a single-tree forest with
the full feature set reproduces its tree exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..rng import generator
from ..taskgen import Dataset

_LEAF = -1


@dataclass
class _Tree:
    # flat arrays indexed by node id; feature == _LEAF marks a leaf whose
    # vote is stored in `vote`
    feature: list
    threshold: list
    left: list
    right: list
    vote: list

    def predict(self, features: np.ndarray) -> np.ndarray:
        out = np.empty(features.shape[0], dtype=int)
        for i, row in enumerate(features):
            node = 0
            while self.feature[node] != _LEAF:
                if row[self.feature[node]] <= self.threshold[node]:
                    node = self.left[node]
                else:
                    node = self.right[node]
            out[i] = self.vote[node]
        return out


def _best_split(x_node: np.ndarray, y_node: np.ndarray, features: np.ndarray):
    """Lowest weighted Gini over candidate features; ties keep the first
    candidate in draw order and the earliest split position."""
    n = y_node.shape[0]
    best = None  # (gini, feature, threshold)
    for f in features:
        xs = x_node[:, f]
        order = np.argsort(xs, kind="stable")
        xs_sorted = xs[order]
        ys_sorted = y_node[order]
        cut = np.flatnonzero(xs_sorted[:-1] < xs_sorted[1:])
        if cut.size == 0:
            continue
        ones_left = np.cumsum(ys_sorted)[cut]
        n_left = cut + 1.0
        n_right = n - n_left
        ones_right = float(ys_sorted.sum()) - ones_left
        q_left = ones_left / n_left
        q_right = ones_right / n_right
        gini = (n_left * 2.0 * q_left * (1.0 - q_left) + n_right * 2.0 * q_right * (1.0 - q_right)) / n
        pos = int(np.argmin(gini))
        if best is None or gini[pos] < best[0]:
            threshold = 0.5 * (xs_sorted[cut[pos]] + xs_sorted[cut[pos] + 1])
            best = (float(gini[pos]), int(f), float(threshold))
    return best


def _grow_tree(x: np.ndarray, y: np.ndarray, mtry: int, rng: np.random.Generator) -> _Tree:
    p = x.shape[1]
    tree = _Tree([], [], [], [], [])

    def new_node() -> int:
        tree.feature.append(_LEAF)
        tree.threshold.append(0.0)
        tree.left.append(-1)
        tree.right.append(-1)
        tree.vote.append(0)
        return len(tree.feature) - 1

    root = new_node()
    stack = [(root, np.arange(x.shape[0]))]
    while stack:
        node, idx = stack.pop()
        y_node = y[idx]
        ones = int(y_node.sum())
        if ones == 0 or ones == len(idx) or len(idx) < 2:
            tree.vote[node] = int(ones * 2 > len(idx))  # majority, ties to class 0
            continue
        features = rng.choice(p, size=mtry, replace=False)
        split = _best_split(x[idx], y_node, features)
        if split is None:  # all candidate features constant on this node
            tree.vote[node] = int(ones * 2 > len(idx))
            continue
        _, f, threshold = split
        go_left = x[idx, f] <= threshold
        left_id, right_id = new_node(), new_node()
        tree.feature[node] = f
        tree.threshold[node] = threshold
        tree.left[node] = left_id
        tree.right[node] = right_id
        stack.append((right_id, idx[~go_left]))
        stack.append((left_id, idx[go_left]))
    return tree


@dataclass(frozen=True)
class ForestModel:
    spec: object
    trees: tuple
    training_dim: int
    converged: bool = True

    def predict_proba(self, features: np.ndarray) -> np.ndarray:
        votes = np.zeros(features.shape[0])
        for tree in self.trees:
            votes += tree.predict(features)
        p1 = votes / len(self.trees)
        return np.column_stack([1.0 - p1, p1])


def fit_forest(spec, train: Dataset, seed: int) -> ForestModel:
    rng = generator(seed)
    n, p = train.features.shape
    mtry = spec.max_features if spec.max_features is not None else max(1, int(np.sqrt(p)))
    mtry = min(mtry, p)
    trees = []
    for _ in range(spec.n_trees):
        boot = rng.integers(0, n, size=n)
        trees.append(_grow_tree(train.features[boot], train.labels[boot], mtry, rng))
    return ForestModel(spec=spec, trees=tuple(trees), training_dim=p)
