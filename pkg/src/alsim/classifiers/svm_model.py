"""Linear SVM: batch subgradient descent on the hinge loss, penalty chosen by
5-fold cross-validation, posteriors via Platt scaling on held-out decisions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..rng import generator
from ..taskgen import Dataset

N_FOLDS = 5
N_STEPS = 400
PLATT_MAX_ITER = 100


@dataclass(frozen=True)
class SvmModel:
    spec: object
    weights: np.ndarray  # bias folded in as the leading component
    platt_a: float
    platt_b: float
    best_c: float
    cv_accuracy: float
    training_dim: int
    converged: bool = True

    def decision(self, features: np.ndarray) -> np.ndarray:
        return self.weights[0] + features @ self.weights[1:]

    def predict_proba(self, features: np.ndarray) -> np.ndarray:
        p1 = _platt_sigmoid(self.decision(features), self.platt_a, self.platt_b)
        return np.column_stack([1.0 - p1, p1])


def _platt_sigmoid(f: np.ndarray, a: float, b: float) -> np.ndarray:
    z = a * f + b
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = np.exp(-z[pos]) / (1.0 + np.exp(-z[pos]))
    out[~pos] = 1.0 / (1.0 + np.exp(z[~pos]))
    return out


def _hinge_descent(x_aug: np.ndarray, y_pm: np.ndarray, c: float) -> np.ndarray:
    """Minimize lam/2 ||w||^2 + mean(hinge) with lam = 1/(C n); full-batch
    subgradient steps with 1/(lam t) rates and tail averaging."""
    n = x_aug.shape[0]
    lam = 1.0 / (c * n)
    w = np.zeros(x_aug.shape[1])
    w_sum = np.zeros_like(w)
    tail = N_STEPS // 2
    for t in range(1, N_STEPS + 1):
        margin = y_pm * (x_aug @ w)
        viol = margin < 1.0
        grad = lam * w - (x_aug[viol] * y_pm[viol, None]).sum(axis=0) / n
        w = w - grad / (lam * (t + 1))
        if t > N_STEPS - tail:
            w_sum += w
    return w_sum / tail


def _stratified_folds(labels: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    fold = np.empty(labels.shape[0], dtype=int)
    for c in (0, 1):
        rows = np.flatnonzero(labels == c)
        rows = rows[rng.permutation(rows.size)]
        fold[rows] = np.arange(rows.size) % N_FOLDS
    return fold


def _fit_platt(decisions: np.ndarray, labels: np.ndarray) -> tuple[float, float]:
    """Newton fit of p(y=1|f) = 1/(1 + exp(A f + B)) with smoothed targets."""
    n1 = int(np.count_nonzero(labels == 1))
    n0 = labels.shape[0] - n1
    t = np.where(labels == 1, (n1 + 1.0) / (n1 + 2.0), 1.0 / (n0 + 2.0))
    a, b = 0.0, float(np.log((n0 + 1.0) / (n1 + 1.0)))
    f = decisions

    def objective(a_, b_):
        z = a_ * f + b_
        # stable cross-entropy: t*z + log(1+exp(-z)) for z>=0, else (t-1)*z + log(1+exp(z))
        pos = z >= 0
        vals = np.empty_like(z)
        vals[pos] = t[pos] * z[pos] + np.log1p(np.exp(-z[pos]))
        vals[~pos] = (t[~pos] - 1.0) * z[~pos] + np.log1p(np.exp(z[~pos]))
        return float(vals.sum())

    obj = objective(a, b)
    for _ in range(PLATT_MAX_ITER):
        z = a * f + b
        p = _platt_sigmoid(f, a, b)
        d1 = t - p
        d2 = np.maximum(p * (1.0 - p), 1e-12)
        g_a = float(np.dot(f, d1))
        g_b = float(d1.sum())
        if abs(g_a) < 1e-10 and abs(g_b) < 1e-10:
            break
        h_aa = float(np.dot(f * f, d2)) + 1e-12
        h_ab = float(np.dot(f, d2))
        h_bb = float(d2.sum()) + 1e-12
        det = h_aa * h_bb - h_ab * h_ab
        # Newton step for the minimizer: -H^{-1} g
        step_a = -(h_bb * g_a - h_ab * g_b) / det
        step_b = -(h_aa * g_b - h_ab * g_a) / det
        stepsize = 1.0
        while stepsize >= 1e-10:
            a_new, b_new = a + stepsize * step_a, b + stepsize * step_b
            obj_new = objective(a_new, b_new)
            if obj_new < obj + 1e-12:
                a, b, obj = a_new, b_new, obj_new
                break
            stepsize *= 0.5
        else:
            break
    return a, b


def fit_svm(spec, train: Dataset, seed: int) -> SvmModel:
    rng = generator(seed)
    x_aug = np.column_stack([np.ones(train.n), train.features])
    y_pm = np.where(train.labels == 1, 1.0, -1.0)
    fold = _stratified_folds(train.labels, rng)

    accuracy = {}
    oof_decisions = {}
    for c in spec.c_grid:
        correct, counted = 0, 0
        oof = np.zeros(train.n)
        for j in range(N_FOLDS):
            held = fold == j
            if held.sum() == 0:
                continue
            tr = ~held
            if len(np.unique(train.labels[tr])) < 2:
                continue
            w = _hinge_descent(x_aug[tr], y_pm[tr], c)
            d = x_aug[held] @ w
            oof[held] = d
            correct += int(np.count_nonzero((d > 0) == (train.labels[held] == 1)))
            counted += int(held.sum())
        accuracy[c] = correct / counted if counted else 0.0
        oof_decisions[c] = oof

    best_c = spec.c_grid[0]
    for c in spec.c_grid:
        if accuracy[c] > accuracy[best_c]:
            best_c = c

    platt_a, platt_b = _fit_platt(oof_decisions[best_c], train.labels)
    w = _hinge_descent(x_aug, y_pm, best_c)
    return SvmModel(
        spec=spec,
        weights=w,
        platt_a=platt_a,
        platt_b=platt_b,
        best_c=float(best_c),
        cv_accuracy=float(accuracy[best_c]),
        training_dim=train.p,
    )
