"""Synthetic binary classification tasks built from Gaussian cluster mixtures.

A task is a generative model: per-class mixtures of Gaussian clusters in a
low-dimensional base space, an optional block of class-independent noise
dimensions, and an input transform (continuous / discretized / mixed). Class
separation is controlled by a single scale multiplier on the cluster mean
offsets, which is calibrated against a target Bayes error rate by bisection.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from .rng import generator

INPUT_TYPES = ("continuous", "discretized", "mixed")
TASK_IDS = ("sd10", "sd2", "sd7", "sd8")
TARGET_BERS = (0.10, 0.20, 0.35)
DISCRETIZE_BINS = 8
NOISE_BASE_DIM = 2  # presets are defined in 2-D; extra dims are label-independent noise

_LOG_2PI = float(np.log(2.0 * np.pi))


class TaskError(ValueError):
    """Invalid task definition or unknown preset."""


class CalibrationError(TaskError):
    """Separation-scale calibration could not reach the target error rate."""


@dataclass(frozen=True)
class GaussianCluster:
    """One mixture component of one class, with realized (scaled) mean."""

    mean: tuple[float, ...]
    covariance: tuple[tuple[float, ...], ...]
    weight: float
    class_label: int

    def __post_init__(self) -> None:
        cov = np.asarray(self.covariance, dtype=float)
        mean = np.asarray(self.mean, dtype=float)
        if cov.shape != (mean.size, mean.size):
            raise TaskError("covariance shape does not match mean dimension")
        if not np.allclose(cov, cov.T):
            raise TaskError("covariance must be symmetric")
        try:
            np.linalg.cholesky(cov)
        except np.linalg.LinAlgError:
            raise TaskError("covariance must be positive-definite") from None
        if not self.weight > 0:
            raise TaskError("cluster weight must be positive")
        if self.class_label not in (0, 1):
            raise TaskError("class_label must be 0 or 1")


@dataclass(frozen=True)
class ClusterTemplate:
    """Preset geometry: realized mean = anchor + separation_scale * offset."""

    anchor: tuple[float, ...]
    offset: tuple[float, ...]
    covariance: tuple[tuple[float, ...], ...]
    weight: float
    class_label: int

    def realize(self, scale: float) -> GaussianCluster:
        mean = tuple(a + scale * o for a, o in zip(self.anchor, self.offset))
        return GaussianCluster(mean, self.covariance, self.weight, self.class_label)


@dataclass(frozen=True)
class TaskSpec:
    """Declarative description of a task instance.

    ``separation_scale=None`` selects the shipped calibrated scale for
    ``(task_id, target_ber)``.
    """

    task_id: str
    input_type: str = "continuous"
    input_dim: int = 2
    target_ber: float = 0.20
    separation_scale: float | None = None
    class_prior: float = 0.5
    clusters: tuple[ClusterTemplate, ...] = field(default=())

    def __post_init__(self) -> None:
        if self.input_type not in INPUT_TYPES:
            raise TaskError(f"unknown input_type {self.input_type!r}")
        if self.input_dim not in (2, 10):
            raise TaskError("input_dim must be 2 or 10")
        if not 0.0 < self.class_prior < 1.0:
            raise TaskError("class_prior must lie in (0, 1)")
        if self.separation_scale is not None and not self.separation_scale >= 0:
            raise TaskError("separation_scale must be >= 0")


class BerEstimate(NamedTuple):
    rate: float
    std_error: float
    n_mc: int


@dataclass(frozen=True)
class Dataset:
    """Realized feature matrix with labels and per-column smoothness flags."""

    features: np.ndarray
    labels: np.ndarray
    column_meta: tuple[str, ...]

    def __post_init__(self) -> None:
        if self.features.ndim != 2 or self.features.shape[0] != self.labels.shape[0]:
            raise TaskError("features and labels disagree on row count")
        if self.features.shape[1] != len(self.column_meta):
            raise TaskError("column_meta length does not match feature width")
        if self.features.shape[0] < 1:
            raise TaskError("dataset must contain at least one row")

    @property
    def n(self) -> int:
        return int(self.features.shape[0])

    @property
    def p(self) -> int:
        return int(self.features.shape[1])

    def subset(self, indices: np.ndarray) -> "Dataset":
        return Dataset(self.features[indices], self.labels[indices], self.column_meta)


class Task:
    """Sampleable generative model with exact mixture posteriors.

    Immutable after construction; safe to share across parallel workers.
    """

    def __init__(
        self,
        clusters: tuple[GaussianCluster, ...],
        class_prior: float = 0.5,
        input_type: str = "continuous",
        noise_dims: int = 0,
        task_id: str = "custom",
        separation_scale: float = 1.0,
        target_ber: float | None = None,
    ):
        if not clusters:
            raise TaskError("task requires at least one cluster")
        if not any(c.class_label == 0 for c in clusters) or not any(
            c.class_label == 1 for c in clusters
        ):
            raise TaskError("task requires clusters for both classes")
        base_dim = len(clusters[0].mean)
        if any(len(c.mean) != base_dim for c in clusters):
            raise TaskError("all clusters must share the base dimension")
        self.clusters = clusters
        self.class_prior = float(class_prior)
        self.input_type = input_type
        self.noise_dims = int(noise_dims)
        self.base_dim = base_dim
        self.task_id = task_id
        self.separation_scale = float(separation_scale)
        self.target_ber = target_ber

        # Normalize weights within each class and precompute Gaussian terms.
        self._means = np.array([c.mean for c in clusters], dtype=float)
        self._labels = np.array([c.class_label for c in clusters], dtype=int)
        covs = np.array([c.covariance for c in clusters], dtype=float)
        raw_w = np.array([c.weight for c in clusters], dtype=float)
        w = raw_w.copy()
        for label in (0, 1):
            mask = self._labels == label
            total = raw_w[mask].sum()
            if total <= 0:
                raise TaskError("cluster weights must sum to a positive value per class")
            w[mask] = raw_w[mask] / total
        self._weights = w
        self._chols = np.linalg.cholesky(covs)
        self._inv_covs = np.array([np.linalg.inv(c) for c in covs])
        logdets = np.array([2.0 * np.log(np.diag(L)).sum() for L in self._chols])
        self._log_norm = -0.5 * (base_dim * _LOG_2PI + logdets)

    @property
    def input_dim(self) -> int:
        return self.base_dim + self.noise_dims

    def log_component_densities(self, x: np.ndarray) -> np.ndarray:
        """log of weight_j * N(x; mean_j, cov_j) for each cluster j, shape (n, J)."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        diffs = x[:, None, :] - self._means[None, :, :]  # (n, J, d)
        quad = np.einsum("njd,jde,nje->nj", diffs, self._inv_covs, diffs)
        return np.log(self._weights)[None, :] + self._log_norm[None, :] - 0.5 * quad

    def class_log_densities(self, x: np.ndarray) -> np.ndarray:
        """log p(x | class c) for c in {0, 1}, shape (n, 2)."""
        comp = self.log_component_densities(x)
        out = np.empty((comp.shape[0], 2))
        for label in (0, 1):
            block = comp[:, self._labels == label]
            m = block.max(axis=1)
            out[:, label] = m + np.log(np.exp(block - m[:, None]).sum(axis=1))
        return out

    def posterior(self, x: np.ndarray) -> np.ndarray:
        """Exact class posterior p(c | x), rows summing to 1."""
        logd = self.class_log_densities(x)
        logd[:, 0] += np.log(self.class_prior)
        logd[:, 1] += np.log(1.0 - self.class_prior)
        logd -= logd.max(axis=1, keepdims=True)
        dens = np.exp(logd)
        total = dens.sum(axis=1, keepdims=True)
        if np.any(total <= 0) or not np.all(np.isfinite(total)):
            raise TaskError("degenerate task: zero total density")
        return dens / total

    def bayes_predict(self, x: np.ndarray) -> np.ndarray:
        post = self.posterior(x)
        return (post[:, 1] > post[:, 0]).astype(int)

    def sample_base(self, n: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
        """Draw labels and base-space features, before noise dims and transforms."""
        labels = (rng.random(n) >= self.class_prior).astype(int)
        x = np.empty((n, self.base_dim))
        z = rng.standard_normal((n, self.base_dim))
        for label in (0, 1):
            rows = np.flatnonzero(labels == label)
            if rows.size == 0:
                continue
            members = np.flatnonzero(self._labels == label)
            probs = self._weights[members]
            choice = members[rng.choice(len(members), size=rows.size, p=probs)]
            for j in np.unique(choice):
                sel = rows[choice == j]
                x[sel] = self._means[j] + z[sel] @ self._chols[j].T
        return x, labels

    def audit_dict(self) -> dict:
        """Self-describing representation of the generative model."""
        return {
            "task_id": self.task_id,
            "separation_scale": self.separation_scale,
            "target_ber": self.target_ber,
            "class_prior": self.class_prior,
            "input_type": self.input_type,
            "base_dim": self.base_dim,
            "noise_dims": self.noise_dims,
            "clusters": [
                {
                    "class_label": c.class_label,
                    "weight": c.weight,
                    "mean": list(c.mean),
                    "covariance": [list(row) for row in c.covariance],
                }
                for c in self.clusters
            ],
        }

    def audit_text(self) -> str:
        return json.dumps(self.audit_dict(), indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# Presets
# ---------------------------------------------------------------------------
# Fixed, version-frozen geometries. sd2 uses one heteroscedastic cluster per
# class (single curved boundary); sd7 and sd8 use two and three mirrored
# cluster pairs (increasing boundary complexity); sd10 interleaves two pairs
# in a checkerboard arrangement. For the mirrored presets both classes
# coincide exactly at separation scale 0.

def _pair(anchor, offset, cov, weight):
    return (
        ClusterTemplate(anchor, tuple(-o for o in offset), cov, weight, 0),
        ClusterTemplate(anchor, offset, cov, weight, 1),
    )


_SD2 = (
    ClusterTemplate((0.0, 0.0), (-1.0, 0.0), ((1.0, 0.0), (0.0, 1.0)), 1.0, 0),
    ClusterTemplate((0.0, 0.0), (1.0, 0.0), ((1.3, 0.35), (0.35, 0.8)), 1.0, 1),
)

_SD7 = (
    *_pair((0.0, 1.2), (1.0, -0.2), ((0.9, 0.2), (0.2, 0.7)), 0.5),
    *_pair((0.0, -1.2), (0.8, 0.4), ((0.7, -0.15), (-0.15, 1.0)), 0.5),
)

_SD8 = (
    *_pair((0.0, 2.2), (1.1, 0.0), ((0.8, 0.0), (0.0, 0.5)), 0.4),
    *_pair((0.0, 0.0), (-1.1, 0.0), ((0.7, 0.12), (0.12, 0.45)), 0.35),
    *_pair((0.0, -2.2), (1.1, 0.0), ((0.6, -0.12), (-0.12, 0.5)), 0.25),
)

_SD10 = (
    *_pair((-1.4, 0.0), (0.0, -1.0), ((0.6, 0.2), (0.2, 0.55)), 0.5),
    *_pair((1.4, 0.0), (0.0, 1.0), ((0.6, -0.2), (-0.2, 0.55)), 0.5),
)

PRESETS: dict[str, tuple[ClusterTemplate, ...]] = {
    "sd2": _SD2,
    "sd7": _SD7,
    "sd8": _SD8,
    "sd10": _SD10,
}

# Frozen separation scales per (task_id, target_ber), regenerated by
# scripts/calibrate_presets.py (bisection under common random numbers at
# n_mc=400000, cross-checked at n_mc=10^5 with fresh seeds).
CALIBRATED_SCALES: dict[tuple[str, float], float] = {
    ("sd10", 0.1): 1.026153564453125,
    ("sd10", 0.2): 0.643341064453125,
    ("sd10", 0.35): 0.289154052734375,
    ("sd2", 0.1): 1.353179931640625,
    ("sd2", 0.2): 0.883087158203125,
    ("sd2", 0.35): 0.387054443359375,
    ("sd7", 0.1): 1.142791748046875,
    ("sd7", 0.2): 0.748565673828125,
    ("sd7", 0.35): 0.344146728515625,
    ("sd8", 0.1): 1.404937744140625,
    ("sd8", 0.2): 0.783721923828125,
    ("sd8", 0.35): 0.340728759765625,
}


def make_spec(
    task_id: str,
    input_type: str = "continuous",
    input_dim: int = 2,
    target_ber: float = 0.20,
    separation_scale: float | None = None,
    class_prior: float = 0.5,
) -> TaskSpec:
    """TaskSpec for a shipped preset, with its frozen cluster geometry."""
    if task_id not in PRESETS:
        raise TaskError(f"unknown task_id {task_id!r}; expected one of {sorted(PRESETS)}")
    return TaskSpec(
        task_id=task_id,
        input_type=input_type,
        input_dim=input_dim,
        target_ber=target_ber,
        separation_scale=separation_scale,
        class_prior=class_prior,
        clusters=PRESETS[task_id],
    )


def build_task(spec: TaskSpec) -> Task:
    """Realize a TaskSpec into a sampleable Task.

    Applies the separation scale to every cluster mean offset and configures
    the noise-dimension block. Unknown presets and non-PD covariances are
    rejected here.
    """
    templates = spec.clusters
    if not templates:
        if spec.task_id not in PRESETS:
            raise TaskError(f"unknown task_id {spec.task_id!r}; expected one of {sorted(PRESETS)}")
        templates = PRESETS[spec.task_id]
    scale = spec.separation_scale
    if scale is None:
        key = (spec.task_id, float(spec.target_ber))
        if key not in CALIBRATED_SCALES:
            raise CalibrationError(
                f"no calibrated scale for {key}; pass separation_scale or run calibration"
            )
        scale = CALIBRATED_SCALES[key]
    clusters = tuple(t.realize(scale) for t in templates)
    noise = spec.input_dim - len(templates[0].anchor)
    if noise < 0:
        raise TaskError("input_dim smaller than base cluster dimension")
    return Task(
        clusters,
        class_prior=spec.class_prior,
        input_type=spec.input_type,
        noise_dims=noise,
        task_id=spec.task_id,
        separation_scale=scale,
        target_ber=spec.target_ber,
    )


# ---------------------------------------------------------------------------
# Bayes error estimation and calibration
# ---------------------------------------------------------------------------

def estimate_bayes_error(task: Task, n_mc: int, seed: int) -> BerEstimate:
    """Monte Carlo Bayes error: sample, classify by exact posterior, count errors.

    Noise dimensions and input transforms do not change the Bayes rule, so the
    estimate is computed in the base space.
    """
    if n_mc < 10_000:
        raise ValueError("n_mc must be at least 10^4")
    rng = generator(seed)
    x, y = task.sample_base(int(n_mc), rng)
    errors = task.bayes_predict(x) != y
    rate = float(errors.mean())
    se = float(np.sqrt(rate * (1.0 - rate) / n_mc))
    return BerEstimate(rate=rate, std_error=se, n_mc=int(n_mc))


def calibrate_separation(
    spec: TaskSpec,
    target_ber: float,
    tol: float = 0.005,
    n_mc: int = 100_000,
    seed: int = 0,
    max_scale: float = 4096.0,
    max_iter: int = 80,
) -> float:
    """Bisection on separation_scale until the estimated BER hits the target.

    All Monte Carlo evaluations share one seed (common random numbers), which
    makes the search deterministic and keeps the estimated BER monotone
    non-increasing in the scale; monotonicity is checked on each bracket.
    """
    if not 0.0 < target_ber < 0.5:
        raise CalibrationError(f"target BER {target_ber} is outside (0, 0.5)")
    if tol < 0.005:
        raise ValueError("tol must be at least 0.005")

    def ber_at(scale: float) -> float:
        task = build_task(replace(spec, separation_scale=scale))
        return estimate_bayes_error(task, n_mc, seed).rate

    noise_slack = 4.0 * np.sqrt(0.25 / n_mc)
    lo, hi = 0.0, 1.0
    ber_lo = ber_at(lo)
    if ber_lo < target_ber - tol:
        raise CalibrationError(
            f"target BER {target_ber} unreachable: BER at zero separation is {ber_lo:.4f}"
        )
    ber_hi = ber_at(hi)
    while ber_hi > target_ber and hi < max_scale:
        hi *= 2.0
        ber_hi = ber_at(hi)
    if ber_hi > target_ber:
        raise CalibrationError(
            f"target BER {target_ber} unreachable: BER at scale {hi} is still {ber_hi:.4f}"
        )

    for _ in range(max_iter):
        if ber_lo < ber_hi - noise_slack:
            raise CalibrationError(
                "BER is not monotone non-increasing on the bracket "
                f"[{lo:.4g}, {hi:.4g}]: {ber_lo:.4f} < {ber_hi:.4f}"
            )
        mid = 0.5 * (lo + hi)
        ber_mid = ber_at(mid)
        if abs(ber_mid - target_ber) <= tol:
            return mid
        if ber_mid > target_ber:
            lo, ber_lo = mid, ber_mid
        else:
            hi, ber_hi = mid, ber_mid
    raise CalibrationError(f"bisection did not reach tolerance {tol} in {max_iter} steps")


# ---------------------------------------------------------------------------
# Sampling and input transforms
# ---------------------------------------------------------------------------

def sample_dataset(task: Task, n: int, seed: int) -> Dataset:
    """Draw n i.i.d. labelled examples, append noise dims, apply the transform.

    Resamples until both classes are present (n >= 20 makes this a formality).
    """
    if n < 20:
        raise ValueError("n must be at least 20")
    rng = generator(seed)
    for _ in range(1000):
        x, y = task.sample_base(n, rng)
        if y.min() == 0 and y.max() == 1:
            break
    else:  # pragma: no cover - (p/2)^1000 is unreachable for p in (0,1)
        raise TaskError("could not realize both classes")
    if task.noise_dims > 0:
        noise = rng.standard_normal((n, task.noise_dims))
        x = np.hstack([x, noise])
    meta = ("continuous",) * x.shape[1]
    return apply_input_transform(Dataset(x, y, meta), task.input_type)


def discretize_column(values: np.ndarray, bins: int = DISCRETIZE_BINS) -> np.ndarray:
    """Equal-frequency binning: each value becomes the mean of its rank bin.

    Idempotent: re-binning collapsed values reproduces the same bin means. A
    zero-variance column is preserved unchanged.
    """
    values = np.asarray(values, dtype=float)
    out = np.empty_like(values)
    order = np.argsort(values, kind="stable")
    for group in np.array_split(order, bins):
        if group.size == 0:
            continue
        lo, hi = values[group[0]], values[group[-1]]
        # constant groups keep their value exactly, which makes re-binning
        # collapsed columns bit-identical (idempotence)
        out[group] = lo if lo == hi else values[group].mean()
    return out


def apply_input_transform(dataset: Dataset, input_type: str) -> Dataset:
    """Apply the smoothness transform: identity, all-column, or even-column binning."""
    if input_type not in INPUT_TYPES:
        raise TaskError(f"unknown input_type {input_type!r}")
    if input_type == "continuous":
        return dataset
    features = dataset.features.copy()
    meta = list(dataset.column_meta)
    for col in range(features.shape[1]):
        if input_type == "mixed" and col % 2 == 1:
            continue
        features[:, col] = discretize_column(features[:, col])
        meta[col] = "discretized"
    return Dataset(features, dataset.labels, tuple(meta))
