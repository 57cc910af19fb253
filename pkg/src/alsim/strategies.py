"""Pool scoring and batch selection: Shannon-entropy uncertainty sampling,
query-by-committee disagreement, and the random-selection baseline.

Scoring is a pure function of (models, pool features); strategies never see
pool labels. Selection is greedy top-k with index tie-breaking, except for
the random baseline which ignores scores entirely.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .classifiers import ClassifierSpec, knn, logreg, predict_proba, random_forest, svm
from .rng import generator
from .taskgen import Dataset

STRATEGY_IDS = ("se", "qbc_ve", "qbc_kl", "random")
DISAGREEMENT_MEASURES = ("vote_entropy", "avg_kl")
_CLAMP = 1e-12


@dataclass(frozen=True)
class PoolScores:
    """Per-example informativeness; higher means more worth labelling."""

    values: np.ndarray
    strategy_id: str

    def __post_init__(self) -> None:
        if self.strategy_id not in STRATEGY_IDS:
            raise ValueError(f"unknown strategy_id {self.strategy_id!r}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("pool scores must be finite")


def default_committee_members() -> tuple[ClassifierSpec, ...]:
    return (logreg(), knn(5), knn(21), svm(), random_forest())


@dataclass(frozen=True)
class CommitteeSpec:
    members: tuple[ClassifierSpec, ...] = field(default_factory=default_committee_members)
    disagreement: str = "avg_kl"

    def __post_init__(self) -> None:
        if len(self.members) < 2:
            raise ValueError("committee needs at least 2 members")
        if self.disagreement not in DISAGREEMENT_MEASURES:
            raise ValueError(f"unknown disagreement measure {self.disagreement!r}")

    @property
    def strategy_id(self) -> str:
        return "qbc_ve" if self.disagreement == "vote_entropy" else "qbc_kl"


def entropy(p: np.ndarray) -> float:
    """Shannon entropy (natural log) of one probability vector, 0*ln 0 := 0."""
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or np.any(p < 0) or abs(float(p.sum()) - 1.0) > 1e-9:
        raise ValueError("malformed probability vector")
    return float(_entropy_rows(p[None, :])[0])


def _entropy_rows(p: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0, p * np.log(p), 0.0)
    return -terms.sum(axis=1)


def rank_pool_se(model, pool: Dataset) -> PoolScores:
    """Posterior entropy of the current classifier at each pool example."""
    if pool.n == 0:
        raise ValueError("pool must be non-empty")
    proba = predict_proba(model, pool.features)
    return PoolScores(values=_entropy_rows(proba), strategy_id="se")


def qbc_disagreement(committee: list, pool: Dataset, measure: str = "avg_kl") -> PoolScores:
    """Committee disagreement per pool example.

    avg_kl: mean KL divergence of each member posterior from the consensus
    (the unweighted member mean). vote_entropy: entropy of the distribution
    of member argmax votes.
    """
    if measure not in DISAGREEMENT_MEASURES:
        raise ValueError(f"unknown disagreement measure {measure!r}")
    posteriors = np.stack([predict_proba(m, pool.features) for m in committee])  # (M, n, 2)
    if measure == "vote_entropy":
        votes = (posteriors[:, :, 1] > posteriors[:, :, 0]).astype(float)  # ties vote class 0
        v1 = votes.mean(axis=0)
        values = _entropy_rows(np.column_stack([1.0 - v1, v1]))
        return PoolScores(values=values, strategy_id="qbc_ve")
    consensus = posteriors.mean(axis=0)
    p = np.clip(posteriors, _CLAMP, 1.0 - _CLAMP)
    c = np.clip(consensus, _CLAMP, 1.0 - _CLAMP)
    kl = (p * np.log(p / c[None, :, :])).sum(axis=2)  # (M, n)
    return PoolScores(values=kl.mean(axis=0), strategy_id="qbc_kl")


def select_batch(scores: PoolScores, batch: int, seed: int | None = None) -> np.ndarray:
    """Indices of the batch to label, sorted ascending.

    Informative strategies take the top-scoring examples, breaking score ties
    by lower index (float-equal scores occur in bulk on discretized inputs).
    The random baseline samples uniformly without replacement from the seed,
    ignoring the score values.
    """
    n = scores.values.shape[0]
    if batch > n:
        raise ValueError(f"batch {batch} exceeds pool size {n}")
    if scores.strategy_id == "random":
        if seed is None:
            raise ValueError("random selection requires a seed")
        chosen = generator(seed).choice(n, size=batch, replace=False)
        return np.sort(chosen)
    order = np.argsort(-scores.values, kind="stable")
    return np.sort(order[:batch])
