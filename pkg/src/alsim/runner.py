"""Experiment execution: data splits, the 100-step budget loop, and the
floor/ceiling benchmarks.

One experiment runs a single selection-strategy trajectory plus n_rs
random-selection trajectories against a shared train/test realization. Every
refit is from scratch with one shared fit seed and a canonical (sorted)
labelled-row order, which pins all trajectories to identical endpoints:
S_0 = s_initial and S_100 = s_all bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import classifiers as cl
from .rng import generator, subseed
from .strategies import CommitteeSpec, PoolScores, qbc_disagreement, rank_pool_se, select_batch
from .taskgen import Dataset, Task, TaskSpec, build_task, estimate_bayes_error, sample_dataset


class RunnerError(RuntimeError):
    """A trajectory aborted (propagated fit failure); the experiment is flagged."""


class SplitError(ValueError):
    """Initial split could not realize both classes."""


@dataclass(frozen=True)
class ExperimentConfig:
    task_spec: TaskSpec
    classifier: cl.ClassifierSpec
    strategy: str
    committee: CommitteeSpec | None = None
    n_initial: int = 10
    pool_size: int = 1000
    n_test: int = 2000
    n_steps: int = 100
    n_rs: int = 10
    master_seed: int = 0
    ber_n_mc: int = 100_000
    benchmark_reps: int = 5
    benchmark_n: int = 5000

    def __post_init__(self) -> None:
        if self.strategy not in ("se", "qbc_ve", "qbc_kl", "random"):
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if self.strategy.startswith("qbc") and self.committee is None:
            object.__setattr__(self, "committee", CommitteeSpec())
        if self.n_initial < 10:
            raise ValueError("n_initial must be >= 10")
        if self.pool_size % self.n_steps != 0:
            raise ValueError("pool_size must be divisible by n_steps")
        if self.n_rs < 2:
            raise ValueError("n_rs must be >= 2")

    @property
    def batch_size(self) -> int:
        return self.pool_size // self.n_steps


@dataclass(frozen=True)
class Trajectory:
    scores: np.ndarray  # accuracy S_0 .. S_n_steps
    labelled_counts: np.ndarray
    strategy_id: str
    rs_instance: int | None = None
    selections: tuple = ()  # per-step tuples of train-set indices, for audits

    def __post_init__(self) -> None:
        if self.scores.shape != self.labelled_counts.shape:
            raise ValueError("scores and labelled_counts length mismatch")
        if np.any(np.diff(self.labelled_counts) <= 0):
            raise ValueError("labelled_counts must be strictly increasing")


@dataclass(frozen=True)
class Benchmarks:
    """Precomputable per-cell quantities, shared across repeats in a sweep."""

    ber_estimate: float
    ber_std_error: float
    opt_error_rate: float


@dataclass(frozen=True)
class ExperimentResult:
    config: ExperimentConfig
    al_trajectory: Trajectory
    rs_trajectories: tuple[Trajectory, ...]
    s_initial: float
    s_all: float
    space_for_al: float
    ber_estimate: float
    ber_std_error: float
    opt_error_rate: float

    def all_trajectories(self) -> tuple[Trajectory, ...]:
        return (self.al_trajectory, *self.rs_trajectories)


def space_for_al(s_all: float, s_initial: float) -> float:
    """Normalized headroom (s_all - s_initial) / s_all.

    Negative values (initial fit beats the full-data fit) are legal and
    surface in the output rather than being clamped.
    """
    if s_all <= 0:
        raise ValueError("s_all must be positive")
    return (s_all - s_initial) / s_all


def split_initial(train: Dataset, n_initial: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Disjoint (initial, pool) index partition with both classes initial.

    Resamples the permutation up to 100 times to get both classes into the
    initial set; pool labels stay inside the Dataset and are only read by the
    oracle lookup in the budget loop.
    """
    if n_initial >= train.n:
        raise ValueError("n_initial must be smaller than the training set")
    rng = generator(seed)
    for _ in range(100):
        perm = rng.permutation(train.n)
        initial = perm[:n_initial]
        if len(np.unique(train.labels[initial])) == 2:
            return np.sort(initial), np.sort(perm[n_initial:])
    raise SplitError("could not draw an initial set containing both classes")


def _fit_labelled(config: ExperimentConfig, train: Dataset, labelled: np.ndarray, fit_seed: int):
    # canonical sorted order makes the final refit identical to the s_all fit
    return cl.fit(config.classifier, train.subset(np.sort(labelled)), fit_seed)


def _committee_models(config: ExperimentConfig, train: Dataset, labelled: np.ndarray, fit_seed: int):
    data = train.subset(np.sort(labelled))
    return [
        cl.fit(spec, data, subseed(fit_seed, "committee", i))
        for i, spec in enumerate(config.committee.members)
    ]


def run_trajectory(
    config: ExperimentConfig,
    train: Dataset,
    test: Dataset,
    initial_idx: np.ndarray,
    pool_idx: np.ndarray,
    strategy: str,
    fit_seed: int,
    selection_seed: int,
    rs_instance: int | None = None,
    record_selections: bool = False,
) -> Trajectory:
    """One score trajectory over the budget steps.

    The model retrained after step i-1 scores the remaining pool for step i;
    the random baseline draws from its own seed stream and never consults
    scores. The pool is exhausted exactly at the final step.
    """
    n_steps = config.n_steps
    batch = config.batch_size
    scores = np.empty(n_steps + 1)
    counts = np.empty(n_steps + 1, dtype=int)
    selections = []

    labelled = initial_idx.copy()
    remaining = pool_idx.copy()
    try:
        model = _fit_labelled(config, train, labelled, fit_seed)
    except cl.FitError as exc:
        raise RunnerError(f"initial fit failed: {exc}") from exc
    scores[0] = cl.score(model, test)
    counts[0] = labelled.size

    for i in range(1, n_steps + 1):
        pool_features = train.features[remaining]
        if strategy == "se":
            pool_view = Dataset(pool_features, np.zeros(remaining.size, dtype=int), train.column_meta)
            ranked = rank_pool_se(model, pool_view)
        elif strategy in ("qbc_ve", "qbc_kl"):
            pool_view = Dataset(pool_features, np.zeros(remaining.size, dtype=int), train.column_meta)
            members = _committee_models(config, train, labelled, fit_seed)
            ranked = qbc_disagreement(members, pool_view, config.committee.disagreement)
        else:  # random baseline: scores are never computed, let alone read
            ranked = PoolScores(np.zeros(remaining.size), "random")
        picked = select_batch(ranked, batch, seed=subseed(selection_seed, "step", i))
        chosen_rows = remaining[picked]
        remaining = np.delete(remaining, picked)
        labelled = np.concatenate([labelled, chosen_rows])  # oracle reveals labels here
        if record_selections:
            selections.append(tuple(int(r) for r in chosen_rows))
        try:
            model = _fit_labelled(config, train, labelled, fit_seed)
        except cl.FitError as exc:
            raise RunnerError(f"refit failed at step {i}: {exc}") from exc
        scores[i] = cl.score(model, test)
        counts[i] = labelled.size

    assert remaining.size == 0, "pool must be exhausted at the final step"
    return Trajectory(
        scores=scores,
        labelled_counts=counts,
        strategy_id=strategy,
        rs_instance=rs_instance,
        selections=tuple(selections),
    )


def run_experiment(config: ExperimentConfig, benchmarks: Benchmarks | None = None) -> ExperimentResult:
    """One full experiment: the strategy trajectory, n_rs RS trajectories, and
    the floor/ceiling benchmarks. Bit-identical when re-run with one config.

    Sub-seeds derive from (master_seed, role, instance), so results do not
    depend on the execution order of the RS instances.
    """
    seed = config.master_seed
    task = build_task(config.task_spec)
    train = sample_dataset(task, config.n_initial + config.pool_size, subseed(seed, "train"))
    test = sample_dataset(task, config.n_test, subseed(seed, "test"))
    initial_idx, pool_idx = split_initial(train, config.n_initial, subseed(seed, "split"))
    fit_seed = subseed(seed, "fit")

    al = run_trajectory(
        config, train, test, initial_idx, pool_idx,
        strategy=config.strategy, fit_seed=fit_seed,
        selection_seed=subseed(seed, "al-selection"),
    )
    rs = tuple(
        run_trajectory(
            config, train, test, initial_idx, pool_idx,
            strategy="random", fit_seed=fit_seed,
            selection_seed=subseed(seed, "rs-selection", j),
            rs_instance=j,
        )
        for j in range(config.n_rs)
    )

    s_initial = float(al.scores[0])
    full_model = cl.fit(config.classifier, train, fit_seed)
    s_all = float(cl.score(full_model, test))
    for traj in (al, *rs):
        assert traj.scores[0] == s_initial and traj.scores[-1] == s_all, (
            "trajectory endpoints must match the floor/ceiling benchmarks"
        )

    if benchmarks is None:
        ber = estimate_bayes_error(task, config.ber_n_mc, subseed(seed, "ber"))
        opt = cl.optimum_error_rate(
            config.classifier, task,
            reps=config.benchmark_reps, n_large=config.benchmark_n,
            seed=subseed(seed, "bench"),
        )
        benchmarks = Benchmarks(ber.rate, ber.std_error, opt)

    return ExperimentResult(
        config=config,
        al_trajectory=al,
        rs_trajectories=rs,
        s_initial=s_initial,
        s_all=s_all,
        space_for_al=space_for_al(s_all, s_initial),
        ber_estimate=benchmarks.ber_estimate,
        ber_std_error=benchmarks.ber_std_error,
        opt_error_rate=benchmarks.opt_error_rate,
    )


def compute_benchmarks(config: ExperimentConfig, seed: int) -> Benchmarks:
    """Benchmarks for a cell, computable once and shared across repeats."""
    task = build_task(config.task_spec)
    ber = estimate_bayes_error(task, config.ber_n_mc, subseed(seed, "ber"))
    opt = cl.optimum_error_rate(
        config.classifier, task,
        reps=config.benchmark_reps, n_large=config.benchmark_n,
        seed=subseed(seed, "bench"),
    )
    return Benchmarks(ber.rate, ber.std_error, opt)
