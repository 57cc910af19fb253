import numpy as np
import pytest

from alsim import classifiers as cl
from alsim.rng import subseed
from alsim.runner import (
    Benchmarks,
    ExperimentConfig,
    RunnerError,
    SplitError,
    run_experiment,
    run_trajectory,
    space_for_al,
    split_initial,
)
from alsim.taskgen import Dataset, make_spec, sample_dataset, build_task

FAST_BENCH = Benchmarks(ber_estimate=0.2, ber_std_error=0.001, opt_error_rate=0.25)


def small_config(strategy="se", **kw):
    defaults = dict(
        task_spec=make_spec("sd2", separation_scale=1.0),
        classifier=cl.qda(),
        strategy=strategy,
        n_initial=10,
        pool_size=200,
        n_test=200,
        n_steps=100,
        n_rs=3,
        master_seed=42,
    )
    defaults.update(kw)
    return ExperimentConfig(**defaults)


class TestConfigValidation:
    def test_pool_not_divisible_rejected(self):
        with pytest.raises(ValueError, match="divisible"):
            small_config(pool_size=150)

    def test_small_n_initial_rejected(self):
        with pytest.raises(ValueError, match="n_initial"):
            small_config(n_initial=5)

    def test_qbc_gets_default_committee(self):
        config = small_config(strategy="qbc_kl")
        assert config.committee is not None
        assert config.batch_size == 2


class TestSplitInitial:
    def _train(self, n=1010, seed=0):
        task = build_task(make_spec("sd2", separation_scale=1.0))
        return sample_dataset(task, n, seed=seed)

    def test_partition_sizes_and_disjointness(self):
        train = self._train()
        initial, pool = split_initial(train, 10, seed=1)
        assert initial.size == 10 and pool.size == 1000
        assert np.intersect1d(initial, pool).size == 0
        assert np.array_equal(np.sort(np.concatenate([initial, pool])), np.arange(1010))

    def test_deterministic(self):
        train = self._train()
        a = split_initial(train, 25, seed=9)
        b = split_initial(train, 25, seed=9)
        assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])

    def test_initial_always_has_both_classes(self):
        train = self._train(n=200, seed=3)
        for seed in range(50):
            initial, _ = split_initial(train, 10, seed=seed)
            assert len(np.unique(train.labels[initial])) == 2

    def test_impossible_split_raises(self):
        x = np.random.default_rng(0).normal(size=(30, 2))
        labels = np.array([1] * 29 + [0])
        train = Dataset(x, labels, ("continuous", "continuous"))
        # n_initial=1 can never contain both classes
        with pytest.raises(SplitError):
            split_initial(train, 1, seed=0)

    def test_n_initial_too_large_rejected(self):
        train = self._train(n=50, seed=1)
        with pytest.raises(ValueError):
            split_initial(train, 50, seed=0)


class TestTrajectories:
    def test_labelled_counts_arithmetic(self):
        config = small_config()
        result = run_experiment(config, benchmarks=FAST_BENCH)
        counts = result.al_trajectory.labelled_counts
        assert counts[0] == 10
        assert np.array_equal(counts, 10 + 2 * np.arange(101))

    def test_every_trajectory_shares_endpoints(self):
        config = small_config(strategy="se", n_rs=3)
        result = run_experiment(config, benchmarks=FAST_BENCH)
        for traj in result.all_trajectories():
            assert traj.scores[0] == result.s_initial
            assert traj.scores[-1] == result.s_all

    def test_rs_instances_differ_midway(self):
        config = small_config(strategy="random")
        result = run_experiment(config, benchmarks=FAST_BENCH)
        a, b = result.rs_trajectories[0], result.rs_trajectories[1]
        assert not np.array_equal(a.scores, b.scores)

    def test_selections_nested_and_exhaustive(self):
        config = small_config()
        task = build_task(config.task_spec)
        train = sample_dataset(task, 210, subseed(42, "train"))
        test = sample_dataset(task, 100, subseed(42, "test"))
        initial, pool = split_initial(train, 10, seed=5)
        traj = run_trajectory(
            config, train, test, initial, pool,
            strategy="se", fit_seed=7, selection_seed=8, record_selections=True,
        )
        seen = set(initial.tolist())
        for step in traj.selections:
            assert not seen.intersection(step)  # labelled sets grow monotonically
            seen.update(step)
        assert seen == set(range(210))

    def test_scores_are_valid_accuracies(self):
        config = small_config()
        result = run_experiment(config, benchmarks=FAST_BENCH)
        for traj in result.all_trajectories():
            assert np.all(traj.scores >= 0.0) and np.all(traj.scores <= 1.0)
            # accuracies are multiples of 1/n_test, which makes ties exact
            np.testing.assert_allclose(traj.scores * config.n_test,
                                       np.round(traj.scores * config.n_test))


class TestRunExperiment:
    def test_number_of_rs_instances(self):
        result = run_experiment(small_config(n_rs=4), benchmarks=FAST_BENCH)
        assert len(result.rs_trajectories) == 4
        assert [t.rs_instance for t in result.rs_trajectories] == [0, 1, 2, 3]

    def test_bit_identical_rerun(self):
        config = small_config(strategy="se")
        r1 = run_experiment(config, benchmarks=FAST_BENCH)
        r2 = run_experiment(config, benchmarks=FAST_BENCH)
        assert np.array_equal(r1.al_trajectory.scores, r2.al_trajectory.scores)
        for a, b in zip(r1.rs_trajectories, r2.rs_trajectories):
            assert np.array_equal(a.scores, b.scores)
        assert r1.s_all == r2.s_all

    def test_rs_instance_reproducible_in_isolation(self):
        # instance seeds derive from (master, role, index): order independent
        config = small_config(strategy="random")
        result = run_experiment(config, benchmarks=FAST_BENCH)
        task = build_task(config.task_spec)
        train = sample_dataset(task, 210, subseed(42, "train"))
        test = sample_dataset(task, 200, subseed(42, "test"))
        initial, pool = split_initial(train, 10, subseed(42, "split"))
        alone = run_trajectory(
            config, train, test, initial, pool,
            strategy="random", fit_seed=subseed(42, "fit"),
            selection_seed=subseed(42, "rs-selection", 2), rs_instance=2,
        )
        assert np.array_equal(alone.scores, result.rs_trajectories[2].scores)

    def test_space_for_al_consistent(self):
        result = run_experiment(small_config(), benchmarks=FAST_BENCH)
        assert result.space_for_al == space_for_al(result.s_all, result.s_initial)

    def test_benchmarks_passed_through(self):
        result = run_experiment(small_config(), benchmarks=FAST_BENCH)
        assert result.ber_estimate == 0.2
        assert result.opt_error_rate == 0.25

    def test_qbc_strategy_runs(self):
        from alsim.strategies import CommitteeSpec

        committee = CommitteeSpec(members=(cl.logreg(), cl.knn(5)), disagreement="avg_kl")
        config = small_config(strategy="qbc_kl", committee=committee,
                              pool_size=100, n_steps=50, n_test=100)
        result = run_experiment(config, benchmarks=FAST_BENCH)
        assert result.al_trajectory.scores.shape == (51,)
        assert result.al_trajectory.scores[-1] == result.s_all


class TestSpaceForAl:
    def test_examples(self):
        assert space_for_al(0.90, 0.72) == pytest.approx(0.20)
        assert space_for_al(0.90, 0.90) == 0.0
        assert space_for_al(0.80, 0.90) == pytest.approx(-0.125)

    def test_zero_ceiling_rejected(self):
        with pytest.raises(ValueError):
            space_for_al(0.0, 0.5)


class TestFitFailurePropagation:
    def test_trajectory_abort_is_flagged(self):
        config = small_config(classifier=cl.qda())
        task = build_task(config.task_spec)
        train = sample_dataset(task, 210, seed=0)
        test = sample_dataset(task, 100, seed=1)
        # force a one-class initial set by lying about the split
        only_zero = np.flatnonzero(train.labels == 0)[:10]
        rest = np.setdiff1d(np.arange(210), only_zero)
        with pytest.raises(RunnerError, match="initial fit failed"):
            run_trajectory(config, train, test, only_zero, rest,
                           strategy="se", fit_seed=2, selection_seed=3)
