import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from alsim import classifiers as cl
from alsim.strategies import (
    CommitteeSpec,
    PoolScores,
    default_committee_members,
    entropy,
    qbc_disagreement,
    rank_pool_se,
    select_batch,
)
from alsim.taskgen import Dataset, sample_dataset
from tests.test_classifiers import make_dataset, two_gaussian_task


def hand_entropy(p):
    # independent oracle: direct sum, math.log
    return -sum(q * math.log(q) for q in p if q > 0)


class TestEntropy:
    def test_uniform_binary(self):
        assert entropy(np.array([0.5, 0.5])) == pytest.approx(math.log(2), abs=1e-9)
        assert entropy(np.array([0.5, 0.5])) == pytest.approx(0.6931, abs=1e-4)

    def test_degenerate(self):
        assert entropy(np.array([1.0, 0.0])) == 0.0

    def test_hand_value(self):
        assert entropy(np.array([0.9, 0.1])) == pytest.approx(0.3251, abs=1e-4)
        assert entropy(np.array([0.9, 0.1])) == pytest.approx(hand_entropy([0.9, 0.1]))

    def test_malformed_vector_rejected(self):
        with pytest.raises(ValueError):
            entropy(np.array([0.7, 0.7]))
        with pytest.raises(ValueError):
            entropy(np.array([-0.1, 1.1]))

    @given(st.lists(st.floats(0.01, 10.0), min_size=2, max_size=6))
    @settings(max_examples=200, deadline=None)
    def test_bounds_and_uniform_maximum(self, raw):
        p = np.array(raw) / sum(raw)
        k = len(p)
        h = entropy(p)
        assert -1e-12 <= h <= math.log(k) + 1e-12
        assert h <= entropy(np.full(k, 1.0 / k)) + 1e-12


class TestRankPoolSe:
    def test_boundary_point_dominates(self):
        task = two_gaussian_task(mu=1.0)
        train = sample_dataset(task, 200, seed=0)
        model = cl.fit(cl.logreg(), train, seed=0)
        # place one probe exactly on the fitted decision boundary
        b0, b1, b2 = model.beta
        on_boundary = [-b0 / b1, 0.0]
        pool = make_dataset([on_boundary, [4.0, 0.0], [-4.0, 0.0]], [0, 0, 0])
        scores = rank_pool_se(model, pool)
        assert scores.values[0] == pytest.approx(math.log(2), abs=1e-9)
        assert scores.values[0] > scores.values[1]
        assert scores.values[0] > scores.values[2]

    def test_invariant_to_row_order(self):
        task = two_gaussian_task()
        train = sample_dataset(task, 100, seed=1)
        pool = sample_dataset(task, 50, seed=2)
        model = cl.fit(cl.qda(), train, seed=0)
        base = rank_pool_se(model, pool)
        perm = np.random.default_rng(3).permutation(pool.n)
        shuffled = rank_pool_se(model, pool.subset(perm))
        assert np.allclose(shuffled.values, base.values[perm])


class TestQbc:
    def _committee(self, seed=0, n=120):
        task = two_gaussian_task()
        train = sample_dataset(task, n, seed=seed)
        members = [
            cl.fit(spec, train, seed=10 + i) for i, spec in enumerate(default_committee_members())
        ]
        return members, train

    def test_identical_members_zero_disagreement(self):
        task = two_gaussian_task()
        train = sample_dataset(task, 100, seed=4)
        pool = sample_dataset(task, 30, seed=5)
        model = cl.fit(cl.qda(), train, seed=0)
        committee = [model, model, model]
        kl = qbc_disagreement(committee, pool, "avg_kl")
        ve = qbc_disagreement(committee, pool, "vote_entropy")
        assert np.allclose(kl.values, 0.0, atol=1e-9)
        assert np.allclose(ve.values, 0.0)

    def test_vote_entropy_three_two_split(self):
        class Stub:
            def __init__(self, p1):
                self.p1 = p1
                self.training_dim = 1

            def predict_proba(self, x):
                return np.tile([1 - self.p1, self.p1], (x.shape[0], 1))

        committee = [Stub(0.9), Stub(0.8), Stub(0.7), Stub(0.2), Stub(0.1)]
        pool = make_dataset([[0.0]], [0])
        ve = qbc_disagreement(committee, pool, "vote_entropy")
        assert ve.values[0] == pytest.approx(0.6730, abs=1e-4)
        assert ve.values[0] == pytest.approx(hand_entropy([0.6, 0.4]))

    def test_avg_kl_two_opposed_members(self):
        class Stub:
            def __init__(self, p1):
                self.p1 = p1
                self.training_dim = 1

            def predict_proba(self, x):
                return np.tile([1 - self.p1, self.p1], (x.shape[0], 1))

        committee = [Stub(0.1), Stub(0.9)]
        pool = make_dataset([[0.0]], [0])
        kl = qbc_disagreement(committee, pool, "avg_kl")
        oracle = 0.9 * math.log(0.9 / 0.5) + 0.1 * math.log(0.1 / 0.5)
        assert oracle == pytest.approx(0.3681, abs=1e-4)
        assert kl.values[0] == pytest.approx(oracle, abs=1e-9)

    def test_avg_kl_nonnegative_on_real_committee(self):
        members, _ = self._committee()
        task = two_gaussian_task()
        pool = sample_dataset(task, 40, seed=6)
        kl = qbc_disagreement(members, pool, "avg_kl")
        assert np.all(kl.values >= 0.0)

    def test_committee_spec_validation(self):
        with pytest.raises(ValueError):
            CommitteeSpec(members=(cl.qda(),))
        with pytest.raises(ValueError):
            CommitteeSpec(disagreement="margin")
        assert CommitteeSpec(disagreement="vote_entropy").strategy_id == "qbc_ve"

    def test_default_committee_composition(self):
        kinds = [m.kind for m in default_committee_members()]
        assert kinds == ["logreg", "knn", "knn", "svm", "random_forest"]
        ks = [m.k for m in default_committee_members() if m.kind == "knn"]
        assert ks == [5, 21]


class TestSelectBatch:
    def test_top_two(self):
        scores = PoolScores(np.array([0.9, 0.1, 0.5]), "se")
        assert select_batch(scores, 2).tolist() == [0, 2]

    def test_all_equal_ties_by_index(self):
        scores = PoolScores(np.full(5, 0.25), "se")
        assert select_batch(scores, 2).tolist() == [0, 1]

    def test_random_reproducible_and_ignores_values(self):
        a = select_batch(PoolScores(np.arange(10.0), "random"), 4, seed=11)
        b = select_batch(PoolScores(np.zeros(10), "random"), 4, seed=11)
        assert np.array_equal(a, b)
        assert len(set(a.tolist())) == 4

    def test_batch_larger_than_pool_rejected(self):
        with pytest.raises(ValueError):
            select_batch(PoolScores(np.zeros(3), "se"), 4)

    @given(st.integers(0, 2**31), st.integers(2, 30))
    @settings(max_examples=100, deadline=None)
    def test_selected_scores_dominate_unselected(self, seed, n):
        rng = np.random.default_rng(seed)
        values = rng.normal(size=n)
        batch = int(rng.integers(1, n + 1))
        chosen = select_batch(PoolScores(values, "se"), batch)
        assert len(np.unique(chosen)) == batch
        rest = np.setdiff1d(np.arange(n), chosen)
        if rest.size:
            assert values[chosen].min() >= values[rest].max()

    @given(st.integers(0, 2**31), st.floats(0.1, 50.0))
    @settings(max_examples=100, deadline=None)
    def test_positive_scaling_invariance(self, seed, factor):
        rng = np.random.default_rng(seed)
        values = rng.normal(size=20)
        base = select_batch(PoolScores(values, "se"), 5)
        scaled = select_batch(PoolScores(values * factor, "se"), 5)
        assert np.array_equal(base, scaled)
