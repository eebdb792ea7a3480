import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tbal.confidence import AbsMargin
from tbal.core import rng_from
from tbal.model import LinearModel
from tbal.query import (MARGIN_RANDOM, QueryConfig, query_margin_random,
                        query_random)


def line_model():
    return LinearModel(np.array([1.0, 0.0]), np.asarray(0.0), num_classes=2)


def spaced_features(n):
    # confidence |x0| strictly increasing with id
    return np.column_stack([np.arange(1, n + 1, dtype=np.float64), np.zeros(n)])


class TestQueryRandom:
    def test_distinct_sorted_subset(self):
        ids = np.arange(100, 200)
        got, truncated = query_random(ids, 10, rng_from(0, "q"))
        assert not truncated
        assert len(got) == 10 == len(set(got))
        assert np.array_equal(got, np.sort(got))
        assert set(got) <= set(ids)

    def test_truncation(self):
        ids = np.arange(5)
        got, truncated = query_random(ids, 9, rng_from(0, "q"))
        assert truncated and np.array_equal(got, ids)
        got, truncated = query_random(ids, 5, rng_from(0, "q"))
        assert not truncated and np.array_equal(got, ids)

    def test_deterministic(self):
        ids = np.arange(50)
        a, _ = query_random(ids, 7, rng_from(3, "q"))
        b, _ = query_random(ids, 7, rng_from(3, "q"))
        assert np.array_equal(a, b)

    def test_roughly_uniform(self):
        # each of 20 ids should be picked ~ n*k/N = 1000*5/20 = 250 times
        ids = np.arange(20)
        counts = np.zeros(20)
        for t in range(1000):
            got, _ = query_random(ids, 5, rng_from(t, "freq"))
            counts[got] += 1
        assert np.all(counts > 150) and np.all(counts < 350)


class TestMarginRandom:
    def test_batch_comes_from_least_confident_slice(self):
        m = line_model()
        X = spaced_features(40)
        ids = np.arange(40)
        cfg = QueryConfig(batch=5, C=2.0)
        got, truncated = query_margin_random(m, AbsMargin(), ids, X, cfg,
                                             rng_from(0, "q"))
        assert not truncated
        # slice is the 10 smallest |x0| values, i.e. ids 0..9
        assert set(got) <= set(range(10))
        assert len(got) == 5

    def test_truncation_returns_everything(self):
        m = line_model()
        X = spaced_features(4)
        got, truncated = query_margin_random(m, AbsMargin(), np.arange(4), X,
                                             QueryConfig(batch=6), rng_from(0, "q"))
        assert truncated and np.array_equal(got, np.arange(4))

    def test_slice_capped_at_pool_size(self):
        m = line_model()
        X = spaced_features(6)
        cfg = QueryConfig(batch=5, C=10.0)
        got, _ = query_margin_random(m, AbsMargin(), np.arange(6), X, cfg,
                                     rng_from(1, "q"))
        assert len(got) == 5

    def test_uniform_within_slice(self):
        # batch 5 from a slice of 10: each slice member expected 500/1000
        m = line_model()
        X = spaced_features(30)
        ids = np.arange(30)
        cfg = QueryConfig(batch=5, C=2.0)
        counts = np.zeros(30)
        for t in range(1000):
            got, _ = query_margin_random(m, AbsMargin(), ids, X, cfg,
                                         rng_from(t, "freq"))
            counts[got] += 1
        assert np.all(counts[:10] > 350) and np.all(counts[:10] < 650)
        assert np.all(counts[10:] == 0)

    def test_ties_break_by_id(self):
        m = line_model()
        X = np.ones((10, 2))  # all scores identical
        cfg = QueryConfig(batch=2, C=2.0)
        a, _ = query_margin_random(m, AbsMargin(), np.arange(10), X, cfg,
                                   rng_from(5, "q"))
        b, _ = query_margin_random(m, AbsMargin(), np.arange(10), X, cfg,
                                   rng_from(5, "q"))
        assert np.array_equal(a, b)
        assert set(a) <= set(range(4))  # tie-broken slice is the lowest ids

    def test_gap_scores(self):
        W = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, -1.0]])
        m = LinearModel(W, np.zeros(3), num_classes=3)
        X = np.array([[3.0, 0.0], [0.55, 0.5], [0.0, 2.0], [0.52, 0.5]])
        cfg = QueryConfig(batch=1, C=2.0, use_gap=True)
        got, _ = query_margin_random(m, AbsMargin(), np.arange(4), X, cfg,
                                     rng_from(0, "q"))
        # smallest top1-top2 logit gaps are rows 1 and 3
        assert got[0] in (1, 3)

    @given(st.integers(1, 8), st.floats(1.1, 4.0), st.integers(0, 10**6))
    @settings(max_examples=60, deadline=None)
    def test_membership_property(self, batch, C, seed):
        m = line_model()
        n = 25
        X = spaced_features(n)
        cfg = QueryConfig(batch=batch, C=C)
        got, _ = query_margin_random(m, AbsMargin(), np.arange(n), X, cfg,
                                     rng_from(seed, "prop"))
        slice_n = min(int(C * batch), n)
        k = min(batch, n)
        assert len(got) == k == len(set(got))
        assert set(got) <= set(range(slice_n))


class TestQueryConfig:
    def test_validation(self):
        with pytest.raises(ValueError, match="C must be > 1"):
            QueryConfig(strategy=MARGIN_RANDOM, C=1.0)
        with pytest.raises(ValueError, match="batch"):
            QueryConfig(batch=0)
        QueryConfig(strategy="random", C=0.5)  # C unused for random
