"""
Tests for NDCG, intent metrics and run-level aggregation
"""
import itertools
import math

import numpy as np
import pytest

from src.domain.exceptions import MissingSessionRankingError
from src.domain.services.ranking_metrics import (
    aggregate_seeds, evaluate_run, intent_macro_f1, intent_metrics, intent_ndcg, ndcg_at_k,
    per_objective_relevance
)
from src.domain.value_objects.behavior import BehaviorScheme
from src.domain.value_objects.metrics import MetricsReport, MetricSummary
from tests.conftest import make_sample


def _dcg(ranking, relevance, k):
    return sum((2.0 ** relevance[i] - 1.0) / math.log2(p + 2) for p, i in enumerate(ranking[:k]))


class TestNdcg:

    def test_perfect(self):
        assert ndcg_at_k([0, 1, 2], [3, 2, 1], 3) == pytest.approx(1.0)

    def test_reversed(self):
        expected = (1 + 3 / math.log2(3) + 7 / 2) / (7 + 3 / math.log2(3) + 1 / 2)
        assert ndcg_at_k([2, 1, 0], [3, 2, 1], 3) == pytest.approx(expected)
        assert expected == pytest.approx(0.68061, abs=1e-5)

    def test_all_zero(self):
        assert ndcg_at_k([0, 1], [0, 0], 2) == 0.0

    def test_brute_force_oracle(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            n = int(rng.integers(1, 9))
            relevance = rng.integers(0, 4, size=n).astype(float)
            k = int(rng.integers(1, n + 1))
            perms = list(itertools.permutations(range(n)))
            best = max(_dcg(p, relevance, k) for p in perms)
            ranking = list(perms[int(rng.integers(len(perms)))])
            expected = 0.0 if best == 0 else _dcg(ranking, relevance, k) / best
            assert ndcg_at_k(ranking, relevance, k) == pytest.approx(expected)
            ideal = sorted(range(n), key=lambda i: -relevance[i])
            assert ndcg_at_k(ideal, relevance, k) == pytest.approx(1.0 if best > 0 else 0.0)

    def test_monotone_transform_invariance(self):
        scores = np.array([0.2, 1.5, -0.3, 0.9])
        relevance = [1, 2, 0, 3]
        ranking = np.argsort(-scores)
        transformed = np.argsort(-np.exp(3 * scores))
        assert ndcg_at_k(ranking, relevance, 3) == ndcg_at_k(transformed, relevance, 3)


class TestRelevance:

    def test_click_threshold(self):
        scheme = BehaviorScheme(["examine", "click", "favorite", "buy"])
        assert per_objective_relevance(np.array([3, 1, 0]), "click", scheme).tolist() == [1, 1, 0]

    def test_buy(self):
        scheme = BehaviorScheme.tmall()
        assert per_objective_relevance(np.array([3, 1, 0]), "buy", scheme).tolist() == [1, 0, 0]

    def test_all_recovers_levels(self):
        assert per_objective_relevance(np.array([3, 1, 0]), "all", BehaviorScheme.tmall()).tolist() == [3, 1, 0]

    def test_exact_mode(self):
        scheme = BehaviorScheme.tmall()
        assert per_objective_relevance(np.array([3, 1, 0]), "click", scheme, "exact").tolist() == [0, 1, 0]


class TestIntentMetrics:

    def test_perfect_prediction(self):
        p = np.array([0.1, 0.6, 0.3])
        assert intent_ndcg(p, p) == pytest.approx(1.0)
        assert intent_metrics(p, p, "macro_f1") == 1.0

    def test_uniform_prediction_hot_first(self):
        true = np.eye(12)[0]
        assert intent_ndcg(true, np.full(12, 1 / 12)) == pytest.approx(1.0)

    def test_uniform_prediction_hot_last(self):
        # the hot cell sits at rank 12, beyond the cutoff of 10
        true = np.eye(12)[11]
        assert intent_ndcg(true, np.full(12, 1 / 12)) == 0.0
        assert intent_metrics(true, np.full(12, 1 / 12), "ndcg@12") == pytest.approx(1 / math.log2(13))

    def test_macro_f1_partial(self):
        true = np.array([0.5, 0.5, 0.0, 0.0])
        pred = np.array([0.5, 0.0, 0.5, 0.0])
        # cells 0, 1, 2 have support; only cell 0 matches
        assert intent_macro_f1(true, pred) == pytest.approx(1 / 3)


class TestEvaluateRun:

    def _samples(self):
        return [
            make_sample("a", [[0.9], [0.1], [0.5]], [2, 0, 1]),
            make_sample("b", [[0.2], [0.8]], [0, 1]),
        ]

    def test_single_session(self, scheme):
        sample = self._samples()[0]
        report = evaluate_run({"a": [0, 2, 1]}, [sample], scheme, ks=[3])
        assert report.mean("All-NDCG@3") == pytest.approx(1.0)
        assert report.mean("Click-NDCG@3") == pytest.approx(1.0)
        assert report["All-NDCG@3"].n_sessions == 1

    def test_duplicated_sessions_same_mean(self, scheme):
        samples = self._samples()
        rankings = {"a": [1, 0, 2], "b": [0, 1]}
        once = evaluate_run(rankings, samples, scheme, ks=[3])
        twice = evaluate_run(rankings, samples + samples, scheme, ks=[3], num_workers=2)
        assert once.to_dict().keys() == twice.to_dict().keys()
        for metric in once.metric_names:
            assert once.mean(metric) == pytest.approx(twice.mean(metric))

    def test_missing_ranking(self, scheme):
        with pytest.raises(MissingSessionRankingError):
            evaluate_run({"a": [0, 1, 2]}, self._samples(), scheme)

    def test_intent_metrics_included(self, scheme):
        sample = self._samples()[0]
        report = evaluate_run({"a": [0, 2, 1]}, [sample], scheme, ks=[3], predicted_intents={"a": sample.intent})
        assert report.mean("Intent-NDCG@10") == pytest.approx(1.0)
        assert report.mean("Intent-MacroF1") == 1.0


class TestAggregateSeeds:

    def test_constant_seeds_have_zero_std(self):
        reports = [MetricsReport({"All-NDCG@3": MetricSummary(0.4, n_sessions=3)}) for _ in range(5)]
        aggregated = aggregate_seeds(reports, name="run")
        assert aggregated["All-NDCG@3"].std == 0.0
        assert aggregated["All-NDCG@3"].per_seed == [0.4] * 5
        assert aggregated.name == "run"

    def test_mean_and_std(self):
        reports = [MetricsReport({"m": MetricSummary(v)}) for v in (0.2, 0.4)]
        aggregated = aggregate_seeds(reports)
        assert aggregated.mean("m") == pytest.approx(0.3)
        assert aggregated["m"].std == pytest.approx(0.1)
