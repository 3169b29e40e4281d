"""
Tests for domain value objects and session entities
"""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.domain.entities.session import ContextFeatures, GroundTruth, HistoryWindow, derive_pi_order
from src.domain.exceptions import (
    EmptySessionError, IntelValidationError, MissingBasicListError, ShapeMismatchError
)
from src.domain.value_objects.basic_lists import BasicListSet, ScoredItem
from src.domain.value_objects.pairs import BprPairSet
from src.domain.value_objects.behavior import BehaviorScheme
from src.domain.value_objects.intent import IntentDistribution, flat_intent_index
from src.domain.value_objects.scores import EnsembleScores, ScoreMatrix, WeightMatrix, ensemble_scores


class TestBehaviorScheme:

    def test_tmall_levels(self):
        scheme = BehaviorScheme.tmall()
        assert scheme.names == ["examine", "click", "favorite", "buy"]
        assert scheme.num_behaviors == 3
        assert scheme.from_name("Buy").level == 3

    def test_examine_must_be_level_zero(self):
        with pytest.raises(IntelValidationError):
            BehaviorScheme(["click", "buy"])

    def test_behavior_index_of_examine_is_rejected(self):
        with pytest.raises(IntelValidationError):
            BehaviorScheme.two_level().behavior_index(0)

    def test_unknown_name(self):
        with pytest.raises(IntelValidationError):
            BehaviorScheme.two_level().from_name("favorite")


class TestDerivePiOrder:

    def test_sort_by_level(self):
        assert derive_pi_order([1, 3, 0], ["a", "b", "c"]).tolist() == [1, 0, 2]

    def test_tie_by_ascending_id(self):
        assert derive_pi_order([2, 2], ["b", "a"]).tolist() == [1, 0]

    def test_all_tie_identity(self):
        assert derive_pi_order([0, 0, 0], ["a", "b", "c"]).tolist() == [0, 1, 2]

    @given(st.lists(st.integers(min_value=0, max_value=3), min_size=1, max_size=12))
    def test_bijection(self, levels):
        ids = [f"i{n:02d}" for n in range(len(levels))]
        order = derive_pi_order(levels, ids)
        assert sorted(order.tolist()) == list(range(len(levels)))

    @given(st.lists(st.integers(min_value=0, max_value=3), min_size=1, max_size=10), st.randoms())
    def test_permutation_invariance(self, levels, random):
        ids = [f"i{n:02d}" for n in range(len(levels))]
        pairs = list(zip(levels, ids))
        shuffled = pairs[:]
        random.shuffle(shuffled)
        order = derive_pi_order([p[0] for p in pairs], [p[1] for p in pairs])
        shuffled_order = derive_pi_order([p[0] for p in shuffled], [p[1] for p in shuffled])
        assert [pairs[i] for i in order] == [shuffled[i] for i in shuffled_order]


class TestGroundTruth:

    def test_rejects_non_permutation(self):
        with pytest.raises(IntelValidationError):
            GroundTruth(np.array([1, 0]), np.array([0, 0]))

    def test_rejects_increasing_levels_along_order(self):
        with pytest.raises(IntelValidationError):
            GroundTruth(np.array([1, 0]), np.array([1, 0]))

    def test_empty(self):
        with pytest.raises(EmptySessionError):
            GroundTruth(np.array([], dtype=int), np.array([], dtype=int))


class TestScoreAndWeightMatrices:

    def test_score_matrix_mask_shape(self):
        with pytest.raises(ShapeMismatchError):
            ScoreMatrix(np.zeros((2, 2)), np.ones((2, 1), dtype=bool), ("a", "b"))

    def test_score_matrix_empty(self):
        with pytest.raises(EmptySessionError):
            ScoreMatrix(np.zeros((0, 2)), np.zeros((0, 2), dtype=bool), ("a", "b"))

    def test_score_matrix_is_read_only(self):
        scores = ScoreMatrix(np.zeros((2, 2)), np.ones((2, 2), dtype=bool), ("a", "b"))
        with pytest.raises(ValueError):
            scores.values[0, 0] = 1.0

    def test_spread(self):
        weights = WeightMatrix(np.array([[0.2, 0.8], [0.5, 0.5]]))
        assert weights.spread == pytest.approx(0.3)
        assert weights.on_simplex()

    def test_require_simplex(self):
        with pytest.raises(IntelValidationError):
            WeightMatrix(np.array([[0.7, 0.7]])).require_simplex()

    def test_one_hot_rows_select_columns(self):
        scores = ScoreMatrix(np.array([[1.0, 3.0], [2.0, 5.0]]), np.ones((2, 2), dtype=bool), ("a", "b"))
        weights = WeightMatrix(np.array([[1.0, 0.0], [0.0, 1.0]]))
        assert ensemble_scores(weights, scores).values.tolist() == [1.0, 5.0]

    def test_midpoint(self):
        scores = ScoreMatrix(np.array([[1.0, 3.0]]), np.ones((1, 2), dtype=bool), ("a", "b"))
        assert ensemble_scores(WeightMatrix(np.array([[0.5, 0.5]])), scores).values[0] == pytest.approx(2.0)

    @settings(max_examples=50)
    @given(st.integers(min_value=1, max_value=8), st.integers(min_value=1, max_value=5), st.integers(0, 2**16))
    def test_ensemble_within_row_bounds(self, n, k, seed):
        rng = np.random.default_rng(seed)
        values = rng.normal(size=(n, k))
        scores = ScoreMatrix(values, np.ones((n, k), dtype=bool), tuple(str(j) for j in range(k)))
        result = ensemble_scores(WeightMatrix(rng.dirichlet(np.ones(k), size=n)), scores).values
        assert np.all(result >= values.min(axis=1) - 1e-12)
        assert np.all(result <= values.max(axis=1) + 1e-12)

    def test_ensemble_scores_must_be_vector(self):
        with pytest.raises(ShapeMismatchError):
            EnsembleScores(np.zeros((2, 2)))


class TestIntentDistribution:

    def test_flat_index_is_behavior_major(self):
        assert flat_intent_index(1, 2, 4) == 6

    def test_must_sum_to_one(self):
        with pytest.raises(IntelValidationError):
            IntentDistribution(np.array([0.5, 0.6]))

    def test_negative_probabilities(self):
        with pytest.raises(IntelValidationError):
            IntentDistribution(np.array([1.5, -0.5]))

    def test_from_counts(self):
        assert IntentDistribution.from_counts([1, 1, 2]).to_list() == [0.25, 0.25, 0.5]

    def test_zero_counts(self):
        with pytest.raises(IntelValidationError):
            IntentDistribution.from_counts([0, 0])


class TestValueEquality:

    def test_array_fields_compare_by_value(self):
        first = ScoreMatrix(np.array([[0.1, 0.2]]), np.ones((1, 2), bool), ("a", "b"))
        second = ScoreMatrix(np.array([[0.1, 0.2]]), np.ones((1, 2), bool), ("a", "b"))
        assert first == second
        assert hash(first) == hash(second)
        assert first != ScoreMatrix(np.array([[0.1, 0.3]]), np.ones((1, 2), bool), ("a", "b"))

    def test_shape_and_type_matter(self):
        assert WeightMatrix(np.array([[1.0]])) != WeightMatrix(np.array([[1.0], [1.0]]))
        assert EnsembleScores(np.array([1.0])) != IntentDistribution(np.array([1.0]))

    def test_usable_as_set_members(self):
        intents = {IntentDistribution.uniform(4), IntentDistribution.uniform(4), IntentDistribution.one_hot(4, 0)}
        assert len(intents) == 2
        assert BprPairSet(((0, 1, 1),)) == BprPairSet(((0, 1, 1),))

    def test_to_dict(self):
        assert IntentDistribution.one_hot(2, 1).to_dict() == {"probs": [0.0, 1.0]}


class TestContextFeatures:

    def test_vector_layout(self):
        vector = ContextFeatures(hour_of_day=5, day_of_week=2, extra=(0.5,)).to_vector(extra_dim=1)
        assert vector.shape == (32,)
        assert vector[5] == 1.0 and vector[24 + 2] == 1.0 and vector[-1] == 0.5
        assert vector.sum() == pytest.approx(2.5)

    def test_hour_out_of_range(self):
        with pytest.raises(IntelValidationError):
            ContextFeatures(hour_of_day=24, day_of_week=0)


class TestHistoryWindow:

    def test_truncates_to_most_recent(self):
        intents = tuple(IntentDistribution.one_hot(3, i % 3) for i in range(5))
        contexts = tuple(ContextFeatures(i, 0) for i in range(5))
        window = HistoryWindow(intents, contexts, past_items=((0, 1),) * 4, max_sessions=2, max_items=3)
        assert window.num_sessions == 2
        assert window.past_contexts[-1].hour_of_day == 4
        assert len(window.past_items) == 3


class TestBasicListSet:

    def test_missing_list(self):
        lists = BasicListSet(model_ids=("m0",))
        with pytest.raises(MissingBasicListError):
            lists.get("s1", "m0")

    def test_rejects_non_finite_scores(self):
        lists = BasicListSet(model_ids=("m0",))
        with pytest.raises(IntelValidationError):
            lists.add("s1", "m0", [ScoredItem("a", float("nan"))])

    def test_rejects_duplicates(self):
        lists = BasicListSet(model_ids=("m0",))
        with pytest.raises(IntelValidationError):
            lists.add("s1", "m0", [ScoredItem("a", 1.0), ScoredItem("a", 0.5)])
