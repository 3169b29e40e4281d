"""
Tests for batching, the ensemble network and the intent predictor
"""
import numpy as np
import pytest
import torch
import torch.nn as nn
from torch.func import functional_call

from src.config.run_config import SequenceEncoderType, WeightHeadType
from src.domain.entities.session import ContextFeatures, HistoryWindow, context_dim
from src.domain.exceptions import (
    EmptySessionError, NoInputBranchesError, OutOfVocabularyError, ShapeMismatchError
)
from src.domain.value_objects.intent import IntentDistribution
from src.infrastructure.models.batching import PAD_LEVEL, collate_pairs, collate_sessions
from src.infrastructure.models.ensemble_network import AblationFlags, EnsembleNetwork
from src.infrastructure.models.intent_predictor import IntentPredictor
from tests.conftest import make_sample

INTENT_DIM = 4  # two positive behaviors x two categories


def _parameter_gradcheck(module: nn.Module, inputs, reduce) -> bool:
    """Finite-difference check of reduce(module(*inputs)) with respect to every parameter"""
    names = [name for name, p in module.named_parameters() if p.requires_grad]
    values = tuple(p.detach().clone().requires_grad_(True) for p in module.parameters() if p.requires_grad)

    def evaluate(*params):
        return reduce(functional_call(module, dict(zip(names, params)), inputs))

    return torch.autograd.gradcheck(evaluate, values, eps=1e-6, atol=1e-5, rtol=1e-4)


def _network(**kwargs) -> EnsembleNetwork:
    torch.manual_seed(0)
    options = dict(num_models=2, num_categories=2, intent_dim=INTENT_DIM, embed_dim=8,
                   intent_embed_dim=4, num_layers=1, num_heads=2)
    options.update(kwargs)
    return EnsembleNetwork(**options).double().eval()


def _inputs(n=5, k=2, seed=0):
    rng = np.random.default_rng(seed)
    scores = torch.tensor(rng.uniform(size=(1, n, k)), dtype=torch.float64)
    mask = torch.ones(1, n, k, dtype=torch.bool)
    categories = torch.as_tensor(rng.integers(0, 2, size=(1, n)))
    valid = torch.ones(1, n, dtype=torch.bool)
    intent = torch.tensor(rng.dirichlet(np.ones(INTENT_DIM)), dtype=torch.float64).unsqueeze(0)
    return scores, mask, categories, valid, intent


class TestBatching:

    def test_padding(self):
        samples = [
            make_sample("a", [[0.1, 0.2], [0.3, 0.4], [0.5, 0.6]], [0, 2, 1]),
            make_sample("b", [[0.7, 0.8]], [1]),
        ]
        batch = collate_sessions(samples, None, num_categories=2, intent_dim=INTENT_DIM)
        assert batch.scores.shape == (2, 3, 2)
        assert batch.item_valid.tolist() == [[True, True, True], [True, False, False]]
        assert batch.levels[1].tolist() == [1, PAD_LEVEL, PAD_LEVEL]
        assert batch.pi_order[0].tolist() == [1, 2, 0]
        assert batch.pi_order[1].tolist() == [0, 1, 2]
        assert batch.history.session_lengths.tolist() == [0, 0]
        assert torch.allclose(batch.history.average_intent, torch.full((2, INTENT_DIM), 0.25))

    def test_history_cells(self):
        sample = make_sample("a", [[0.1], [0.2]], [1, 0])
        window = HistoryWindow(
            past_intents=(IntentDistribution.one_hot(INTENT_DIM, 3),),
            past_contexts=(ContextFeatures(hour_of_day=5, day_of_week=2),),
            past_items=((1, 0), (0, 1)),
        )
        batch = collate_sessions([sample], {"a": window}, num_categories=2, intent_dim=INTENT_DIM)
        assert batch.history.item_cells.tolist() == [[2, 1]]
        assert batch.history.session_lengths.tolist() == [1]
        assert batch.history.session_contexts.shape[-1] == context_dim()

    def test_pairs(self):
        samples = [make_sample("a", [[0.1], [0.2], [0.3]], [2, 1, 0]), make_sample("b", [[0.1], [0.2]], [1, 0])]
        pairs = collate_pairs(samples, np.random.default_rng(0))
        assert pairs.counts.tolist() == [2, 1]
        assert pairs.positive[1, 0].item() == 0 and pairs.negative[1, 0].item() == 1


class TestEnsembleNetwork:

    def test_rows_on_simplex(self):
        weights, ensemble = _network()(*_inputs())
        assert torch.all(weights >= 0)
        assert torch.allclose(weights.sum(-1), torch.ones(1, 5, dtype=torch.float64))
        assert ensemble.shape == (1, 5)

    def test_zero_parameters_give_uniform_weights(self):
        network = _network(num_models=3)
        for parameter in network.parameters():
            nn.init.zeros_(parameter)
        scores, mask, categories, valid, intent = _inputs(k=3)
        weights, ensemble = network(scores, mask, categories, valid, intent)
        assert torch.allclose(weights, torch.full_like(weights, 1 / 3))
        assert torch.allclose(ensemble, scores.mean(-1))

    def test_permutation_equivariance(self):
        network = _network()
        scores, mask, categories, valid, intent = _inputs(n=6)
        perm = torch.tensor([3, 0, 5, 1, 4, 2])
        weights, _ = network(scores, mask, categories, valid, intent)
        permuted, _ = network(scores[:, perm], mask[:, perm], categories[:, perm], valid[:, perm], intent)
        assert torch.allclose(permuted, weights[:, perm], atol=1e-10)

    def test_list_level_rows_identical(self):
        weights, _ = _network(list_level=True)(*_inputs())
        assert torch.allclose(weights, weights[:, :1].expand_as(weights))

    def test_unconstrained_head(self):
        weights, ensemble = _network(weight_head=WeightHeadType.UNCONSTRAINED)(*_inputs())
        scores = _inputs()[0]
        assert torch.allclose(ensemble, (weights * scores).sum(-1))

    @pytest.mark.parametrize("flags", [
        AblationFlags(no_intent=True), AblationFlags(no_category=True), AblationFlags(no_score=True),
        AblationFlags(no_cross=True), AblationFlags(no_self=True),
    ])
    def test_ablations_run(self, flags):
        weights, _ = _network(ablation=flags)(*_inputs())
        assert torch.allclose(weights.sum(-1), torch.ones(1, 5, dtype=torch.float64))

    def test_no_intent_ignores_intent(self):
        network = _network(ablation=AblationFlags(no_intent=True))
        scores, mask, categories, valid, intent = _inputs()
        first, _ = network(scores, mask, categories, valid, intent)
        second, _ = network(scores, mask, categories, valid, torch.flip(intent, [-1]))
        assert torch.allclose(first, second)

    def test_ablation_suffix(self):
        assert AblationFlags(no_intent=True, no_self=True).suffix == "-Int-Self"

    def test_both_branches_dropped(self):
        with pytest.raises(NoInputBranchesError):
            AblationFlags(no_category=True, no_score=True)

    def test_out_of_vocabulary_category(self):
        scores, mask, categories, valid, intent = _inputs()
        with pytest.raises(OutOfVocabularyError):
            _network()(scores, mask, categories + 5, valid, intent)

    def test_wrong_intent_size(self):
        scores, mask, categories, valid, _ = _inputs()
        with pytest.raises(ShapeMismatchError):
            _network()(scores, mask, categories, valid, torch.zeros(1, 3, dtype=torch.float64))

    def test_empty_session(self):
        scores, mask, categories, valid, intent = _inputs()
        with pytest.raises(EmptySessionError):
            _network()(scores, mask, categories, torch.zeros_like(valid), intent)

    def test_gradcheck(self):
        network = _network()
        scores, mask, categories, valid, intent = _inputs(n=3)
        intent.requires_grad_(True)

        def total(x):
            return network(scores, mask, categories, valid, x)[1].sum()

        assert torch.autograd.gradcheck(total, (intent,), eps=1e-6, atol=1e-6)

    @pytest.mark.parametrize("head", [WeightHeadType.SIMPLEX, WeightHeadType.UNCONSTRAINED])
    def test_parameter_gradcheck(self, head):
        network = _network(weight_head=head).train()
        scores, mask, categories, valid, intent = _inputs(n=3)
        assert _parameter_gradcheck(
            network, (scores, mask, categories, valid, intent), lambda out: out[1].sum()
        )


class TestIntentPredictor:

    @pytest.mark.parametrize("encoder", [SequenceEncoderType.GRU, SequenceEncoderType.TRANSFORMER])
    def test_outputs_distributions(self, encoder):
        torch.manual_seed(0)
        predictor = IntentPredictor(INTENT_DIM, context_dim(), embed_dim=8, hidden_dim=8, encoder=encoder).double()
        samples = [make_sample("a", [[0.1], [0.2]], [1, 0]), make_sample("b", [[0.3]], [2])]
        window = HistoryWindow(
            past_intents=(IntentDistribution.uniform(INTENT_DIM), IntentDistribution.one_hot(INTENT_DIM, 1)),
            past_contexts=(ContextFeatures(1, 1), ContextFeatures(2, 2)),
            past_items=((0, 1),),
        )
        batch = collate_sessions(samples, {"a": window}, 2, INTENT_DIM, dtype=torch.float64)
        probs = predictor(batch.context, batch.history)
        assert probs.shape == (2, INTENT_DIM)
        assert torch.all(probs > 0)
        assert torch.allclose(probs.sum(-1), torch.ones(2, dtype=torch.float64))

    def test_cold_start_history_encodes_to_zero(self):
        predictor = IntentPredictor(INTENT_DIM, context_dim(), embed_dim=8, hidden_dim=8).double()
        batch = collate_sessions([make_sample("a", [[0.1]], [1])], None, 2, INTENT_DIM, dtype=torch.float64)
        h_i = predictor.encode_item_history(batch.history.item_cells, batch.history.item_lengths)
        assert torch.all(h_i == 0)

    def test_context_size_checked(self):
        predictor = IntentPredictor(INTENT_DIM, context_dim(), embed_dim=8, hidden_dim=8)
        with pytest.raises(ShapeMismatchError):
            predictor.encode_context(torch.zeros(1, 5))

    @pytest.mark.parametrize("encoder", [SequenceEncoderType.GRU, SequenceEncoderType.TRANSFORMER])
    def test_parameter_gradcheck(self, encoder):
        torch.manual_seed(0)
        predictor = IntentPredictor(
            INTENT_DIM, context_dim(), embed_dim=4, hidden_dim=4, encoder=encoder
        ).double()
        window = HistoryWindow(
            past_intents=(IntentDistribution.uniform(INTENT_DIM), IntentDistribution.one_hot(INTENT_DIM, 2)),
            past_contexts=(ContextFeatures(3, 1), ContextFeatures(20, 5)),
            past_items=((0, 1), (1, 0)),
        )
        samples = [make_sample("a", [[0.1], [0.2]], [1, 0]), make_sample("b", [[0.3]], [2])]
        batch = collate_sessions(samples, {"a": window, "b": window}, 2, INTENT_DIM, dtype=torch.float64)
        # probabilities sum to one, so weight the cells to get a non-constant target
        cell_weights = torch.linspace(0.5, 2.0, INTENT_DIM, dtype=torch.float64)
        assert _parameter_gradcheck(
            predictor, (batch.context, batch.history), lambda probs: (probs * cell_weights).sum()
        )
