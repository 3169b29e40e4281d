"""
Tests for the ambiguity terms, the intent KL loss and the joint loss
"""
import math

import numpy as np
import pytest
import torch
from hypothesis import given, settings
from hypothesis import strategies as st

from src.domain.exceptions import IntelValidationError, NonFiniteLossError, ShapeMismatchError
from src.domain.services.ambiguity import (
    bpr_ambiguity, ensemble_learning_loss, intent_kl, joint_loss, mse_ambiguity, pl_ambiguity
)


def t(values):
    return torch.tensor(values, dtype=torch.float64)


def _random(seed, n=5, k=3):
    rng = np.random.default_rng(seed)
    basic = t(rng.uniform(0, 1, size=(n, k)))
    weights = t(rng.dirichlet(np.ones(k), size=n))
    return basic, weights, (weights * basic).sum(-1), torch.as_tensor(rng.permutation(n))


class TestMseAmbiguity:

    def test_identical_lists(self):
        basic = t([[0.3, 0.3], [0.8, 0.8]])
        weights = t([[0.4, 0.6], [0.9, 0.1]])
        assert mse_ambiguity(basic, (weights * basic).sum(-1), weights).weighted_total.item() == 0.0

    def test_direct_evaluation(self):
        basic, weights = t([[0.0, 1.0]]), t([[0.5, 0.5]])
        report = mse_ambiguity(basic, t([0.5]), weights)
        assert report.per_item_per_model[0].tolist() == [0.25, 0.25]
        assert report.weighted_total.item() == pytest.approx(0.25)

    def test_one_hot_row_contributes_nothing(self):
        basic, weights = t([[0.2, 0.9]]), t([[1.0, 0.0]])
        report = mse_ambiguity(basic, t([0.2]), weights)
        assert report.per_item_per_model[0, 0].item() == 0.0
        assert report.weighted_total.item() == 0.0

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatchError):
            mse_ambiguity(t([[0.1, 0.2]]), t([0.1]), t([[1.0]]))


class TestBprAmbiguity:

    def test_zero_spread(self):
        basic = t([[0.5, 0.5], [0.1, 0.1]])
        weights = t([[0.5, 0.5], [0.5, 0.5]])
        report = bpr_ambiguity(basic, (weights * basic).sum(-1), weights, torch.tensor([0]), torch.tensor([1]))
        assert report.weighted_total.item() == 0.0

    def test_direct_evaluation(self):
        # z_ens = 0, z^k - z_ens = 2 for the single model with w = 1
        report = bpr_ambiguity(t([[2.0], [0.0]]), t([0.0, 0.0]), t([[1.0], [1.0]]),
                               torch.tensor([0]), torch.tensor([1]))
        assert report.weighted_total.item() == pytest.approx(0.5)

    def test_model_relabeling(self):
        basic, weights, ensemble, _ = _random(3, n=4, k=2)
        pos, neg = torch.tensor([0, 1]), torch.tensor([2, 3])
        swapped = bpr_ambiguity(basic.flip(-1), ensemble, weights.flip(-1), pos, neg).weighted_total
        assert swapped.item() == pytest.approx(bpr_ambiguity(basic, ensemble, weights, pos, neg).weighted_total.item())


class TestPlAmbiguity:

    def test_identical_models(self):
        basic = t([[0.9, 0.9], [0.4, 0.4], [0.1, 0.1]])
        weights = t([[0.3, 0.7]] * 3)
        report = pl_ambiguity(basic, (weights * basic).sum(-1), weights, torch.tensor([0, 1, 2]))
        assert report.weighted_total.item() == pytest.approx(0.0, abs=1e-15)

    def test_direct_evaluation(self):
        # z_12^ens = 0 and z_12^k - z_12^ens = 1 with w = 1
        report = pl_ambiguity(t([[1.0], [0.0]]), t([0.0, 0.0]), t([[1.0], [1.0]]), torch.tensor([0, 1]))
        assert report.per_item_per_model[0, 0].item() == pytest.approx(0.25)

    @given(st.integers(0, 2**16))
    def test_last_position_is_zero(self, seed):
        basic, weights, ensemble, order = _random(seed)
        report = pl_ambiguity(basic, ensemble, weights, order)
        assert torch.all(report.per_item_per_model[-1] == 0)

    def test_single_item(self):
        report = pl_ambiguity(t([[0.5, 0.1]]), t([0.3]), t([[0.5, 0.5]]), torch.tensor([0]))
        assert report.weighted_total.item() == 0.0


class TestSemiPositivity:

    @settings(max_examples=100)
    @given(st.integers(0, 2**16), st.booleans())
    def test_all_terms_non_negative(self, seed, printed_form):
        basic, weights, ensemble, order = _random(seed)
        pos, neg = order[:2], order[2:4]
        assert torch.all(mse_ambiguity(basic, ensemble, weights).per_item_per_model >= 0)
        assert torch.all(
            bpr_ambiguity(basic, ensemble, weights, pos, neg, printed_form=printed_form).per_item_per_model >= 0
        )
        assert torch.all(
            pl_ambiguity(basic, ensemble, weights, order, printed_form=printed_form).per_item_per_model >= 0
        )


class TestIntentKl:

    def test_identity(self):
        p = t([0.2, 0.3, 0.5])
        assert intent_kl(p, p).item() == pytest.approx(0.0, abs=1e-6)

    def test_one_hot_against_uniform(self):
        d = 12
        true = torch.zeros(d, dtype=torch.float64)
        true[4] = 1.0
        assert intent_kl(true, torch.full((d,), 1.0 / d, dtype=torch.float64)).item() == pytest.approx(
            math.log(d), abs=1e-6
        )

    def test_gibbs_inequality(self):
        rng = np.random.default_rng(0)
        true = t(rng.dirichlet(np.ones(6), size=1000))
        pred = t(rng.dirichlet(np.ones(6), size=1000))
        assert torch.all(intent_kl(true, pred) >= -1e-7)

    def test_dimension_mismatch(self):
        with pytest.raises(ShapeMismatchError):
            intent_kl(t([1.0, 0.0]), t([0.2, 0.3, 0.5]))


class TestJointLoss:

    def test_degenerate_weights(self):
        assert joint_loss(1.3, 0.5, 2.0, 0.0, 0.0) == 1.3

    def test_arithmetic(self):
        assert joint_loss(1.0, 0.5, 2.0, 0.1, 0.5) == pytest.approx(1.95)

    def test_increasing_alpha_decreases(self):
        assert joint_loss(1.0, 0.5, 0.0, 0.2, 0.0) < joint_loss(1.0, 0.5, 0.0, 0.1, 0.0)

    def test_ensemble_learning_loss(self):
        assert ensemble_learning_loss(1.0, 0.5, 0.1) == pytest.approx(0.95)

    def test_negative_alpha(self):
        with pytest.raises(IntelValidationError):
            joint_loss(1.0, 0.5, 0.0, -0.1, 0.0)

    def test_non_finite(self):
        with pytest.raises(NonFiniteLossError):
            joint_loss(torch.tensor(float("nan")), 0.0, 0.0, 0.1, 0.1)


class TestGradients:

    @pytest.mark.parametrize("seed", range(100))
    def test_gradcheck_wrt_weight_logits(self, seed):
        rng = np.random.default_rng(seed)
        n, k = int(rng.integers(2, 5)), int(rng.integers(2, 4))
        basic = t(rng.uniform(0, 1, size=(n, k)))
        logits = torch.tensor(rng.normal(size=(n, k)), dtype=torch.float64, requires_grad=True)
        order = torch.as_tensor(rng.permutation(n))
        pos, neg = order[:1], order[1:2]

        def weights(x):
            return torch.softmax(x, dim=-1)

        def ensemble(x):
            return (weights(x) * basic).sum(-1)

        for fn in (
            lambda x: mse_ambiguity(basic, ensemble(x), weights(x)).weighted_total,
            lambda x: bpr_ambiguity(basic, ensemble(x), weights(x), pos, neg).weighted_total,
            lambda x: pl_ambiguity(basic, ensemble(x), weights(x), order).weighted_total,
        ):
            assert torch.autograd.gradcheck(fn, (logits,), eps=1e-5, atol=1e-8, rtol=1e-4)

    @pytest.mark.parametrize("seed", range(100))
    def test_gradcheck_intent_kl(self, seed):
        rng = np.random.default_rng(seed)
        true = t(rng.dirichlet(np.ones(6)))
        logits = torch.tensor(rng.normal(size=6), dtype=torch.float64, requires_grad=True)
        assert torch.autograd.gradcheck(
            lambda x: intent_kl(true, torch.softmax(x, -1)), (logits,), eps=1e-5, atol=1e-8, rtol=1e-4
        )
