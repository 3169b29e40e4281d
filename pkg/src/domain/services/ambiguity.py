"""
Ambiguity Objective
Ambiguity terms of the three loss families, the KL intent loss and the
joint training loss.

Training uses the interpolation point at the ensemble score (theta -> 0),
which makes every ambiguity term a closed-form function of the current
scores. Shapes follow ranking_losses: basic scores (..., N, K), ensemble
scores (..., N), weights (..., N, K).
"""
import logging
import math
from dataclasses import dataclass
from numbers import Real
from typing import Optional, Union

import torch

from ..exceptions import IntelValidationError, NoPairsError, NonFiniteLossError, ShapeMismatchError
from .ranking_losses import order_by_priority, tail_mask

logger = logging.getLogger(__name__)

KL_EPSILON = 1e-8

Scalar = Union[torch.Tensor, float]


@dataclass
class AmbiguityReport:
    """
    Per-entry ambiguity (items x models, pairs x models or positions x models)
    and the weighted total A per session.
    """
    per_item_per_model: torch.Tensor
    weighted_total: torch.Tensor


def _check_shapes(basic: torch.Tensor, ensemble: torch.Tensor, weights: torch.Tensor) -> None:
    if weights.shape != basic.shape:
        raise ShapeMismatchError(f"Weight shape {tuple(weights.shape)} != score shape {tuple(basic.shape)}")
    if ensemble.shape != basic.shape[:-1]:
        raise ShapeMismatchError(
            f"Ensemble shape {tuple(ensemble.shape)} does not match score shape {tuple(basic.shape)}"
        )


def mse_ambiguity(
    basic: torch.Tensor,
    ensemble: torch.Tensor,
    weights: torch.Tensor,
    valid: Optional[torch.Tensor] = None
) -> AmbiguityReport:
    """A_n^k = (S_n^k - S_n^ens)^2, weighted total averaged over items"""
    _check_shapes(basic, ensemble, weights)
    if valid is None:
        valid = torch.ones_like(ensemble, dtype=torch.bool)
    per_entry = (basic - ensemble.unsqueeze(-1)) ** 2
    per_entry = torch.where(valid.unsqueeze(-1), per_entry, torch.zeros_like(per_entry))
    total = (weights * per_entry).sum((-1, -2)) / valid.sum(-1).clamp(min=1).to(basic.dtype)
    return AmbiguityReport(per_entry, total)


def _gather_items(values: torch.Tensor, index: torch.Tensor) -> torch.Tensor:
    """values (..., N, K) gathered at item indices (..., P) -> (..., P, K)"""
    index = index.long().unsqueeze(-1).expand(*index.shape, values.shape[-1])
    return torch.gather(values, -2, index)


def bpr_ambiguity(
    basic: torch.Tensor,
    ensemble: torch.Tensor,
    weights: torch.Tensor,
    positive_index: torch.Tensor,
    negative_index: torch.Tensor,
    pair_valid: Optional[torch.Tensor] = None,
    printed_form: bool = False,
    allow_empty: bool = False
) -> AmbiguityReport:
    """
    Per pair (n, m) and model k:
    A_nm^k = 1/2 * sigma(z^ens) * (1 - sigma(z^ens)) * (z^k - z^ens)^2
    with z = S_n - S_m. The weighted total averages sum_k w_n^k A_nm^k over pairs.

    printed_form evaluates the literal published expression instead: no 1/2
    and the weighted model sum nested inside every A_nm^k.
    """
    _check_shapes(basic, ensemble, weights)
    if pair_valid is None:
        pair_valid = torch.ones_like(positive_index, dtype=torch.bool)
    counts = pair_valid.sum(-1)
    if not allow_empty and (positive_index.shape[-1] == 0 or bool((counts == 0).any())):
        raise NoPairsError("BPR ambiguity needs at least one pair")

    z_basic = _gather_items(basic, positive_index) - _gather_items(basic, negative_index)
    z_ens = (
        torch.gather(ensemble, -1, positive_index.long())
        - torch.gather(ensemble, -1, negative_index.long())
    )
    curvature = torch.sigmoid(z_ens) * (1.0 - torch.sigmoid(z_ens))
    spread = (z_basic - z_ens.unsqueeze(-1)) ** 2
    positive_weights = _gather_items(weights, positive_index)

    if printed_form:
        nested = (positive_weights * spread).sum(-1, keepdim=True)
        per_pair = (curvature.unsqueeze(-1) * nested).expand_as(spread)
    else:
        per_pair = 0.5 * curvature.unsqueeze(-1) * spread
    per_pair = torch.where(pair_valid.unsqueeze(-1), per_pair, torch.zeros_like(per_pair))

    total = (positive_weights * per_pair).sum((-1, -2)) / counts.clamp(min=1).to(basic.dtype)
    return AmbiguityReport(per_pair, total)


def pl_ambiguity(
    basic: torch.Tensor,
    ensemble: torch.Tensor,
    weights: torch.Tensor,
    pi_order: torch.Tensor,
    valid: Optional[torch.Tensor] = None,
    printed_form: bool = False
) -> AmbiguityReport:
    """
    Position-wise ambiguity along pi:
    A_n^k = [sum_{m>n} e^{-z_nm^ens} (z_nm^k - z_nm^ens)]^2 / (1 + sum_{m>n} e^{-z_nm^ens})^2
    weighted total = sum_n sum_k w_{pi_n}^k A_n^k. Lists with fewer than two
    items give a zero report.

    printed_form uses e^{+z} in the denominator as published.
    """
    _check_shapes(basic, ensemble, weights)
    if valid is None:
        valid = torch.ones_like(ensemble, dtype=torch.bool)
    if ensemble.shape[-1] < 2:
        zeros = torch.zeros_like(basic)
        return AmbiguityReport(zeros, zeros.sum((-1, -2)))

    ordered_basic, ordered_valid = order_by_priority(basic, pi_order, valid)
    ordered_ens, _ = order_by_priority(ensemble, pi_order)
    ordered_weights, _ = order_by_priority(weights, pi_order)
    tail = tail_mask(ordered_valid)

    # z[..., n, m] = S_n - S_m along pi
    z_ens = ordered_ens.unsqueeze(-1) - ordered_ens.unsqueeze(-2)
    z_basic = ordered_basic.unsqueeze(-2) - ordered_basic.unsqueeze(-3)
    delta = z_basic - z_ens.unsqueeze(-1)
    delta = torch.where(tail.unsqueeze(-1), delta, torch.zeros_like(delta))

    if printed_form:
        numerator_weights = torch.where(tail, torch.exp(-z_ens), torch.zeros_like(z_ens))
        denominator = 1.0 + torch.where(tail, torch.exp(z_ens), torch.zeros_like(z_ens)).sum(-1)
        inner = (numerator_weights.unsqueeze(-1) * delta).sum(-2) / denominator.unsqueeze(-1)
    else:
        exponents = torch.where(tail, -z_ens, torch.full_like(z_ens, float("-inf")))
        with_one = torch.cat([torch.zeros_like(exponents[..., :1]), exponents], dim=-1)
        probabilities = torch.softmax(with_one, dim=-1)[..., 1:]
        inner = (probabilities.unsqueeze(-1) * delta).sum(-2)

    per_position = inner ** 2
    total = (ordered_weights * per_position).sum((-1, -2))
    return AmbiguityReport(per_position, total)


def intent_kl(
    true_intent: torch.Tensor,
    predicted_intent: torch.Tensor,
    epsilon: float = KL_EPSILON
) -> torch.Tensor:
    """KL(true || pred) = sum_i true_i * log(true_i / (pred_i + eps)), with 0 * log 0 = 0"""
    if true_intent.shape != predicted_intent.shape:
        raise ShapeMismatchError(
            f"Intent dimension mismatch: {tuple(true_intent.shape)} vs {tuple(predicted_intent.shape)}"
        )
    true_intent = true_intent.to(predicted_intent.dtype)
    return (
        torch.xlogy(true_intent, true_intent)
        - torch.xlogy(true_intent, predicted_intent + epsilon)
    ).sum(-1)


def _require_finite(value: Scalar, component: str) -> None:
    if isinstance(value, torch.Tensor):
        finite = bool(torch.isfinite(value.detach()).all())
    else:
        finite = math.isfinite(float(value))
    if not finite:
        raise NonFiniteLossError(component)


def ensemble_learning_loss(l_ens: Scalar, ambiguity: Scalar, alpha: float) -> Scalar:
    """l_el = l_ens - alpha * A"""
    return joint_loss(l_ens, ambiguity, 0.0, alpha, 0.0)


def joint_loss(
    l_ens: Scalar,
    ambiguity: Scalar,
    l_int: Scalar,
    alpha: float,
    gamma: float
) -> Scalar:
    """l_rec = l_ens - alpha * A + gamma * l_int"""
    if not isinstance(alpha, Real) or not isinstance(gamma, Real) or alpha < 0 or gamma < 0:
        raise IntelValidationError(f"alpha and gamma must be non-negative reals, got {alpha}, {gamma}")
    for value, component in ((l_ens, "l_ens"), (ambiguity, "ambiguity"), (l_int, "l_int")):
        _require_finite(value, component)
    return l_ens - alpha * ambiguity + gamma * l_int
