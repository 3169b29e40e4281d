"""
Ranking Losses
Point-wise (MSE), pair-wise (BPR) and list-wise (Plackett-Luce) losses over
ensemble scores against multi-level ground truth.

All losses take scores shaped (..., N) and return one value per session
shaped (...); a 1-D input yields a scalar. Padded batches pass a boolean
`valid` mask over items (or pairs).
"""
import logging
from typing import Optional, Union

import numpy as np
import torch
import torch.nn.functional as F

from ..entities.session import GroundTruth
from ..exceptions import EmptySessionError, IntelValidationError, NoPairsError, ShapeMismatchError
from ..value_objects.pairs import BprPairSet

logger = logging.getLogger(__name__)


def _valid_or_all(scores: torch.Tensor, valid: Optional[torch.Tensor]) -> torch.Tensor:
    if valid is None:
        return torch.ones_like(scores, dtype=torch.bool)
    if valid.shape != scores.shape:
        raise ShapeMismatchError(f"Mask shape {tuple(valid.shape)} != score shape {tuple(scores.shape)}")
    return valid.bool()


def _require_items(scores: torch.Tensor, valid: torch.Tensor) -> None:
    if scores.shape[-1] == 0 or bool((valid.sum(-1) == 0).any()):
        raise EmptySessionError("Ranking loss needs at least one item per session")


def mse_loss(
    scores: torch.Tensor,
    targets: torch.Tensor,
    valid: Optional[torch.Tensor] = None
) -> torch.Tensor:
    """(1/N) * sum_n (S_n - pi_n)^2 with pi_n the numeric behavior level"""
    if targets.shape != scores.shape:
        raise ShapeMismatchError(f"Target shape {tuple(targets.shape)} != score shape {tuple(scores.shape)}")
    valid = _valid_or_all(scores, valid)
    _require_items(scores, valid)
    squared = torch.where(valid, (scores - targets.to(scores.dtype)) ** 2, torch.zeros_like(scores))
    return squared.sum(-1) / valid.sum(-1).to(scores.dtype)


def sample_bpr_pairs(
    ground_truth: GroundTruth,
    seed: Union[int, np.random.Generator]
) -> BprPairSet:
    """
    For each positive item at level l >= 1, draw one item uniformly from
    level l - 1. Positives whose lower level is empty are skipped.
    """
    levels = ground_truth.levels
    if not bool(np.any(levels >= 1)):
        raise IntelValidationError("BPR sampling needs at least one item at level >= 1")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)

    pools = {int(level): np.flatnonzero(levels == level) for level in np.unique(levels)}
    pairs = []
    for positive in range(levels.size):
        level = int(levels[positive])
        if level < 1:
            continue
        pool = pools.get(level - 1)
        if pool is None or pool.size == 0:
            continue
        negative = int(pool[rng.integers(pool.size)])
        pairs.append((positive, negative, level))
    return BprPairSet(tuple(pairs))


def _gather_last(values: torch.Tensor, index: torch.Tensor) -> torch.Tensor:
    return torch.gather(values, -1, index.long())


def bpr_loss(
    scores: torch.Tensor,
    positive_index: torch.Tensor,
    negative_index: torch.Tensor,
    pair_valid: Optional[torch.Tensor] = None,
    allow_empty: bool = False
) -> torch.Tensor:
    """
    (1/N+) * sum over pairs of -log sigmoid(S_pos - S_neg), N+ being the
    number of pairs actually formed. Sessions without pairs raise NoPairsError
    unless allow_empty, in which case they contribute 0.
    """
    if positive_index.shape != negative_index.shape:
        raise ShapeMismatchError("Positive and negative index tensors differ in shape")
    if pair_valid is None:
        pair_valid = torch.ones_like(positive_index, dtype=torch.bool)
    counts = pair_valid.sum(-1)
    if not allow_empty and (positive_index.shape[-1] == 0 or bool((counts == 0).any())):
        raise NoPairsError("BPR loss needs at least one pair")

    diff = _gather_last(scores, positive_index) - _gather_last(scores, negative_index)
    per_pair = torch.where(pair_valid, -F.logsigmoid(diff), torch.zeros_like(diff))
    return per_pair.sum(-1) / counts.clamp(min=1).to(scores.dtype)


def bpr_loss_for_pairs(scores: torch.Tensor, pairs: BprPairSet) -> torch.Tensor:
    """Single-session BPR loss from a sampled pair set"""
    if pairs.is_empty:
        raise NoPairsError("BPR loss needs at least one pair")
    return bpr_loss(
        scores,
        torch.as_tensor(pairs.positive_indices),
        torch.as_tensor(pairs.negative_indices),
    )


def order_by_priority(
    values: torch.Tensor,
    pi_order: torch.Tensor,
    valid: Optional[torch.Tensor] = None
):
    """Gather item-indexed values (..., N) or (..., N, K) into pi order"""
    index = pi_order.long()
    if values.dim() == index.dim() + 1:
        ordered = torch.gather(values, -2, index.unsqueeze(-1).expand(*index.shape, values.shape[-1]))
    else:
        ordered = torch.gather(values, -1, index)
    ordered_valid = None if valid is None else torch.gather(valid.bool(), -1, index)
    return ordered, ordered_valid


def tail_mask(ordered_valid: torch.Tensor) -> torch.Tensor:
    """mask[..., n, m] is true for valid positions m > n of a valid n"""
    n = ordered_valid.shape[-1]
    upper = torch.triu(torch.ones(n, n, dtype=torch.bool, device=ordered_valid.device), diagonal=1)
    return upper & ordered_valid.unsqueeze(-1) & ordered_valid.unsqueeze(-2)


def pl_loss(
    scores: torch.Tensor,
    pi_order: torch.Tensor,
    valid: Optional[torch.Tensor] = None
) -> torch.Tensor:
    """
    Plackett-Luce loss sum_n g_n with
    g_n = log(1 + sum_{m>n} exp(-(S_{pi_n} - S_{pi_m}))).
    The constant log N of the normalized likelihood is omitted.
    """
    valid = _valid_or_all(scores, valid)
    _require_items(scores, valid)
    ordered, ordered_valid = order_by_priority(scores, pi_order, valid)
    tail = tail_mask(ordered_valid)

    # exponent of each tail term: S_m - S_n
    exponents = ordered.unsqueeze(-2) - ordered.unsqueeze(-1)
    exponents = torch.where(tail, exponents, torch.full_like(exponents, float("-inf")))
    with_one = torch.cat([torch.zeros_like(exponents[..., :1]), exponents], dim=-1)
    g = torch.logsumexp(with_one, dim=-1)
    g = torch.where(ordered_valid, g, torch.zeros_like(g))
    return g.sum(-1)
