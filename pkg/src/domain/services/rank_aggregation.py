"""
Rank Aggregation Service
Unsupervised ensemble baselines: single basic model, Borda count and
Robust Rank Aggregation (RRA)
"""
import logging
from enum import Enum
from typing import Dict, Hashable, List, Optional, Sequence

import numpy as np
from scipy.stats import beta

from ..entities.session import SessionSample
from ..exceptions import IntelValidationError
from ..value_objects.scores import ScoreMatrix

logger = logging.getLogger(__name__)


class AggregationMethod(str, Enum):
    """Baseline aggregation methods"""
    SINGLE = "single"
    BORDA = "borda"
    RRA = "rra"


def rank_by_scores(values: Sequence[float], item_ids: Sequence[Hashable]) -> np.ndarray:
    """Indices sorted by score descending, ties by ascending item id"""
    values = np.asarray(values, dtype=np.float64)
    if values.size != len(item_ids):
        raise IntelValidationError(f"{values.size} scores for {len(item_ids)} item ids")
    order = sorted(range(values.size), key=lambda n: (-values[n], item_ids[n]))
    return np.asarray(order, dtype=np.int64)


def single_model(scores: ScoreMatrix, k: int, item_ids: Sequence[Hashable]) -> np.ndarray:
    """Rank the candidates by basic model k alone"""
    if not 0 <= k < scores.num_models:
        raise IntelValidationError(f"Model index {k} outside [0, {scores.num_models})")
    return rank_by_scores(scores.column(k), item_ids)


def basic_rankings(scores: ScoreMatrix, item_ids: Sequence[Hashable]) -> List[List[Hashable]]:
    """Each model's ranking over the items it genuinely scored"""
    rankings = []
    for k in range(scores.num_models):
        proposed = np.flatnonzero(scores.mask[:, k])
        order = sorted(proposed, key=lambda n: (-scores.values[n, k], item_ids[n]))
        rankings.append([item_ids[n] for n in order])
    return rankings


def _universe(rankings: Sequence[Sequence[Hashable]], universe: Optional[Sequence[Hashable]]) -> List[Hashable]:
    if universe is not None:
        return list(universe)
    seen: Dict[Hashable, None] = {}
    for ranking in rankings:
        for item in ranking:
            seen.setdefault(item, None)
    return list(seen)


def _positions(ranking: Sequence[Hashable]) -> Dict[Hashable, int]:
    positions = {}
    for position, item in enumerate(ranking, start=1):
        if item in positions:
            raise IntelValidationError(f"Item {item!r} appears twice in one ranking")
        positions[item] = position
    return positions


def borda(
    rankings: Sequence[Sequence[Hashable]],
    universe: Optional[Sequence[Hashable]] = None
) -> List[Hashable]:
    """
    Items sorted by ascending mean rank over the K rankings, ties by
    ascending item id. An item missing from a ranking gets rank N + 1.
    """
    if not rankings:
        raise IntelValidationError("Borda needs at least one ranking")
    items = _universe(rankings, universe)
    n = len(items)
    positions = [_positions(r) for r in rankings]
    mean_rank = {
        item: float(np.mean([p.get(item, n + 1) for p in positions]))
        for item in items
    }
    return sorted(items, key=lambda item: (mean_rank[item], item))


def rra_scores(
    rankings: Sequence[Sequence[Hashable]],
    universe: Optional[Sequence[Hashable]] = None
) -> Dict[Hashable, float]:
    """
    rho per item: the minimum over j of BetaCDF(r_(j); j, K - j + 1) where
    r_(1) <= ... <= r_(K) are its sorted normalized ranks (missing -> 1.0)
    """
    items = _universe(rankings, universe)
    if not items:
        raise IntelValidationError("RRA needs at least one item")
    if not rankings:
        raise IntelValidationError("RRA needs at least one ranking")
    n = len(items)
    k = len(rankings)
    positions = [_positions(r) for r in rankings]
    j = np.arange(1, k + 1)

    rho = {}
    for item in items:
        normalized = np.sort([p[item] / n if item in p else 1.0 for p in positions])
        rho[item] = float(np.min(beta.cdf(normalized, j, k - j + 1)))
    return rho


def rra(
    rankings: Sequence[Sequence[Hashable]],
    universe: Optional[Sequence[Hashable]] = None
) -> List[Hashable]:
    """Items sorted by ascending rho, ties by ascending item id"""
    rho = rra_scores(rankings, universe)
    return sorted(rho, key=lambda item: (rho[item], item))


def aggregate_session(sample: SessionSample, method: AggregationMethod, model_index: int = 0) -> np.ndarray:
    """Baseline ranking of one session as candidate indices"""
    item_ids = sample.item_ids
    if method == AggregationMethod.SINGLE:
        return single_model(sample.scores, model_index, item_ids)

    rankings = basic_rankings(sample.scores, item_ids)
    if method == AggregationMethod.BORDA:
        ordered = borda(rankings, universe=item_ids)
    elif method == AggregationMethod.RRA:
        ordered = rra(rankings, universe=item_ids)
    else:
        raise IntelValidationError(f"Unknown aggregation method: {method}")
    index = {item: n for n, item in enumerate(item_ids)}
    return np.asarray([index[item] for item in ordered], dtype=np.int64)


def parse_method(text: str):
    """'single:k' | 'borda' | 'rra' -> (AggregationMethod, model index)"""
    name, _, suffix = text.partition(":")
    try:
        method = AggregationMethod(name.strip().lower())
    except ValueError:
        raise IntelValidationError(f"Unknown aggregation method: {text}")
    if method == AggregationMethod.SINGLE:
        if not suffix.strip().isdigit():
            raise IntelValidationError(f"single needs a model index, e.g. single:0 (got {text})")
        return method, int(suffix)
    if suffix:
        raise IntelValidationError(f"{method.value} takes no model index (got {text})")
    return method, 0
