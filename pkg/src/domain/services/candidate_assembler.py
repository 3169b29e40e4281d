"""
Candidate Assembler Service
Builds per-session candidate score matrices, ground truth and intent targets
"""
import logging
from dataclasses import dataclass
from typing import Dict, Sequence

import numpy as np
import pandas as pd

from ..entities.session import CandidateItem, GroundTruth, SessionRecord, SessionSample
from ..exceptions import IntelValidationError, NoPositivesError, OutOfVocabularyError
from ..value_objects.basic_lists import BasicListSet
from ..value_objects.behavior import BehaviorScheme
from ..value_objects.intent import IntentDistribution, flat_intent_index
from ..value_objects.scores import ScoreMatrix

logger = logging.getLogger(__name__)

CONSTANT_COLUMN_VALUE = 0.5
IMPUTED_VALUE = 0.0


@dataclass(frozen=True)
class AssembledCandidates:
    """Raw (un-normalized) candidate scores of one session"""
    record: SessionRecord
    scores: ScoreMatrix
    ground_truth: GroundTruth


def assemble_candidates(
    session: SessionRecord,
    lists: BasicListSet,
    model_ids: Sequence[str],
    catalog: Dict[str, int],
    top_m: int = 30
) -> AssembledCandidates:
    """
    Candidate set = union of every model's top-m items plus all positively
    interacted items. A score is genuine (mask true) wherever model k's list
    scores the item, also beyond its top-m; other entries stay NaN until
    normalize_and_impute fills them.
    """
    if top_m < 1:
        raise IntelValidationError(f"top_m must be >= 1, got {top_m}")

    model_lists = [lists.get(session.session_id, model_id) for model_id in model_ids]
    session_categories = session.category_of()

    candidates: Dict[str, CandidateItem] = {}
    unknown = 0
    for items in model_lists:
        for scored in items[:top_m]:
            if scored.item_id in candidates:
                continue
            category = session_categories.get(scored.item_id, catalog.get(scored.item_id))
            if category is None:
                unknown += 1
                continue
            candidates[scored.item_id] = CandidateItem(scored.item_id, int(category))

    levels_by_item = session.item_levels()
    for interaction in session.interactions:
        if interaction.level >= 1 and interaction.item_id not in candidates:
            candidates[interaction.item_id] = CandidateItem(
                interaction.item_id, session_categories[interaction.item_id]
            )

    if unknown:
        logger.warning(f"Session {session.session_id}: dropped {unknown} listed items without a category")

    ordered = list(candidates.values())
    index = {c.item_id: n for n, c in enumerate(ordered)}
    values = np.full((len(ordered), len(model_ids)), np.nan)
    mask = np.zeros((len(ordered), len(model_ids)), dtype=bool)
    for k, items in enumerate(model_lists):
        for scored in items:
            n = index.get(scored.item_id)
            if n is not None:
                values[n, k] = scored.score
                mask[n, k] = True

    levels = [levels_by_item.get(c.item_id, 0) for c in ordered]
    record = SessionRecord(
        session_id=session.session_id,
        user_id=session.user_id,
        timestamp=session.timestamp,
        context=session.context,
        candidates=tuple(ordered),
        interactions=session.interactions,
    )
    return AssembledCandidates(
        record=record,
        scores=ScoreMatrix(values=values, mask=mask, model_ids=tuple(model_ids)),
        ground_truth=GroundTruth.from_levels(levels, [c.item_id for c in ordered]),
    )


def normalize_and_impute(scores: ScoreMatrix) -> ScoreMatrix:
    """
    Per-column min-max normalization of genuine scores to [0, 1]; constant
    columns map to 0.5 and unmasked entries are imputed with 0.0.
    """
    values = np.full(scores.values.shape, IMPUTED_VALUE)
    for k in range(scores.num_models):
        genuine = scores.mask[:, k]
        if not genuine.any():
            raise IntelValidationError(f"Score column '{scores.model_ids[k]}' has no genuine entries")
        column = scores.values[genuine, k]
        low, high = float(column.min()), float(column.max())
        if high - low <= 1e-12 * max(1.0, abs(high)):
            values[genuine, k] = CONSTANT_COLUMN_VALUE
        else:
            values[genuine, k] = (column - low) / (high - low)
    return ScoreMatrix(values=values, mask=scores.mask.copy(), model_ids=scores.model_ids)


def compute_intent_gt(
    session: SessionRecord,
    scheme: BehaviorScheme,
    num_categories: int
) -> IntentDistribution:
    """Count positive interactions per (behavior, category) cell and normalize"""
    counts = np.zeros(scheme.num_behaviors * num_categories)
    categories = session.category_of()
    for interaction in session.positive_interactions:
        category = categories[interaction.item_id]
        if category >= num_categories:
            raise OutOfVocabularyError(f"Category {category} >= configured count {num_categories}")
        behavior = scheme.behavior_index(interaction.level)
        counts[flat_intent_index(behavior, category, num_categories)] += 1.0
    if counts.sum() == 0:
        raise NoPositivesError(f"Session {session.session_id} has no positive interactions")
    return IntentDistribution.from_counts(counts)


def assemble_session_sample(
    session: SessionRecord,
    lists: BasicListSet,
    model_ids: Sequence[str],
    catalog: Dict[str, int],
    scheme: BehaviorScheme,
    num_categories: int,
    top_m: int = 30
) -> SessionSample:
    """Full per-session pipeline: assemble, normalize and attach the intent target"""
    assembled = assemble_candidates(session, lists, model_ids, catalog, top_m)
    return SessionSample(
        record=assembled.record,
        scores=normalize_and_impute(assembled.scores),
        ground_truth=assembled.ground_truth,
        intent=compute_intent_gt(assembled.record, scheme, num_categories),
    )


def item_catalog(events: pd.DataFrame) -> Dict[str, int]:
    """
    Item -> category map from an event table, first occurrence wins.
    Built before any filtering so list items of dropped events keep a category.
    """
    firsts = events.drop_duplicates("item_id", keep="first")
    return dict(zip(firsts["item_id"].astype(str), firsts["category_id"].astype(int)))
