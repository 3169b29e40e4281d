"""
Session Builder Service
Filters raw interaction logs and groups them into sessions
"""
import logging
from enum import Enum
from typing import Dict, List

import pandas as pd

from ..entities.session import CandidateItem, ContextFeatures, Interaction, SessionRecord
from ..exceptions import IntelValidationError
from ...utils.timezone_utils import epoch_to_local

logger = logging.getLogger(__name__)

# Canonical event table produced by the interaction reader
EVENT_COLUMNS = ["user_id", "item_id", "category_id", "behavior", "level", "timestamp"]
VISIT_COLUMN = "visit_id"


class SessionRule(str, Enum):
    """How events are grouped into sessions"""
    CALENDAR_DAY = "calendar_day"  # Tmall: a user's interactions within a day
    VISIT_ID = "visit_id"          # LifeData: an explicit app visit id


def filter_min_positive(events: pd.DataFrame, min_count: int = 3) -> pd.DataFrame:
    """
    Iteratively drop users and items with fewer than min_count positive
    interactions until nothing changes.
    """
    if min_count < 1:
        raise IntelValidationError(f"min_count must be >= 1, got {min_count}")

    current = events
    iteration = 0
    while True:
        iteration += 1
        positives = current[current["level"] >= 1]
        user_counts = positives.groupby("user_id").size()
        item_counts = positives.groupby("item_id").size()

        keep_users = set(user_counts[user_counts >= min_count].index)
        keep_items = set(item_counts[item_counts >= min_count].index)
        filtered = current[current["user_id"].isin(keep_users) & current["item_id"].isin(keep_items)]

        if len(filtered) == len(current):
            break
        logger.debug(f"Filter pass {iteration}: {len(current)} -> {len(filtered)} events")
        current = filtered

    logger.info(
        f"Min-positive filter ({min_count}) kept {len(current)}/{len(events)} events "
        f"after {iteration} passes"
    )
    return current.reset_index(drop=True)


def category_mapping(events: pd.DataFrame, min_items: int = 1) -> Dict[int, int]:
    """
    Dense category ids. Categories with fewer than min_items distinct items
    share one 'other' id placed after all kept categories.
    """
    items_per_category = events.groupby("category_id")["item_id"].nunique()
    kept = sorted(int(c) for c, n in items_per_category.items() if n >= min_items)
    rare = sorted(int(c) for c, n in items_per_category.items() if n < min_items)

    mapping = {original: index for index, original in enumerate(kept)}
    if rare:
        other = len(kept)
        for original in rare:
            mapping[original] = other
        logger.info(f"Merged {len(rare)} categories with < {min_items} items into category {other}")
    return mapping


def merge_rare_categories(events: pd.DataFrame, min_items: int = 1) -> pd.DataFrame:
    """Re-index categories densely, merging rare ones into a shared bucket"""
    mapping = category_mapping(events, min_items)
    merged = events.copy()
    merged["category_id"] = merged["category_id"].astype(int).map(mapping).astype(int)
    return merged


def build_sessions(
    events: pd.DataFrame,
    rule: SessionRule = SessionRule.CALENDAR_DAY,
    timezone: str = "UTC"
) -> List[SessionRecord]:
    """
    Group events into sessions and drop sessions without a positive
    interaction. Output is ordered by session_id.
    """
    if events.empty:
        return []
    rule = SessionRule(rule)
    frame = events.sort_values(["user_id", "timestamp", "item_id"], kind="mergesort").copy()

    if rule == SessionRule.CALENDAR_DAY:
        frame["_session_key"] = [
            epoch_to_local(ts, timezone).date().isoformat() for ts in frame["timestamp"]
        ]
    else:
        if VISIT_COLUMN not in frame.columns:
            raise IntelValidationError(f"Session rule '{rule.value}' needs a '{VISIT_COLUMN}' column")
        frame["_session_key"] = frame[VISIT_COLUMN].astype(str)

    sessions: List[SessionRecord] = []
    dropped = 0
    for (user_id, key), group in frame.groupby(["user_id", "_session_key"], sort=True):
        if not (group["level"] >= 1).any():
            dropped += 1
            continue

        candidates: Dict[str, CandidateItem] = {}
        interactions = []
        for row in group.itertuples(index=False):
            item_id = str(row.item_id)
            if item_id not in candidates:
                candidates[item_id] = CandidateItem(item_id=item_id, category_id=int(row.category_id))
            interactions.append(Interaction(item_id=item_id, level=int(row.level), timestamp=float(row.timestamp)))

        start = float(group["timestamp"].min())
        local_start = epoch_to_local(start, timezone)
        sessions.append(SessionRecord(
            session_id=f"{user_id}:{key}",
            user_id=str(user_id),
            timestamp=start,
            context=ContextFeatures(hour_of_day=local_start.hour, day_of_week=local_start.weekday()),
            candidates=tuple(candidates.values()),
            interactions=tuple(interactions),
        ))

    if dropped:
        logger.info(f"Dropped {dropped} sessions without positive interactions")
    sessions.sort(key=lambda s: s.session_id)
    logger.info(f"Built {len(sessions)} sessions using rule '{rule.value}'")
    return sessions
