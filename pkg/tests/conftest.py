"""
Shared test fixtures
Small hand-built sessions and event tables
"""
from typing import List, Optional, Sequence

import numpy as np
import pandas as pd
import pytest

from src.domain.entities.dataset import SessionDataset
from src.domain.entities.session import (
    CandidateItem, ContextFeatures, GroundTruth, Interaction, SessionRecord, SessionSample
)
from src.domain.value_objects.behavior import BehaviorScheme
from src.domain.value_objects.intent import IntentDistribution
from src.domain.value_objects.scores import ScoreMatrix

DAY = 86400.0


def make_sample(
    session_id: str,
    scores: Sequence[Sequence[float]],
    levels: Sequence[int],
    categories: Optional[Sequence[int]] = None,
    user_id: str = "u1",
    timestamp: float = 0.0,
    num_categories: int = 2,
    scheme: Optional[BehaviorScheme] = None,
    model_ids: Optional[Sequence[str]] = None
) -> SessionSample:
    """A SessionSample whose intent is derived from its positive levels"""
    scheme = scheme or BehaviorScheme.two_level()
    values = np.asarray(scores, dtype=np.float64)
    n, k = values.shape
    categories = list(categories) if categories is not None else [i % num_categories for i in range(n)]
    item_ids = [f"{session_id}-i{i}" for i in range(n)]
    interactions = [
        Interaction(item_ids[i], int(level), timestamp + i) for i, level in enumerate(levels) if level >= 1
    ]
    counts = np.zeros(scheme.num_behaviors * num_categories)
    for i, level in enumerate(levels):
        if level >= 1:
            counts[scheme.behavior_index(level) * num_categories + categories[i]] += 1
    intent = IntentDistribution.from_counts(counts) if counts.sum() else IntentDistribution.uniform(counts.size)
    record = SessionRecord(
        session_id=session_id,
        user_id=user_id,
        timestamp=timestamp,
        context=ContextFeatures(hour_of_day=int(timestamp // 3600) % 24, day_of_week=int(timestamp // DAY) % 7),
        candidates=tuple(CandidateItem(item_ids[i], categories[i]) for i in range(n)),
        interactions=tuple(interactions),
    )
    return SessionSample(
        record=record,
        scores=ScoreMatrix(values, np.ones_like(values, dtype=bool), tuple(model_ids or [f"m{j}" for j in range(k)])),
        ground_truth=GroundTruth.from_levels(levels, item_ids),
        intent=intent,
    )


def make_dataset(seed: int = 0, users: int = 6, days: int = 14, items: int = 6, models: int = 2) -> SessionDataset:
    """Random sessions over `days` days with a train/validation/test split"""
    rng = np.random.default_rng(seed)
    samples: List[SessionSample] = []
    splits = {}
    for u in range(users):
        for d in range(days):
            levels = rng.integers(0, 3, size=items)
            levels[0] = max(levels[0], 1)
            sample = make_sample(
                f"u{u}:{d:02d}",
                rng.uniform(0, 1, size=(items, models)),
                levels,
                user_id=f"u{u}",
                timestamp=d * DAY + 3600 * (u % 24),
            )
            samples.append(sample)
            splits[sample.session_id] = "test" if d >= days - 3 else "validation" if d >= days - 5 else "train"
    return SessionDataset(
        samples=samples,
        scheme=BehaviorScheme.two_level(),
        num_categories=2,
        model_ids=tuple(f"m{j}" for j in range(models)),
        splits=splits,
    )


@pytest.fixture
def scheme() -> BehaviorScheme:
    return BehaviorScheme.two_level()


@pytest.fixture
def tiny_dataset() -> SessionDataset:
    return make_dataset()


@pytest.fixture
def events() -> pd.DataFrame:
    """Three users with three positive interactions on each of three items, over two days"""
    rows = []
    for u in ("u1", "u2", "u3"):
        for day in (0, 1):
            for i, item in enumerate(("a", "b", "c")):
                level = 1 if day == 0 else 2 if item == "a" else 0
                rows.append({
                    "user_id": u, "item_id": item, "category_id": i % 2,
                    "behavior": ["examine", "click", "buy"][level], "level": level,
                    "timestamp": day * DAY + 100.0 * i,
                })
    return pd.DataFrame(rows)
