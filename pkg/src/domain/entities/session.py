"""
Session Entities
User visits, their candidates, multi-level ground truth and history windows
"""
from dataclasses import dataclass, field
from typing import Dict, Hashable, List, Optional, Sequence, Tuple

import numpy as np

from ..exceptions import EmptySessionError, IntelValidationError, ShapeMismatchError
from ..value_objects.intent import IntentDistribution
from ..value_objects.scores import ScoreMatrix

HOURS_PER_DAY = 24
DAYS_PER_WEEK = 7


@dataclass(frozen=True)
class CandidateItem:
    """Candidate item with its category"""
    item_id: str
    category_id: int

    def __post_init__(self):
        if self.category_id < 0:
            raise IntelValidationError(f"Negative category id for item {self.item_id}")


@dataclass(frozen=True)
class ContextFeatures:
    """Environment context of a session"""
    hour_of_day: int
    day_of_week: int
    extra: Tuple[float, ...] = ()

    def __post_init__(self):
        if not 0 <= self.hour_of_day < HOURS_PER_DAY:
            raise IntelValidationError(f"hour_of_day {self.hour_of_day} outside [0, 24)")
        if not 0 <= self.day_of_week < DAYS_PER_WEEK:
            raise IntelValidationError(f"day_of_week {self.day_of_week} outside [0, 7)")
        object.__setattr__(self, "extra", tuple(float(v) for v in self.extra))

    def to_vector(self, extra_dim: int = 0) -> np.ndarray:
        """one-hot(hour) + one-hot(day_of_week) + extra"""
        if len(self.extra) != extra_dim:
            raise ShapeMismatchError(
                f"Context extra has {len(self.extra)} values, configuration expects {extra_dim}"
            )
        vector = np.zeros(HOURS_PER_DAY + DAYS_PER_WEEK + extra_dim)
        vector[self.hour_of_day] = 1.0
        vector[HOURS_PER_DAY + self.day_of_week] = 1.0
        if extra_dim:
            vector[HOURS_PER_DAY + DAYS_PER_WEEK:] = self.extra
        return vector


def context_dim(extra_dim: int = 0) -> int:
    return HOURS_PER_DAY + DAYS_PER_WEEK + extra_dim


@dataclass(frozen=True)
class Interaction:
    """One logged interaction of a session"""
    item_id: str
    level: int
    timestamp: float = 0.0


@dataclass(frozen=True)
class SessionRecord:
    """A user visit"""
    session_id: str
    user_id: str
    timestamp: float
    context: ContextFeatures
    candidates: Tuple[CandidateItem, ...]
    interactions: Tuple[Interaction, ...]

    def __post_init__(self):
        object.__setattr__(self, "candidates", tuple(self.candidates))
        object.__setattr__(self, "interactions", tuple(self.interactions))
        ids = [c.item_id for c in self.candidates]
        if len(set(ids)) != len(ids):
            raise IntelValidationError(f"Duplicate candidate ids in session {self.session_id}")

    @property
    def positive_interactions(self) -> List[Interaction]:
        return [i for i in self.interactions if i.level >= 1]

    @property
    def has_positive(self) -> bool:
        return any(i.level >= 1 for i in self.interactions)

    def item_levels(self) -> Dict[str, int]:
        """Strongest level reached by each interacted item"""
        levels: Dict[str, int] = {}
        for interaction in self.interactions:
            levels[interaction.item_id] = max(levels.get(interaction.item_id, 0), interaction.level)
        return levels

    def category_of(self) -> Dict[str, int]:
        return {c.item_id: c.category_id for c in self.candidates}


def derive_pi_order(levels: Sequence[int], item_ids: Sequence[Hashable]) -> np.ndarray:
    """
    Ground-truth priority order: indices sorted by level descending,
    ties broken by ascending item id.
    """
    if len(levels) != len(item_ids):
        raise ShapeMismatchError(f"{len(levels)} levels for {len(item_ids)} item ids")
    if len(levels) == 0:
        raise EmptySessionError("Cannot order an empty session")
    order = sorted(range(len(levels)), key=lambda n: (-int(levels[n]), item_ids[n]))
    return np.asarray(order, dtype=np.int64)


@dataclass(frozen=True, eq=False)
class GroundTruth:
    """Multi-level relevance per candidate and the derived priority order"""
    levels: np.ndarray
    pi_order: np.ndarray

    def __post_init__(self):
        levels = np.asarray(self.levels, dtype=np.int64)
        pi_order = np.asarray(self.pi_order, dtype=np.int64)
        if levels.ndim != 1 or levels.size == 0:
            raise EmptySessionError("Ground truth needs at least one item")
        if np.any(levels < 0):
            raise IntelValidationError("Behavior levels must be non-negative")
        if sorted(pi_order.tolist()) != list(range(levels.size)):
            raise IntelValidationError("pi_order is not a permutation of the item indices")
        if np.any(np.diff(levels[pi_order]) > 0):
            raise IntelValidationError("Levels along pi_order must be non-increasing")
        levels.setflags(write=False)
        pi_order.setflags(write=False)
        object.__setattr__(self, "levels", levels)
        object.__setattr__(self, "pi_order", pi_order)

    @classmethod
    def from_levels(cls, levels: Sequence[int], item_ids: Sequence[Hashable]) -> 'GroundTruth':
        return cls(np.asarray(levels, dtype=np.int64), derive_pi_order(levels, item_ids))

    @property
    def num_items(self) -> int:
        return int(self.levels.size)


@dataclass(frozen=True, eq=False)
class SessionSample:
    """A fully assembled session: record, basic scores, ground truth and realized intent"""
    record: SessionRecord
    scores: ScoreMatrix
    ground_truth: GroundTruth
    intent: IntentDistribution

    def __post_init__(self):
        n = len(self.record.candidates)
        if self.scores.num_items != n or self.ground_truth.num_items != n:
            raise ShapeMismatchError(
                f"Session {self.record.session_id}: {n} candidates, "
                f"{self.scores.num_items} score rows, {self.ground_truth.num_items} levels"
            )

    @property
    def session_id(self) -> str:
        return self.record.session_id

    @property
    def item_ids(self) -> List[str]:
        return [c.item_id for c in self.record.candidates]

    @property
    def category_ids(self) -> np.ndarray:
        return np.asarray([c.category_id for c in self.record.candidates], dtype=np.int64)


@dataclass(frozen=True)
class HistoryWindow:
    """
    Sessions strictly preceding a target session (most recent last) with their
    realized intents, plus the chronological positive interactions as
    (behavior_index, category_id) cells.
    """
    past_intents: Tuple[IntentDistribution, ...] = ()
    past_contexts: Tuple[ContextFeatures, ...] = ()
    past_items: Tuple[Tuple[int, int], ...] = ()
    max_sessions: int = 20
    max_items: int = 100

    def __post_init__(self):
        if len(self.past_intents) != len(self.past_contexts):
            raise ShapeMismatchError("Each past session needs both an intent and a context")
        # keep only the most recent entries
        object.__setattr__(self, "past_intents", tuple(self.past_intents)[-self.max_sessions:] if self.max_sessions else ())
        object.__setattr__(self, "past_contexts", tuple(self.past_contexts)[-self.max_sessions:] if self.max_sessions else ())
        object.__setattr__(self, "past_items", tuple(tuple(c) for c in self.past_items)[-self.max_items:] if self.max_items else ())

    @property
    def is_empty(self) -> bool:
        return len(self.past_intents) == 0

    @property
    def num_sessions(self) -> int:
        return len(self.past_intents)


@dataclass
class SplitResult:
    """Temporal split of sessions"""
    train: List[SessionSample] = field(default_factory=list)
    validation: List[SessionSample] = field(default_factory=list)
    test: List[SessionSample] = field(default_factory=list)
    boundaries: Optional[Dict[str, str]] = None
