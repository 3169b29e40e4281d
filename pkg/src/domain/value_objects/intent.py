"""
Intent Distribution Value Object
Probability distribution over (behavior x item category) cells
"""
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..entities.base import ValueObject
from ..exceptions import IntelValidationError, ShapeMismatchError

SUM_TOLERANCE = 1e-6


def flat_intent_index(behavior_index: int, category_id: int, num_categories: int) -> int:
    """Behavior-major flattening: behavior_index * |I| + category_id"""
    return behavior_index * num_categories + category_id


@dataclass(frozen=True, eq=False)
class IntentDistribution(ValueObject):
    """Intent probabilities of one session, flat index = behavior * |I| + category"""
    probs: np.ndarray

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=np.float64)
        if probs.ndim != 1 or probs.size == 0:
            raise ShapeMismatchError(f"Intent must be a non-empty vector, got shape {probs.shape}")
        if np.any(probs < 0) or not np.all(np.isfinite(probs)):
            raise IntelValidationError("Intent probabilities must be finite and non-negative")
        if abs(probs.sum() - 1.0) > SUM_TOLERANCE:
            raise IntelValidationError(f"Intent probabilities sum to {probs.sum():.9f}, expected 1")
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)

    @property
    def dim(self) -> int:
        return int(self.probs.size)

    @classmethod
    def uniform(cls, dim: int) -> 'IntentDistribution':
        return cls(np.full(dim, 1.0 / dim))

    @classmethod
    def one_hot(cls, dim: int, index: int) -> 'IntentDistribution':
        probs = np.zeros(dim)
        probs[index] = 1.0
        return cls(probs)

    @classmethod
    def from_counts(cls, counts: Sequence[float]) -> 'IntentDistribution':
        counts = np.asarray(counts, dtype=np.float64)
        total = counts.sum()
        if total <= 0:
            raise IntelValidationError("Cannot normalize an all-zero count vector")
        return cls(counts / total)

    def to_list(self):
        return [float(p) for p in self.probs]

    def __repr__(self) -> str:
        return f"IntentDistribution(dim={self.dim})"
