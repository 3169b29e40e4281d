"""
BPR Pair Value Object
Positive items paired with a sampled item from one level lower
"""
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from ..entities.base import ValueObject


@dataclass(frozen=True, eq=False)
class BprPairSet(ValueObject):
    """(positive_index, negative_index, positive_level) triples of one session"""
    pairs: Tuple[Tuple[int, int, int], ...] = ()

    def __len__(self) -> int:
        return len(self.pairs)

    @property
    def is_empty(self) -> bool:
        return len(self.pairs) == 0

    @property
    def positive_indices(self) -> np.ndarray:
        return np.asarray([p for p, _, _ in self.pairs], dtype=np.int64)

    @property
    def negative_indices(self) -> np.ndarray:
        return np.asarray([n for _, n, _ in self.pairs], dtype=np.int64)

    def as_index_pairs(self) -> List[Tuple[int, int]]:
        return [(p, n) for p, n, _ in self.pairs]
