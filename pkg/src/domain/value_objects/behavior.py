"""
Behavior Levels
Feedback priority used for multi-level ground truth and intent cells
"""
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

from ..exceptions import IntelValidationError


@dataclass(frozen=True)
class BehaviorLevel:
    """A behavior label and its rank in the feedback priority"""
    name: str
    level: int

    @property
    def is_positive(self) -> bool:
        return self.level >= 1

    @property
    def display_name(self) -> str:
        """Name used in metric keys, e.g. Click-NDCG@3"""
        return self.name.capitalize()


class BehaviorScheme:
    """
    Ordered behavior levels of a dataset.
    Levels are contiguous 0..L-1 with examine at level 0. Positive behaviors
    (level >= 1) form the behavior axis of the intent space, so the behavior
    index of a positive level is level - 1.
    """

    EXAMINE = "examine"

    def __init__(self, names: Sequence[str]):
        normalized = [name.strip().lower() for name in names]
        if len(normalized) < 2:
            raise IntelValidationError("A behavior scheme needs examine plus at least one positive behavior")
        if normalized[0] != self.EXAMINE:
            raise IntelValidationError(f"Level 0 must be '{self.EXAMINE}', got '{normalized[0]}'")
        if len(set(normalized)) != len(normalized):
            raise IntelValidationError(f"Duplicate behavior names: {normalized}")
        self._levels: Tuple[BehaviorLevel, ...] = tuple(
            BehaviorLevel(name=name, level=level) for level, name in enumerate(normalized)
        )
        self._by_name: Dict[str, BehaviorLevel] = {b.name: b for b in self._levels}

    @classmethod
    def tmall(cls) -> 'BehaviorScheme':
        """Buy > Favorite > Click > Examine"""
        return cls(["examine", "click", "favorite", "buy"])

    @classmethod
    def two_level(cls) -> 'BehaviorScheme':
        """Buy > Click > Examine"""
        return cls(["examine", "click", "buy"])

    @property
    def levels(self) -> Tuple[BehaviorLevel, ...]:
        return self._levels

    @property
    def names(self) -> List[str]:
        return [b.name for b in self._levels]

    @property
    def num_levels(self) -> int:
        """L, the number of interaction levels"""
        return len(self._levels)

    @property
    def num_behaviors(self) -> int:
        """|B|, the number of positive behaviors"""
        return len(self._levels) - 1

    @property
    def positive_behaviors(self) -> Tuple[BehaviorLevel, ...]:
        return self._levels[1:]

    def from_name(self, name: str) -> BehaviorLevel:
        key = str(name).strip().lower()
        if key not in self._by_name:
            raise IntelValidationError(f"Unknown behavior '{name}'; expected one of {self.names}")
        return self._by_name[key]

    def from_level(self, level: int) -> BehaviorLevel:
        if not 0 <= level < len(self._levels):
            raise IntelValidationError(f"Behavior level {level} outside 0..{len(self._levels) - 1}")
        return self._levels[level]

    def behavior_index(self, level: int) -> int:
        """Index on the intent behavior axis for a positive level"""
        if not 1 <= level < len(self._levels):
            raise IntelValidationError(f"Level {level} is not a positive behavior")
        return level - 1

    def __eq__(self, other):
        return isinstance(other, BehaviorScheme) and self.names == other.names

    def __hash__(self):
        return hash(tuple(self.names))

    def __repr__(self) -> str:
        return f"BehaviorScheme({self.names})"
