"""
Basic List Value Objects
Pre-generated ranked lists of each single-behavior-objective basic model
"""
import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Tuple

from ..exceptions import IntelValidationError, MissingBasicListError


@dataclass(frozen=True)
class ScoredItem:
    """An item and the score a basic model assigned to it"""
    item_id: str
    score: float


@dataclass
class BasicListSet:
    """
    Lists keyed by (session_id, model_id), each ordered by rank.
    Scores must be finite and items unique per list.
    """
    model_ids: Tuple[str, ...]
    lists: Dict[Tuple[str, str], List[ScoredItem]] = field(default_factory=dict)

    def add(self, session_id: str, model_id: str, items: Iterable[ScoredItem]) -> None:
        items = list(items)
        seen = set()
        for item in items:
            if not math.isfinite(item.score):
                raise IntelValidationError(
                    f"Non-finite score for item {item.item_id} in ({session_id}, {model_id})"
                )
            if item.item_id in seen:
                raise IntelValidationError(
                    f"Duplicate item {item.item_id} in ({session_id}, {model_id})"
                )
            seen.add(item.item_id)
        if model_id not in self.model_ids:
            self.model_ids = tuple(self.model_ids) + (model_id,)
        self.lists[(session_id, model_id)] = items

    def get(self, session_id: str, model_id: str) -> List[ScoredItem]:
        key = (session_id, model_id)
        if key not in self.lists:
            raise MissingBasicListError(session_id, model_id)
        return self.lists[key]

    def find(self, session_id: str, model_id: str) -> Optional[List[ScoredItem]]:
        return self.lists.get((session_id, model_id))

    @property
    def session_ids(self) -> List[str]:
        return sorted({session_id for session_id, _ in self.lists})
