"""
Session Dataset Entity
Assembled sessions with their split labels and dataset dimensions
"""
from dataclasses import dataclass, field
from typing import Dict, List, Tuple

from ..exceptions import EmptySplitError, IntelValidationError
from ..value_objects.behavior import BehaviorScheme
from .session import SessionSample

SPLIT_NAMES = ("train", "validation", "test")


@dataclass
class SessionDataset:
    """Output of the data pipeline, ordered by session_id"""
    samples: List[SessionSample]
    scheme: BehaviorScheme
    num_categories: int
    model_ids: Tuple[str, ...]
    splits: Dict[str, str] = field(default_factory=dict)
    boundaries: Dict[str, str] = field(default_factory=dict)
    context_extra_dim: int = 0

    def __post_init__(self):
        unknown = set(self.splits.values()) - set(SPLIT_NAMES)
        if unknown:
            raise IntelValidationError(f"Unknown split labels: {sorted(unknown)}")

    @property
    def intent_dim(self) -> int:
        """|B| * |I|"""
        return self.scheme.num_behaviors * self.num_categories

    @property
    def num_models(self) -> int:
        return len(self.model_ids)

    def split(self, name: str) -> List[SessionSample]:
        if name not in SPLIT_NAMES:
            raise IntelValidationError(f"Unknown split '{name}'")
        selected = [s for s in self.samples if self.splits.get(s.session_id) == name]
        if not selected:
            raise EmptySplitError(f"The {name} split is empty")
        return selected

    def metadata(self) -> Dict:
        return {
            "behaviors": self.scheme.names,
            "num_categories": self.num_categories,
            "model_ids": list(self.model_ids),
            "context_extra_dim": self.context_extra_dim,
            "boundaries": dict(self.boundaries),
            "num_sessions": len(self.samples),
        }
