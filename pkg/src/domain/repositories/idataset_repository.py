"""
Dataset Repository Interfaces
Domain layer contracts for interaction logs, basic lists and assembled sessions
"""
from abc import ABC, abstractmethod

import pandas as pd

from ..entities.dataset import SessionDataset
from ..value_objects.basic_lists import BasicListSet


class IInteractionLogRepository(ABC):
    """Raw interaction log storage"""

    @abstractmethod
    def load(self) -> pd.DataFrame:
        """Events with the canonical event columns"""
        pass

    @abstractmethod
    def save(self, events: pd.DataFrame) -> None:
        """Persist events"""
        pass


class IBasicListRepository(ABC):
    """Pre-generated basic-model lists"""

    @abstractmethod
    def load(self) -> BasicListSet:
        pass

    @abstractmethod
    def save(self, lists: BasicListSet) -> None:
        pass


class ISessionRepository(ABC):
    """Assembled sessions produced by the data pipeline"""

    @abstractmethod
    def load(self) -> SessionDataset:
        pass

    @abstractmethod
    def save(self, dataset: SessionDataset) -> None:
        pass

    @abstractmethod
    def exists(self) -> bool:
        pass
