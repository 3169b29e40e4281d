"""
Metrics Repository Interface
Domain layer contract for persisted metric reports
"""
from abc import ABC, abstractmethod
from pathlib import Path

from ..value_objects.metrics import MetricsReport


class IMetricsRepository(ABC):
    """Metric reports addressed by path"""

    @abstractmethod
    def save(self, report: MetricsReport, path: Path) -> Path:
        """Persist a report, returning the written path"""
        pass

    @abstractmethod
    def load(self, path: Path) -> MetricsReport:
        """Load a report from a file or a run directory"""
        pass
