"""
Repository Implementations
File-backed implementations of domain repository interfaces
"""
from .basic_list_repository import JsonlBasicListRepository
from .interaction_log_repository import CsvInteractionLogRepository
from .metrics_repository import JsonMetricsRepository
from .session_repository import JsonlSessionRepository

__all__ = [
    'CsvInteractionLogRepository',
    'JsonlBasicListRepository',
    'JsonlSessionRepository',
    'JsonMetricsRepository'
]
