"""
Domain Repositories
Repository interfaces for datasets and metric reports
"""
from .idataset_repository import IBasicListRepository, IInteractionLogRepository, ISessionRepository
from .imetrics_repository import IMetricsRepository

__all__ = [
    'IInteractionLogRepository',
    'IBasicListRepository',
    'ISessionRepository',
    'IMetricsRepository'
]
