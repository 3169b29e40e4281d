"""
Dependency Injection Container
Wires repositories and use cases for one run configuration
"""
import logging
from pathlib import Path
from typing import Any, Callable, Dict, Optional, Type, TypeVar

from ...config.run_config import RunConfig
from ...config.settings import Settings, get_settings
from ...domain.exceptions import ConfigValidationError
from ...domain.repositories.idataset_repository import (
    IBasicListRepository, IInteractionLogRepository, ISessionRepository
)
from ...domain.repositories.imetrics_repository import IMetricsRepository
from ..repositories.basic_list_repository import JsonlBasicListRepository
from ..repositories.interaction_log_repository import CsvInteractionLogRepository
from ..repositories.metrics_repository import JsonMetricsRepository
from ..repositories.session_repository import JsonlSessionRepository

from ...application.use_cases.aggregate_metrics_use_case import AggregateMetricsUseCase
from ...application.use_cases.aggregate_rankings_use_case import AggregateRankingsUseCase
from ...application.use_cases.evaluate_use_case import EvaluateUseCase
from ...application.use_cases.generate_synthetic_use_case import GenerateSyntheticUseCase
from ...application.use_cases.ingest_sessions_use_case import IngestSessionsUseCase
from ...application.use_cases.predict_intents_use_case import PredictIntentsUseCase
from ...application.use_cases.train_ensemble_use_case import TrainEnsembleUseCase
from ...application.use_cases.verify_theorems_use_case import VerifyTheoremsUseCase

logger = logging.getLogger(__name__)

T = TypeVar('T')

DEFAULT_INTERACTIONS = "interactions.csv"
DEFAULT_BASIC_LISTS = "basic_lists.jsonl"


class ServiceContainer:
    """Dependency injection container"""

    def __init__(self, config: Optional[RunConfig] = None, settings: Optional[Settings] = None):
        self.config = config
        self.settings = settings or get_settings()
        self._factories: Dict[Type, Callable[[], Any]] = {}
        self._singletons: Dict[Type, Any] = {}
        self._register_services()

    def _register_services(self):
        """Register all repositories and use cases"""
        # Repositories
        self.register_factory(IInteractionLogRepository, self._create_interaction_log_repository)
        self.register_factory(IBasicListRepository, self._create_basic_list_repository)
        self.register_factory(ISessionRepository, self._create_session_repository)
        self.register_factory(IMetricsRepository, JsonMetricsRepository)

        # Use cases as transient
        self.register_factory(IngestSessionsUseCase, lambda: IngestSessionsUseCase(
            log_repo=self.resolve(IInteractionLogRepository),
            list_repo=self.resolve(IBasicListRepository),
            session_repo=self.resolve(ISessionRepository),
            num_workers=self.settings.runtime.num_workers,
        ))
        self.register_factory(GenerateSyntheticUseCase, lambda: GenerateSyntheticUseCase(
            log_repo=self.resolve(IInteractionLogRepository),
            list_repo=self.resolve(IBasicListRepository),
            session_repo=self.resolve(ISessionRepository),
            num_workers=self.settings.runtime.num_workers,
        ))
        self.register_factory(TrainEnsembleUseCase, lambda: TrainEnsembleUseCase(
            session_repo=self.resolve(ISessionRepository),
            runtime_settings=self.settings.runtime,
        ))
        self.register_factory(EvaluateUseCase, lambda: EvaluateUseCase(
            session_repo=self.resolve(ISessionRepository),
            metrics_repo=self.resolve(IMetricsRepository),
            runtime_settings=self.settings.runtime,
        ))
        self.register_factory(PredictIntentsUseCase, lambda: PredictIntentsUseCase(
            session_repo=self.resolve(ISessionRepository),
            runtime_settings=self.settings.runtime,
        ))
        self.register_factory(AggregateMetricsUseCase, lambda: AggregateMetricsUseCase(
            metrics_repo=self.resolve(IMetricsRepository),
        ))
        self.register_factory(AggregateRankingsUseCase, lambda: AggregateRankingsUseCase(
            session_repo=self.resolve(ISessionRepository),
            num_workers=self.settings.runtime.num_workers,
        ))
        self.register_factory(VerifyTheoremsUseCase, VerifyTheoremsUseCase)

    def register_factory(self, service_type: Type[T], factory: Callable[[], T]) -> None:
        """Register a factory function for a service"""
        self._factories[service_type] = factory
        logger.debug(f"Registered factory for {service_type.__name__}")

    def register_singleton(self, service_type: Type[T], instance: T) -> None:
        """Register a ready-made instance, e.g. an in-memory repository in tests"""
        self._singletons[service_type] = instance
        logger.debug(f"Registered singleton {service_type.__name__}")

    def resolve(self, service_type: Type[T]) -> T:
        """Resolve a service instance"""
        if service_type in self._singletons:
            return self._singletons[service_type]
        if service_type in self._factories:
            return self._factories[service_type]()
        raise ValueError(f"Service {service_type.__name__} not registered")

    # Factory methods for repositories

    def _require_config(self) -> RunConfig:
        if self.config is None:
            raise ConfigValidationError(["--config"], "this command needs a run configuration")
        return self.config

    def _data_dir(self) -> Path:
        return Path(self._require_config().data.sessions_path).parent

    def _create_interaction_log_repository(self) -> CsvInteractionLogRepository:
        config = self._require_config()
        path = config.data.interactions_path or self._data_dir() / DEFAULT_INTERACTIONS
        return CsvInteractionLogRepository(path, config.dataset.scheme)

    def _create_basic_list_repository(self) -> JsonlBasicListRepository:
        config = self._require_config()
        return JsonlBasicListRepository(config.data.basic_lists_path or self._data_dir() / DEFAULT_BASIC_LISTS)

    def _create_session_repository(self) -> JsonlSessionRepository:
        return JsonlSessionRepository(self._require_config().data.sessions_path)


def build_container(config: Optional[RunConfig] = None, settings: Optional[Settings] = None) -> ServiceContainer:
    """Create a container for one command invocation"""
    return ServiceContainer(config, settings)
