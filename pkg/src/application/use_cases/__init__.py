"""
Application Use Cases
Data pipeline, training, evaluation and verification entry points
"""
from .ingest_sessions_use_case import IngestSessionsUseCase
from .generate_synthetic_use_case import GenerateSyntheticUseCase
from .train_ensemble_use_case import TrainEnsembleUseCase
from .evaluate_use_case import EvaluateUseCase
from .aggregate_metrics_use_case import AggregateMetricsUseCase
from .aggregate_rankings_use_case import AggregateRankingsUseCase
from .verify_theorems_use_case import VerifyTheoremsUseCase
from .predict_intents_use_case import PredictIntentsUseCase

__all__ = [
    'IngestSessionsUseCase',
    'GenerateSyntheticUseCase',
    'TrainEnsembleUseCase',
    'EvaluateUseCase',
    'AggregateMetricsUseCase',
    'AggregateRankingsUseCase',
    'VerifyTheoremsUseCase',
    'PredictIntentsUseCase'
]
