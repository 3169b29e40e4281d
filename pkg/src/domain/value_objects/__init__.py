"""
Domain Value Objects
Immutable score, weight, intent and metric containers
"""
from .behavior import BehaviorLevel, BehaviorScheme
from .basic_lists import BasicListSet, ScoredItem
from .intent import IntentDistribution, flat_intent_index
from .metrics import MetricSummary, MetricsReport
from .pairs import BprPairSet
from .scores import EnsembleScores, ScoreMatrix, WeightMatrix, ensemble_scores

__all__ = [
    'BehaviorLevel',
    'BehaviorScheme',
    'BasicListSet',
    'ScoredItem',
    'IntentDistribution',
    'flat_intent_index',
    'MetricSummary',
    'MetricsReport',
    'BprPairSet',
    'EnsembleScores',
    'ScoreMatrix',
    'WeightMatrix',
    'ensemble_scores'
]
