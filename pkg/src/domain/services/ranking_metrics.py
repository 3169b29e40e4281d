"""
Ranking Metrics Service
Multi-level and per-objective NDCG@K, intent prediction metrics and
run-level aggregation
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Mapping, Optional, Sequence

import numpy as np
from sklearn.metrics import f1_score

from ..entities.session import GroundTruth, SessionSample
from ..exceptions import IntelValidationError, MissingSessionRankingError, ShapeMismatchError
from ..value_objects.behavior import BehaviorScheme
from ..value_objects.intent import IntentDistribution
from ..value_objects.metrics import MetricsReport, MetricSummary

logger = logging.getLogger(__name__)

DEFAULT_CUTOFFS = (3, 5, 10)
ALL_OBJECTIVE = "all"
INTENT_NDCG_CUTOFF = 10
INTENT_NDCG = f"Intent-NDCG@{INTENT_NDCG_CUTOFF}"
INTENT_MACRO_F1 = "Intent-MacroF1"
HEADLINE_METRIC = "All-NDCG@3"


def _dcg(gains: np.ndarray) -> float:
    discounts = np.log2(np.arange(2, gains.size + 2))
    return float(np.sum(gains / discounts))


def ndcg_at_k(ranking: Sequence[int], relevance: Sequence[float], k: int) -> float:
    """
    DCG@k / IDCG@k with gain 2^r - 1 and discount log2(p + 1).
    All-zero relevance gives 0.
    """
    if k < 1:
        raise IntelValidationError(f"k must be >= 1, got {k}")
    relevance = np.asarray(relevance, dtype=np.float64)
    ranking = np.asarray(ranking, dtype=np.int64)
    if np.any(relevance < 0):
        raise IntelValidationError("Relevance must be non-negative")
    if ranking.size != relevance.size:
        raise ShapeMismatchError(f"Ranking covers {ranking.size} items, relevance has {relevance.size}")

    gains = np.power(2.0, relevance) - 1.0
    ideal = _dcg(np.sort(gains)[::-1][:k])
    if ideal <= 0.0:
        return 0.0
    return _dcg(gains[ranking][:k]) / ideal


def per_objective_relevance(
    levels: np.ndarray,
    objective: str,
    scheme: BehaviorScheme,
    mode: str = "threshold"
) -> np.ndarray:
    """
    objective 'all' -> numeric levels; a behavior name -> 1 where the item
    reached that behavior (threshold mode: level >= its level, exact mode:
    level == its level), else 0.
    """
    if isinstance(levels, GroundTruth):
        levels = levels.levels
    levels = np.asarray(levels, dtype=np.int64)
    if objective.lower() == ALL_OBJECTIVE:
        return levels.astype(np.float64)
    target = scheme.from_name(objective).level
    if mode == "threshold":
        return (levels >= target).astype(np.float64)
    if mode == "exact":
        return (levels == target).astype(np.float64)
    raise IntelValidationError(f"Unknown relevance mode: {mode}")


def _intent_arrays(true_intent, predicted_intent):
    true_probs = true_intent.probs if isinstance(true_intent, IntentDistribution) else np.asarray(true_intent, float)
    pred_probs = (
        predicted_intent.probs if isinstance(predicted_intent, IntentDistribution)
        else np.asarray(predicted_intent, float)
    )
    if true_probs.shape != pred_probs.shape:
        raise ShapeMismatchError(f"Intent dimension mismatch: {true_probs.shape} vs {pred_probs.shape}")
    return true_probs, pred_probs


def intent_ndcg(true_intent, predicted_intent, k: int = INTENT_NDCG_CUTOFF) -> float:
    """True probabilities as relevance over cells ranked by predicted probability"""
    true_probs, pred_probs = _intent_arrays(true_intent, predicted_intent)
    ranking = sorted(range(pred_probs.size), key=lambda i: (-pred_probs[i], i))
    return ndcg_at_k(ranking, true_probs, k)


def intent_macro_f1(true_intent, predicted_intent, threshold: Optional[float] = None) -> float:
    """
    Binarize both distributions at threshold (default 1 / (2 * dim)) and
    average per-cell F1 over cells with any support on either side.
    """
    true_probs, pred_probs = _intent_arrays(true_intent, predicted_intent)
    if threshold is None:
        threshold = 1.0 / (2.0 * true_probs.size)
    true_bin = (true_probs >= threshold).astype(int).reshape(1, -1)
    pred_bin = (pred_probs >= threshold).astype(int).reshape(1, -1)
    support = np.flatnonzero(true_bin[0] | pred_bin[0])
    if support.size == 0:
        return 1.0
    return float(f1_score(true_bin, pred_bin, labels=support, average="macro", zero_division=0))


def intent_metrics(true_intent, predicted_intent, mode: str, threshold: Optional[float] = None) -> float:
    """mode: 'macro_f1' or 'ndcg@10'"""
    if mode == "macro_f1":
        return intent_macro_f1(true_intent, predicted_intent, threshold)
    if mode.startswith("ndcg@"):
        return intent_ndcg(true_intent, predicted_intent, int(mode.split("@", 1)[1]))
    raise IntelValidationError(f"Unknown intent metric mode: {mode}")


def metric_name(objective: str, k: int, scheme: BehaviorScheme) -> str:
    if objective.lower() == ALL_OBJECTIVE:
        return f"All-NDCG@{k}"
    return f"{scheme.from_name(objective).display_name}-NDCG@{k}"


def default_objectives(scheme: BehaviorScheme) -> List[str]:
    return [ALL_OBJECTIVE] + [b.name for b in scheme.positive_behaviors]


def _session_metrics(
    sample: SessionSample,
    ranking: Sequence[int],
    scheme: BehaviorScheme,
    objectives: Sequence[str],
    ks: Sequence[int],
    relevance_mode: str,
    predicted_intent: Optional[IntentDistribution],
    intent_threshold: Optional[float]
) -> Dict[str, float]:
    values = {}
    for objective in objectives:
        relevance = per_objective_relevance(sample.ground_truth.levels, objective, scheme, relevance_mode)
        for k in ks:
            values[metric_name(objective, k, scheme)] = ndcg_at_k(ranking, relevance, k)
    if predicted_intent is not None:
        values[INTENT_NDCG] = intent_ndcg(sample.intent, predicted_intent)
        values[INTENT_MACRO_F1] = intent_macro_f1(sample.intent, predicted_intent, intent_threshold)
    return values


def evaluate_run(
    rankings: Mapping[str, Sequence[int]],
    samples: Sequence[SessionSample],
    scheme: BehaviorScheme,
    objectives: Optional[Sequence[str]] = None,
    ks: Sequence[int] = DEFAULT_CUTOFFS,
    relevance_mode: str = "threshold",
    predicted_intents: Optional[Mapping[str, IntentDistribution]] = None,
    intent_threshold: Optional[float] = None,
    num_workers: int = 1,
    name: Optional[str] = None
) -> MetricsReport:
    """Session-level metrics averaged uniformly over sessions"""
    missing = [s.session_id for s in samples if s.session_id not in rankings]
    if missing:
        raise MissingSessionRankingError(missing)
    if not samples:
        raise IntelValidationError("No sessions to evaluate")
    objectives = list(objectives) if objectives else default_objectives(scheme)

    def evaluate_one(sample: SessionSample) -> Dict[str, float]:
        intent = predicted_intents.get(sample.session_id) if predicted_intents else None
        return _session_metrics(
            sample, rankings[sample.session_id], scheme, objectives, ks,
            relevance_mode, intent, intent_threshold,
        )

    if num_workers > 1:
        with ThreadPoolExecutor(max_workers=num_workers) as executor:
            per_session = list(executor.map(evaluate_one, samples))
    else:
        per_session = [evaluate_one(s) for s in samples]

    report = MetricsReport(name=name)
    for metric in per_session[0]:
        values = [session[metric] for session in per_session if metric in session]
        report.metrics[metric] = MetricSummary(
            mean=float(np.mean(values)),
            std=0.0,
            n_sessions=len(values),
            per_seed=[],
        )
    if HEADLINE_METRIC in report:
        logger.info(f"Evaluated {len(samples)} sessions: {HEADLINE_METRIC}={report.mean(HEADLINE_METRIC):.4f}")
    return report


def aggregate_seeds(reports: Sequence[MetricsReport], name: Optional[str] = None) -> MetricsReport:
    """Mean and population std of every metric over per-seed reports"""
    if not reports:
        raise IntelValidationError("No reports to aggregate")
    aggregated = MetricsReport(name=name or reports[0].name)
    for metric in reports[0].metric_names:
        per_seed = [r.mean(metric) for r in reports]
        aggregated.metrics[metric] = MetricSummary(
            mean=float(np.mean(per_seed)),
            std=float(np.std(per_seed)),
            n_sessions=reports[0][metric].n_sessions,
            per_seed=per_seed,
        )
    return aggregated
