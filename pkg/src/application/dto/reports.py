"""
Application Layer Report DTOs
Results returned by the use cases and written next to their artifacts
"""
from pathlib import Path
from typing import Dict, List, Optional

from pydantic import BaseModel, Field


# ============== Data Pipeline ==============

class IngestResult(BaseModel):
    """Outcome of turning raw logs and basic lists into assembled sessions"""
    sessions_path: Path
    num_events: int
    num_events_kept: int
    num_sessions: int
    split_sizes: Dict[str, int]
    num_categories: int
    model_ids: List[str]
    boundaries: Dict[str, str] = Field(default_factory=dict)


class GenerationReport(BaseModel):
    """Synthetic dataset summary with the oracle check on the test split"""
    seed: int
    num_users: int
    num_interactions: int
    num_sessions: int
    num_test_sessions: int
    oracle_ndcg: float
    single_ndcg: Dict[str, float]
    oracle_beats_all: bool
    ingest: IngestResult


# ============== Training ==============

class EpochLog(BaseModel):
    """One line of train_log.jsonl"""
    epoch: int
    l_ens: float
    ambiguity: float
    l_int: float
    joint: float
    validation: Dict[str, float] = Field(default_factory=dict)


class TrainingResult(BaseModel):
    """Best checkpoint of one seed"""
    run_name: str
    seed: int
    epochs_run: int
    best_epoch: int
    best_metric: float
    stopped_early: bool
    checkpoint_path: Path
    log_path: Path


# ============== Evaluation ==============

class EvaluationResult(BaseModel):
    """Metrics written by one evaluate call, keyed by run name"""
    metrics_paths: Dict[str, Path] = Field(default_factory=dict)
    headline: Dict[str, float] = Field(default_factory=dict)
    simplex_rows_checked: int = 0


class IntentPredictionResult(BaseModel):
    """Predicted intents of one split"""
    intents_path: Path
    mode: str
    num_sessions: int
    intent_ndcg: float
    intent_macro_f1: float


# ============== Theorem Verification ==============

class TheoremSummary(BaseModel):
    """Outcome of one decomposition over all random instances"""
    name: str
    trials: int
    failures: int
    worst_slack: float
    tolerance: float
    counterexamples: List[str] = Field(default_factory=list)

    @property
    def holds(self) -> bool:
        return self.failures == 0


class TheoremReport(BaseModel):
    """report.json of verify-theorems"""
    seed: int
    trials: int
    delta_cap: float
    theorems: Dict[str, TheoremSummary]
    # (lambda, pair-wise slack, list-wise slack)
    spread_sweep: List[List[float]] = Field(default_factory=list)
    report_path: Optional[Path] = None

    @property
    def all_hold(self) -> bool:
        return all(summary.holds for summary in self.theorems.values())


class RankingResult(BaseModel):
    """Output of the rank aggregation command"""
    rankings_path: Path
    method: str
    num_sessions: int
