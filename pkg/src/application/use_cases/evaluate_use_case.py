"""
Evaluate Use Case
Ranks the evaluation sessions with trained checkpoints or unsupervised
baselines and writes metrics.json through one shared metric path
"""
import logging
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

from ..dto.reports import EvaluationResult
from ..dto.requests import EvaluateRequest
from ..services.model_runtime import EnsembleRuntime, configure_determinism
from .train_ensemble_use_case import checkpoint_path
from ...config.run_config import RunConfig
from ...config.settings import RuntimeSettings
from ...domain.entities.dataset import SessionDataset
from ...domain.entities.session import SessionSample
from ...domain.exceptions import IntelValidationError
from ...domain.repositories.idataset_repository import ISessionRepository
from ...domain.repositories.imetrics_repository import IMetricsRepository
from ...domain.services.history_builder import build_history_windows
from ...domain.services.rank_aggregation import AggregationMethod, aggregate_session, parse_method
from ...domain.services.ranking_metrics import HEADLINE_METRIC, aggregate_seeds, evaluate_run
from ...domain.value_objects.metrics import MetricsReport
from ...infrastructure.checkpoints.checkpoint_store import load_checkpoint

logger = logging.getLogger(__name__)


def baseline_name(baseline: str, model_ids: Sequence[str]) -> str:
    """'single:1' -> 'Single-<model id>', 'borda' -> 'Borda', 'rra' -> 'RRA'"""
    method, k = parse_method(baseline)
    if method == AggregationMethod.SINGLE:
        if not 0 <= k < len(model_ids):
            raise IntelValidationError(f"Model index {k} outside [0, {len(model_ids)})")
        return f"Single-{model_ids[k]}"
    return "Borda" if method == AggregationMethod.BORDA else "RRA"


class EvaluateUseCase:
    """Evaluates learned ensembles and baselines on one split"""

    def __init__(
        self,
        session_repo: ISessionRepository,
        metrics_repo: IMetricsRepository,
        runtime_settings: Optional[RuntimeSettings] = None
    ):
        self.session_repo = session_repo
        self.metrics_repo = metrics_repo
        self.settings = runtime_settings or RuntimeSettings()

    def execute(self, config: RunConfig, request: Optional[EvaluateRequest] = None) -> EvaluationResult:
        request = request or EvaluateRequest()
        dataset = self.session_repo.load()
        samples = dataset.split(request.split)
        result = EvaluationResult()

        for baseline in request.baselines:
            report = self.evaluate_baseline(config, dataset, samples, baseline)
            path = self.metrics_repo.save(report, Path(config.output.dir) / report.name)
            result.metrics_paths[report.name] = path
            result.headline[report.name] = report.mean(HEADLINE_METRIC)

        if not request.skip_model:
            report, path, rows = self.evaluate_model(config, dataset, samples, request.checkpoint)
            result.metrics_paths[report.name] = path
            result.headline[report.name] = report.mean(HEADLINE_METRIC)
            result.simplex_rows_checked = rows

        for name, value in result.headline.items():
            logger.info(f"{name}: {HEADLINE_METRIC}={value:.4f}")
        return result

    def _metrics(
        self,
        config: RunConfig,
        dataset: SessionDataset,
        samples: List[SessionSample],
        rankings,
        predicted_intents=None,
        name: Optional[str] = None
    ) -> MetricsReport:
        return evaluate_run(
            rankings,
            samples,
            dataset.scheme,
            objectives=config.evaluation.objectives,
            ks=config.evaluation.ks,
            relevance_mode=config.evaluation.relevance_mode,
            predicted_intents=predicted_intents or None,
            intent_threshold=config.evaluation.intent_f1_threshold,
            num_workers=self.settings.num_workers,
            name=name,
        )

    def evaluate_baseline(
        self,
        config: RunConfig,
        dataset: SessionDataset,
        samples: List[SessionSample],
        baseline: str
    ) -> MetricsReport:
        method, k = parse_method(baseline)
        name = baseline_name(baseline, dataset.model_ids)
        rankings = {s.session_id: aggregate_session(s, method, k) for s in samples}
        return self._metrics(config, dataset, samples, rankings, name=name)

    def evaluate_model(
        self,
        config: RunConfig,
        dataset: SessionDataset,
        samples: List[SessionSample],
        checkpoint: Optional[Path] = None
    ) -> Tuple[MetricsReport, Path, int]:
        """Per-seed reports and their aggregate; a single explicit checkpoint skips aggregation"""
        windows = build_history_windows(
            dataset.samples, dataset.scheme, config.dataset.history_sessions, config.dataset.history_items
        )
        targets = [Path(checkpoint)] if checkpoint else [
            checkpoint_path(config, seed) for seed in config.training.seeds
        ]

        reports: List[MetricsReport] = []
        rows = 0
        paths: List[Path] = []
        for path in targets:
            archive = load_checkpoint(path, expected_fingerprint=config.fingerprint())
            configure_determinism(int(archive.get("seed", 0)), self.settings.deterministic)
            runtime = EnsembleRuntime(config, dataset, windows, self.settings.device)
            runtime.load_state_dicts(archive)
            ranking = runtime.rank(samples)
            runtime.require_simplex(ranking, f"evaluation of {path}")
            rows += ranking.weight_rows

            report = self._metrics(
                config, dataset, samples, ranking.rankings, ranking.predicted_intents, name=config.run_name
            )
            reports.append(report)
            paths.append(self.metrics_repo.save(report, path.parent))

        if len(reports) == 1 and checkpoint:
            return reports[0], paths[0], rows
        aggregated = aggregate_seeds(reports, name=config.run_name)
        return aggregated, self.metrics_repo.save(aggregated, config.output_dir), rows
