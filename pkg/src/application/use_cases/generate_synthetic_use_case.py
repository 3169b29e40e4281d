"""
Generate Synthetic Use Case
Writes a synthetic interaction log and basic lists, runs the data pipeline
on them and checks that per-item oracle weights beat every single scorer
"""
import json
import logging
from pathlib import Path
from typing import Dict, List

import numpy as np

from ..dto.reports import GenerationReport
from .ingest_sessions_use_case import IngestSessionsUseCase
from ...config.run_config import RunConfig
from ...domain.entities.session import SessionSample
from ...domain.repositories.idataset_repository import (
    IBasicListRepository, IInteractionLogRepository, ISessionRepository
)
from ...domain.services.rank_aggregation import rank_by_scores, single_model
from ...domain.services.ranking_metrics import HEADLINE_METRIC, evaluate_run
from ...infrastructure.synthetic.generator import SyntheticDataset, SyntheticGenerator

logger = logging.getLogger(__name__)

REPORT_NAME = "generation_report.json"


class GenerateSyntheticUseCase:
    """Synthetic dataset generation plus the oracle sanity check"""

    def __init__(
        self,
        log_repo: IInteractionLogRepository,
        list_repo: IBasicListRepository,
        session_repo: ISessionRepository,
        num_workers: int = 1
    ):
        self.log_repo = log_repo
        self.list_repo = list_repo
        self.session_repo = session_repo
        self.ingest = IngestSessionsUseCase(log_repo, list_repo, session_repo, num_workers)
        self.num_workers = num_workers

    def execute(self, config: RunConfig) -> GenerationReport:
        generator = SyntheticGenerator(config.synthetic, config.dataset.scheme, config.data.timezone)
        synthetic = generator.generate()

        self.log_repo.save(synthetic.events)
        self.list_repo.save(synthetic.lists)
        dataset, kept = self.ingest.build_dataset(synthetic.events, synthetic.lists, config)
        self.session_repo.save(dataset)
        ingest_result = self.ingest.summarize(config, dataset, len(synthetic.events), kept)

        test = dataset.split("test")
        oracle, singles = self.oracle_check(test, synthetic, config)
        beats_all = all(oracle > value for value in singles.values())
        if not beats_all:
            logger.warning(
                f"Oracle {HEADLINE_METRIC}={oracle:.4f} does not beat every single scorer: {singles}"
            )

        report = GenerationReport(
            seed=config.synthetic.seed,
            num_users=config.synthetic.num_users,
            num_interactions=int((synthetic.events["level"] >= 1).sum()),
            num_sessions=len(dataset.samples),
            num_test_sessions=len(test),
            oracle_ndcg=oracle,
            single_ndcg=singles,
            oracle_beats_all=beats_all,
            ingest=ingest_result,
        )
        path = Path(config.data.sessions_path).parent / REPORT_NAME
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            json.dump(report.model_dump(mode="json"), f, indent=2, sort_keys=True)
        logger.info(f"Oracle {HEADLINE_METRIC}={oracle:.4f}, single scorers {singles}; report at {path}")
        return report

    def oracle_check(
        self,
        samples: List[SessionSample],
        synthetic: SyntheticDataset,
        config: RunConfig
    ):
        """(oracle All-NDCG@3, {model_id: All-NDCG@3}) over the given sessions"""
        scheme = config.dataset.scheme
        model_ids = list(samples[0].scores.model_ids)
        behavior_of_model = dict(zip(synthetic.model_ids, synthetic.scorer_behaviors))

        oracle_rankings: Dict[str, np.ndarray] = {}
        single_rankings: Dict[str, Dict[str, np.ndarray]] = {m: {} for m in model_ids}
        for sample in samples:
            oracle_rankings[sample.session_id] = rank_by_scores(
                self._oracle_scores(sample, synthetic, model_ids, behavior_of_model), sample.item_ids
            )
            for k, model_id in enumerate(model_ids):
                single_rankings[model_id][sample.session_id] = single_model(sample.scores, k, sample.item_ids)

        def headline(rankings):
            report = evaluate_run(
                rankings, samples, scheme, objectives=["all"], ks=[3],
                relevance_mode=config.evaluation.relevance_mode, num_workers=self.num_workers,
            )
            return report.mean(HEADLINE_METRIC)

        singles = {model_id: headline(single_rankings[model_id]) for model_id in model_ids}
        return headline(oracle_rankings), singles

    @staticmethod
    def _oracle_scores(sample, synthetic, model_ids, behavior_of_model) -> np.ndarray:
        """Per item, the score of the scorer that targets the item's driving behavior"""
        values = sample.scores.values
        scores = values.mean(axis=1)
        for n, item_id in enumerate(sample.item_ids):
            driving = synthetic.driving_behavior.get((sample.session_id, item_id))
            matching = [k for k, m in enumerate(model_ids) if behavior_of_model.get(m) == driving]
            if matching:
                scores[n] = values[n, matching].mean()
        return scores
