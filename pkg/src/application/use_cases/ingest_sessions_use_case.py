"""
Ingest Sessions Use Case
Raw interaction log + basic lists -> assembled, split sessions on disk
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Tuple

import pandas as pd

from ..dto.reports import IngestResult
from ...config.run_config import RunConfig
from ...domain.entities.dataset import SessionDataset
from ...domain.entities.session import SessionRecord, SessionSample
from ...domain.exceptions import EmptySessionError, IntelValidationError, OutOfVocabularyError
from ...domain.repositories.idataset_repository import (
    IBasicListRepository, IInteractionLogRepository, ISessionRepository
)
from ...domain.services.candidate_assembler import assemble_session_sample, item_catalog
from ...domain.services.session_builder import (
    SessionRule, build_sessions, filter_min_positive, merge_rare_categories
)
from ...domain.services.temporal_splitter import temporal_split
from ...domain.value_objects.basic_lists import BasicListSet

logger = logging.getLogger(__name__)


class IngestSessionsUseCase:
    """Runs the data pipeline end to end"""

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
        self.num_workers = num_workers

    def execute(self, config: RunConfig) -> IngestResult:
        """Read both inputs, build the dataset and persist it"""
        events = self.log_repo.load()
        lists = self.list_repo.load()
        dataset, kept = self.build_dataset(events, lists, config)
        self.session_repo.save(dataset)
        return self.summarize(config, dataset, len(events), kept)

    def build_dataset(
        self,
        events: pd.DataFrame,
        lists: BasicListSet,
        config: RunConfig
    ) -> Tuple[SessionDataset, int]:
        """(dataset, number of events surviving the positive-count filter)"""
        data = config.data
        merged = merge_rare_categories(events, data.min_category_items)
        catalog = item_catalog(merged)
        num_categories = self._num_categories(config, merged)

        filtered = filter_min_positive(merged, data.min_positive)
        sessions = build_sessions(filtered, SessionRule(data.session_rule), data.timezone)
        if not sessions:
            raise EmptySessionError("No session with a positive interaction survived filtering")

        model_ids = tuple(config.dataset.model_ids or lists.model_ids)
        if not model_ids:
            raise IntelValidationError("No basic model lists found")
        samples = self._assemble(sessions, lists, model_ids, catalog, config, num_categories)

        split = temporal_split(samples, data.test_days, data.validation_days, data.timezone)
        splits: Dict[str, str] = {}
        for name in ("train", "validation", "test"):
            for sample in getattr(split, name):
                splits[sample.session_id] = name

        dataset = SessionDataset(
            samples=samples,
            scheme=config.dataset.scheme,
            num_categories=num_categories,
            model_ids=model_ids,
            splits=splits,
            boundaries=split.boundaries or {},
            context_extra_dim=config.dataset.context_extra_dim,
        )
        return dataset, len(filtered)

    def _assemble(
        self,
        sessions: List[SessionRecord],
        lists: BasicListSet,
        model_ids: Tuple[str, ...],
        catalog: Dict[str, int],
        config: RunConfig,
        num_categories: int
    ) -> List[SessionSample]:
        scheme = config.dataset.scheme

        def assemble(session: SessionRecord) -> SessionSample:
            return assemble_session_sample(
                session, lists, model_ids, catalog, scheme, num_categories, config.data.top_m
            )

        if self.num_workers > 1:
            logger.info(f"Assembling {len(sessions)} sessions with {self.num_workers} workers")
            with ThreadPoolExecutor(max_workers=self.num_workers) as executor:
                samples = list(executor.map(assemble, sessions))
        else:
            samples = [assemble(s) for s in sessions]
        samples.sort(key=lambda s: s.session_id)
        return samples

    @staticmethod
    def _num_categories(config: RunConfig, events: pd.DataFrame) -> int:
        observed = int(events["category_id"].max()) + 1 if len(events) else 0
        configured = config.dataset.num_categories
        if configured is None:
            return max(observed, 1)
        if observed > configured:
            raise OutOfVocabularyError(
                f"Data has {observed} categories after merging, configuration allows {configured}"
            )
        return configured

    def summarize(self, config: RunConfig, dataset: SessionDataset, num_events: int, kept: int) -> IngestResult:
        sizes = {name: 0 for name in ("train", "validation", "test")}
        for name in dataset.splits.values():
            sizes[name] += 1
        logger.info(
            f"Ingested {len(dataset.samples)} sessions ({sizes}) with {dataset.num_categories} categories "
            f"and models {list(dataset.model_ids)}"
        )
        return IngestResult(
            sessions_path=config.data.sessions_path,
            num_events=num_events,
            num_events_kept=kept,
            num_sessions=len(dataset.samples),
            split_sizes=sizes,
            num_categories=dataset.num_categories,
            model_ids=list(dataset.model_ids),
            boundaries=dict(dataset.boundaries),
        )
