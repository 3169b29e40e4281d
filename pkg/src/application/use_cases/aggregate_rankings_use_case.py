"""
Aggregate Rankings Use Case
Ranks every session with a single basic list, Borda count or RRA and writes
rankings.jsonl (item ids best first)
"""
import json
import logging
from concurrent.futures import ThreadPoolExecutor

from ..dto.reports import RankingResult
from ..dto.requests import AggregateRankingsRequest
from ...domain.repositories.idataset_repository import ISessionRepository
from ...domain.services.rank_aggregation import aggregate_session, parse_method

logger = logging.getLogger(__name__)


class AggregateRankingsUseCase:
    """Unsupervised rank aggregation over assembled sessions"""

    def __init__(self, session_repo: ISessionRepository, num_workers: int = 1):
        self.session_repo = session_repo
        self.num_workers = num_workers

    def execute(self, request: AggregateRankingsRequest) -> RankingResult:
        method, k = parse_method(request.method)
        dataset = self.session_repo.load()
        samples = dataset.split(request.split) if request.split else dataset.samples
        samples = sorted(samples, key=lambda s: s.session_id)

        def rank(sample):
            order = aggregate_session(sample, method, k)
            return [sample.item_ids[n] for n in order]

        with ThreadPoolExecutor(max_workers=self.num_workers) as executor:
            rankings = list(executor.map(rank, samples))

        request.output.parent.mkdir(parents=True, exist_ok=True)
        with open(request.output, "w", encoding="utf-8", newline="\n") as f:
            for sample, ranking in zip(samples, rankings):
                f.write(json.dumps({"session_id": sample.session_id, "ranking": ranking}) + "\n")

        logger.info(f"Ranked {len(samples)} sessions with {request.method} -> {request.output}")
        return RankingResult(rankings_path=request.output, method=request.method, num_sessions=len(samples))
