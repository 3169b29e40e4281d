"""
Aggregate Metrics Use Case
Mean and standard deviation over per-seed metric reports
"""
import logging
from typing import List

import pandas as pd

from ..dto.requests import AggregateRequest
from ...domain.repositories.imetrics_repository import IMetricsRepository
from ...domain.services.ranking_metrics import HEADLINE_METRIC, aggregate_seeds
from ...domain.value_objects.metrics import MetricsReport

logger = logging.getLogger(__name__)


def comparison_table(reports: List[MetricsReport]) -> pd.DataFrame:
    """One row per report, one column per metric mean"""
    rows = []
    for report in reports:
        row = {"run": report.name}
        row.update({metric: report.mean(metric) for metric in report.metric_names})
        rows.append(row)
    return pd.DataFrame(rows).set_index("run")


class AggregateMetricsUseCase:
    """Combines metrics.json files of several seeds (or runs)"""

    def __init__(self, metrics_repo: IMetricsRepository):
        self.metrics_repo = metrics_repo

    def execute(self, request: AggregateRequest) -> MetricsReport:
        reports = [self.metrics_repo.load(path) for path in request.inputs]
        aggregated = aggregate_seeds(reports, name=request.name or request.output.parent.name)
        self.metrics_repo.save(aggregated, request.output)

        if request.comparison is not None:
            request.comparison.parent.mkdir(parents=True, exist_ok=True)
            comparison_table(reports).to_csv(request.comparison, float_format="%.6f", lineterminator="\n")
            logger.info(f"Wrote comparison of {len(reports)} reports to {request.comparison}")

        if HEADLINE_METRIC in aggregated:
            summary = aggregated[HEADLINE_METRIC]
            logger.info(
                f"Aggregated {len(reports)} reports: {HEADLINE_METRIC}={summary.mean:.4f} +/- {summary.std:.4f}"
            )
        return aggregated
