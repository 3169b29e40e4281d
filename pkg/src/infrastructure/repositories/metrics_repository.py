"""
Metrics Repository
metrics.json is a flat map of metric name -> {mean, std, n_sessions, per_seed}
"""
import json
import logging
from pathlib import Path

from ...domain.exceptions import IntelValidationError
from ...domain.repositories.imetrics_repository import IMetricsRepository
from ...domain.value_objects.metrics import MetricsReport

logger = logging.getLogger(__name__)

METRICS_NAME = "metrics.json"


class JsonMetricsRepository(IMetricsRepository):
    """JSON storage of metric reports"""

    def save(self, report: MetricsReport, path: Path) -> Path:
        path = Path(path)
        if path.suffix != ".json":
            path = path / METRICS_NAME
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            json.dump(report.to_dict(), f, indent=2)
            f.write("\n")
        logger.info(f"Wrote {len(report.metric_names)} metrics for {report.name or path.parent.name} to {path}")
        return path

    def load(self, path: Path) -> MetricsReport:
        path = Path(path)
        if path.is_dir():
            path = path / METRICS_NAME
        if not path.exists():
            raise IntelValidationError(f"Metrics file not found: {path}")
        try:
            with open(path, "r", encoding="utf-8") as f:
                data = json.load(f)
            return MetricsReport.from_dict(data, name=path.parent.name)
        except (KeyError, TypeError, ValueError) as e:
            raise IntelValidationError(f"Malformed metrics file {path}: {e}") from e
