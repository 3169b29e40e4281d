"""
Metrics Value Objects
Run-level metric summaries as written to metrics.json
"""
from dataclasses import dataclass, field
from typing import Dict, List, Optional


@dataclass
class MetricSummary:
    """Mean over sessions (or seeds) of one metric"""
    mean: float
    std: float = 0.0
    n_sessions: int = 0
    per_seed: List[float] = field(default_factory=list)

    def to_dict(self) -> Dict:
        return {
            "mean": self.mean,
            "std": self.std,
            "n_sessions": self.n_sessions,
            "per_seed": list(self.per_seed),
        }

    @classmethod
    def from_dict(cls, data: Dict) -> 'MetricSummary':
        return cls(
            mean=float(data["mean"]),
            std=float(data.get("std", 0.0)),
            n_sessions=int(data.get("n_sessions", 0)),
            per_seed=[float(v) for v in data.get("per_seed", [])],
        )


@dataclass
class MetricsReport:
    """metric name -> summary, e.g. All-NDCG@3, Click-NDCG@10, Intent-MacroF1"""
    metrics: Dict[str, MetricSummary] = field(default_factory=dict)
    name: Optional[str] = None

    def __contains__(self, metric: str) -> bool:
        return metric in self.metrics

    def __getitem__(self, metric: str) -> MetricSummary:
        return self.metrics[metric]

    def mean(self, metric: str) -> float:
        return self.metrics[metric].mean

    @property
    def metric_names(self) -> List[str]:
        return list(self.metrics)

    def to_dict(self) -> Dict[str, Dict]:
        return {name: summary.to_dict() for name, summary in self.metrics.items()}

    @classmethod
    def from_dict(cls, data: Dict[str, Dict], name: Optional[str] = None) -> 'MetricsReport':
        return cls({metric: MetricSummary.from_dict(v) for metric, v in data.items()}, name=name)
