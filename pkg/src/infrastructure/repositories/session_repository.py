"""
Session Repository
sessions.jsonl holds one assembled session per line; dataset dimensions and
split boundaries live in a sidecar <name>.meta.json
"""
import json
import logging
from pathlib import Path
from typing import Dict, Union

import numpy as np

from ...domain.entities.dataset import SessionDataset
from ...domain.entities.session import (
    CandidateItem, ContextFeatures, GroundTruth, Interaction, SessionRecord, SessionSample
)
from ...domain.exceptions import IntelValidationError
from ...domain.repositories.idataset_repository import ISessionRepository
from ...domain.value_objects.behavior import BehaviorScheme
from ...domain.value_objects.intent import IntentDistribution
from ...domain.value_objects.scores import ScoreMatrix

logger = logging.getLogger(__name__)


def sample_to_dict(sample: SessionSample, split: str = "") -> Dict:
    record = sample.record
    return {
        "session_id": record.session_id,
        "user_id": record.user_id,
        "timestamp": record.timestamp,
        "split": split,
        "context": {
            "hour_of_day": record.context.hour_of_day,
            "day_of_week": record.context.day_of_week,
            "extra": list(record.context.extra),
        },
        "candidates": [{"item_id": c.item_id, "category_id": c.category_id} for c in record.candidates],
        "interactions": [
            {"item_id": i.item_id, "level": i.level, "timestamp": i.timestamp} for i in record.interactions
        ],
        "model_ids": list(sample.scores.model_ids),
        "scores": sample.scores.values.tolist(),
        "mask": sample.scores.mask.astype(int).tolist(),
        "levels": sample.ground_truth.levels.tolist(),
        "pi_order": sample.ground_truth.pi_order.tolist(),
        "intent": sample.intent.to_list(),
    }


def sample_from_dict(data: Dict) -> SessionSample:
    record = SessionRecord(
        session_id=data["session_id"],
        user_id=data["user_id"],
        timestamp=float(data["timestamp"]),
        context=ContextFeatures(
            hour_of_day=int(data["context"]["hour_of_day"]),
            day_of_week=int(data["context"]["day_of_week"]),
            extra=tuple(data["context"].get("extra", ())),
        ),
        candidates=tuple(CandidateItem(c["item_id"], int(c["category_id"])) for c in data["candidates"]),
        interactions=tuple(
            Interaction(i["item_id"], int(i["level"]), float(i.get("timestamp", 0.0)))
            for i in data["interactions"]
        ),
    )
    return SessionSample(
        record=record,
        scores=ScoreMatrix(
            values=np.asarray(data["scores"], dtype=np.float64),
            mask=np.asarray(data["mask"], dtype=bool),
            model_ids=tuple(data["model_ids"]),
        ),
        ground_truth=GroundTruth(np.asarray(data["levels"]), np.asarray(data["pi_order"])),
        intent=IntentDistribution(np.asarray(data["intent"], dtype=np.float64)),
    )


class JsonlSessionRepository(ISessionRepository):
    """JSON-lines storage of a SessionDataset"""

    def __init__(self, path: Union[str, Path]):
        self.path = Path(path)
        self.meta_path = self.path.with_suffix(".meta.json")

    def exists(self) -> bool:
        return self.path.exists() and self.meta_path.exists()

    def save(self, dataset: SessionDataset) -> None:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with open(self.path, "w", encoding="utf-8", newline="\n") as f:
            for sample in sorted(dataset.samples, key=lambda s: s.session_id):
                f.write(json.dumps(sample_to_dict(sample, dataset.splits.get(sample.session_id, ""))) + "\n")
        with open(self.meta_path, "w", encoding="utf-8", newline="\n") as f:
            json.dump(dataset.metadata(), f, indent=2)
        logger.info(f"Wrote {len(dataset.samples)} sessions to {self.path}")

    def load(self) -> SessionDataset:
        if not self.exists():
            raise IntelValidationError(f"Session file or metadata missing: {self.path}")
        with open(self.meta_path, "r", encoding="utf-8") as f:
            meta = json.load(f)

        samples = []
        splits = {}
        with open(self.path, "r", encoding="utf-8") as f:
            for line_number, line in enumerate(f, start=1):
                if not line.strip():
                    continue
                try:
                    data = json.loads(line)
                    sample = sample_from_dict(data)
                except (KeyError, TypeError, ValueError) as e:
                    raise IntelValidationError(f"{self.path} line {line_number}: {e}") from e
                samples.append(sample)
                if data.get("split"):
                    splits[sample.session_id] = data["split"]

        logger.info(f"Read {len(samples)} sessions from {self.path}")
        return SessionDataset(
            samples=samples,
            scheme=BehaviorScheme(meta["behaviors"]),
            num_categories=int(meta["num_categories"]),
            model_ids=tuple(meta["model_ids"]),
            splits=splits,
            boundaries=dict(meta.get("boundaries", {})),
            context_extra_dim=int(meta.get("context_extra_dim", 0)),
        )
