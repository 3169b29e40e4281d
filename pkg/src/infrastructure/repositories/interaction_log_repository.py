"""
Interaction Log Repository
Reads and writes interactions.csv
(header: user_id,item_id,category_id,behavior,timestamp[,visit_id])
"""
import logging
from pathlib import Path
from typing import List, Union

import pandas as pd

from ...domain.exceptions import IntelValidationError, TimestampParseError
from ...domain.repositories.idataset_repository import IInteractionLogRepository
from ...domain.services.session_builder import EVENT_COLUMNS, VISIT_COLUMN
from ...domain.value_objects.behavior import BehaviorScheme

logger = logging.getLogger(__name__)

CSV_COLUMNS = ["user_id", "item_id", "category_id", "behavior", "timestamp"]


def parse_timestamp(value: str, row: int) -> float:
    """Epoch seconds from a numeric string or an ISO-8601 datetime (naive means UTC)"""
    text = str(value).strip()
    try:
        return float(text)
    except ValueError:
        pass
    try:
        parsed = pd.Timestamp(text)
    except (ValueError, TypeError):
        raise TimestampParseError(row, value)
    if pd.isna(parsed):
        raise TimestampParseError(row, value)
    if parsed.tzinfo is None:
        parsed = parsed.tz_localize("UTC")
    return parsed.timestamp()


class CsvInteractionLogRepository(IInteractionLogRepository):
    """interactions.csv storage"""

    def __init__(self, path: Union[str, Path], scheme: BehaviorScheme):
        self.path = Path(path)
        self.scheme = scheme

    def load(self) -> pd.DataFrame:
        if not self.path.exists():
            raise IntelValidationError(f"Interaction log not found: {self.path}")
        raw = pd.read_csv(self.path, dtype=str, keep_default_na=False, encoding="utf-8")
        missing = [c for c in CSV_COLUMNS if c not in raw.columns]
        if missing:
            raise IntelValidationError(f"{self.path} lacks columns {missing}")

        timestamps: List[float] = []
        levels: List[int] = []
        categories: List[int] = []
        behaviors: List[str] = []
        # data rows start on line 2 of the file
        for offset, row in enumerate(raw.itertuples(index=False)):
            line = offset + 2
            timestamps.append(parse_timestamp(row.timestamp, line))
            try:
                behavior = self.scheme.from_name(row.behavior)
            except IntelValidationError as e:
                raise IntelValidationError(f"Row {line}: {e}") from e
            try:
                categories.append(int(row.category_id))
            except ValueError:
                raise IntelValidationError(f"Row {line}: category_id {row.category_id!r} is not an integer")
            behaviors.append(behavior.name)
            levels.append(behavior.level)

        events = pd.DataFrame({
            "user_id": raw["user_id"].astype(str),
            "item_id": raw["item_id"].astype(str),
            "category_id": categories,
            "behavior": behaviors,
            "level": levels,
            "timestamp": timestamps,
        }, columns=EVENT_COLUMNS)
        if VISIT_COLUMN in raw.columns:
            events[VISIT_COLUMN] = raw[VISIT_COLUMN].astype(str)
        logger.info(f"Read {len(events)} interactions from {self.path}")
        return events

    def save(self, events: pd.DataFrame) -> None:
        columns = list(CSV_COLUMNS)
        if VISIT_COLUMN in events.columns:
            columns.append(VISIT_COLUMN)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        frame = events[columns].copy()
        frame["timestamp"] = [repr(float(t)) for t in frame["timestamp"]]
        frame.to_csv(self.path, index=False, encoding="utf-8", lineterminator="\n")
        logger.info(f"Wrote {len(frame)} interactions to {self.path}")
