"""
Temporal Splitter Service
Splits sessions along time: last week for test, three days before it for validation
"""
import logging
from datetime import timedelta
from typing import Sequence

from ..entities.session import SplitResult
from ..exceptions import EmptySplitError, InsufficientTimespanError, IntelValidationError
from ...utils.timezone_utils import local_date

logger = logging.getLogger(__name__)


def temporal_split(
    sessions: Sequence,
    test_days: int = 7,
    validation_days: int = 3,
    timezone: str = "UTC"
) -> SplitResult:
    """
    Partition sessions by calendar day. Works on anything exposing a
    `timestamp` (SessionRecord) or a `record.timestamp` (SessionSample).
    Day boundaries are inclusive-exclusive.
    """
    if test_days < 1 or validation_days < 1:
        raise IntelValidationError("test_days and validation_days must be >= 1")
    if not sessions:
        raise EmptySplitError("No sessions to split")

    def day_of(session):
        timestamp = session.record.timestamp if hasattr(session, "record") else session.timestamp
        return local_date(timestamp, timezone)

    days = [day_of(s) for s in sessions]
    first_day, last_day = min(days), max(days)
    span = (last_day - first_day).days + 1
    required = test_days + validation_days + 1
    if span < required:
        raise InsufficientTimespanError(f"Sessions span {span} days; at least {required} are needed")

    test_start = last_day - timedelta(days=test_days - 1)
    validation_start = test_start - timedelta(days=validation_days)

    result = SplitResult(boundaries={
        "first_day": first_day.isoformat(),
        "validation_start": validation_start.isoformat(),
        "test_start": test_start.isoformat(),
        "last_day": last_day.isoformat(),
    })
    for session, day in zip(sessions, days):
        if day >= test_start:
            result.test.append(session)
        elif day >= validation_start:
            result.validation.append(session)
        else:
            result.train.append(session)

    for name in ("train", "validation", "test"):
        if not getattr(result, name):
            raise EmptySplitError(f"The {name} split is empty")

    logger.info(
        f"Temporal split: train={len(result.train)}, validation={len(result.validation)}, "
        f"test={len(result.test)} (test starts {test_start})"
    )
    return result
