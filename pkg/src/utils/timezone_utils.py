"""
Timezone Utilities
Calendar-day handling for session building and temporal splits
"""
from datetime import date, datetime
from typing import Union

import pytz


UTC = pytz.UTC

Timestamp = Union[int, float]


def get_timezone(name: str = "UTC"):
    """Resolve a timezone name, e.g. 'Asia/Shanghai' for Tmall logs"""
    return pytz.timezone(name)


def epoch_to_local(timestamp: Timestamp, tz_name: str = "UTC") -> datetime:
    """Convert epoch seconds to an aware datetime in the given timezone"""
    utc_time = datetime.fromtimestamp(float(timestamp), tz=UTC)
    return utc_time.astimezone(get_timezone(tz_name))


def local_date(timestamp: Timestamp, tz_name: str = "UTC") -> date:
    """Calendar day of an epoch timestamp in the given timezone"""
    return epoch_to_local(timestamp, tz_name).date()


def local_midnight_epoch(day: date, tz_name: str = "UTC") -> float:
    """Epoch seconds of local midnight starting the given day"""
    tz = get_timezone(tz_name)
    midnight = tz.localize(datetime(day.year, day.month, day.day))
    return midnight.astimezone(UTC).timestamp()
