"""Simulated time: integer seconds since 2012-01-01T00:00:00Z."""
from __future__ import annotations

from datetime import datetime, timedelta, timezone

from zero_3rdparty.datetime_utils import dump_as_kub_time

SIM_EPOCH = datetime(2012, 1, 1, tzinfo=timezone.utc)


def as_datetime(sim_seconds: int) -> datetime:
    return SIM_EPOCH + timedelta(seconds=sim_seconds)


def iso_timestamp(sim_seconds: int) -> str:
    """
    >>> iso_timestamp(0)
    '2012-01-01T00:00:00Z'
    >>> iso_timestamp(600)
    '2012-01-01T00:10:00Z'
    >>> iso_timestamp(49 * 3600)
    '2012-01-03T01:00:00Z'
    """
    return dump_as_kub_time(as_datetime(sim_seconds))
