from __future__ import annotations

import logging
from pathlib import Path
from typing import Optional

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

from sms_remote.constants import GPS_TICK_SECONDS
from sms_sim.errors import InvalidDuration
from zero_3rdparty.timeparse import timeparse

logger = logging.getLogger(__name__)


class SimSettings(BaseSettings):
    model_config = SettingsConfigDict(env_prefix="SMS_SIM_")

    delivery_delay_seconds: int = Field(default=1, ge=0)
    gps_tick_seconds: int = Field(default=GPS_TICK_SECONDS, gt=0)
    loss_rate: float = Field(default=0.0, ge=0, lt=1)
    seed: int = 0
    state_dir: Optional[Path] = None
    log_level: str = "INFO"


def parse_duration(duration: str) -> int:
    """A bare integer means seconds.

    >>> parse_duration("5s")
    5
    >>> parse_duration("10")
    10
    >>> parse_duration("49h")
    176400
    >>> parse_duration("1h30m")
    5400
    """
    duration = duration.strip()
    if duration.isdigit():
        return int(duration)
    seconds = timeparse(duration) if duration else None
    if seconds is None or seconds < 0 or seconds != int(seconds):
        raise InvalidDuration(duration)
    return int(seconds)
