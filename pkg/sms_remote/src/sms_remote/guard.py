"""Sender validation, the 48 hour warning list and the permanent block list."""
from __future__ import annotations

import logging
import re

from pydantic import Field

from model_lib import Entity, Event
from sms_remote.constants import (
    FAILURES_BEFORE_BLOCK,
    MSISDN_REGEX,
    WARNING_TTL_SECONDS,
    FailureStatus,
    SenderCheck,
    SenderStatus,
)
from sms_remote.errors import AlreadyBlocked

logger = logging.getLogger(__name__)
_MSISDN_PATTERN = re.compile(MSISDN_REGEX)


def is_msisdn(sender: str) -> bool:
    """
    >>> is_msisdn("+919000000001")
    True
    >>> is_msisdn("AD-WAY2SMS")
    False
    >>> is_msisdn("123456")
    False
    """
    return bool(_MSISDN_PATTERN.fullmatch(sender))


def normalize(number: str) -> str:
    """
    >>> normalize("+919000000001")
    '919000000001'
    """
    return number.removeprefix("+")


def same_number(a: str, b: str) -> bool:
    return normalize(a) == normalize(b)


class SenderValidation(Event):
    check: SenderCheck
    number: str = ""

    @property
    def is_valid(self) -> bool:
        return self.check == SenderCheck.VALID


class FailureResult(Event):
    status: FailureStatus
    count: int = 0

    @classmethod
    def warned(cls, count: int) -> FailureResult:
        return cls(status=FailureStatus.WARNED, count=count)

    @classmethod
    def blocked(cls) -> FailureResult:
        return cls(status=FailureStatus.BLOCKED)


class WarningEntry(Event):
    number: str = Field(pattern=MSISDN_REGEX)
    fail_count: int = Field(ge=1, lt=FAILURES_BEFORE_BLOCK)
    first_fail_at: int = Field(ge=0)

    def expired(self, now: int) -> bool:
        return now - self.first_fail_at > WARNING_TTL_SECONDS


class GuardState(Entity):
    warnings: list[WarningEntry] = Field(default_factory=list)
    blocked: list[str] = Field(default_factory=list)

    def warning_for(self, number: str) -> WarningEntry | None:
        return next(
            (entry for entry in self.warnings if same_number(entry.number, number)),
            None,
        )

    def is_blocked(self, number: str) -> bool:
        return any(same_number(blocked, number) for blocked in self.blocked)

    def purge_expired(self, now: int) -> None:
        if expired := [entry for entry in self.warnings if entry.expired(now)]:
            for entry in expired:
                logger.info(f"warning expired for {entry.number}")
            self.warnings = [entry for entry in self.warnings if entry not in expired]

    def _drop_warning(self, number: str) -> None:
        self.warnings = [
            entry for entry in self.warnings if not same_number(entry.number, number)
        ]


def validate_sender(sender: str, self_number: str) -> SenderValidation:
    if not is_msisdn(sender):
        return SenderValidation(check=SenderCheck.NOT_MSISDN)
    if same_number(sender, self_number):
        return SenderValidation(check=SenderCheck.SELF_REQUEST, number=sender)
    return SenderValidation(check=SenderCheck.VALID, number=sender)


def sender_status(guard: GuardState, number: str, now: int) -> SenderStatus:
    guard.purge_expired(now)
    return SenderStatus.BLOCKED if guard.is_blocked(number) else SenderStatus.ALLOWED


def record_failure(guard: GuardState, number: str, now: int) -> FailureResult:
    """
    >>> guard = GuardState()
    >>> [record_failure(guard, "+919000000009", t).status for t in (0, 10, 20)]
    ['warned', 'warned', 'blocked']
    """
    if guard.is_blocked(number):
        raise AlreadyBlocked(number)
    guard.purge_expired(now)
    entry = guard.warning_for(number)
    if entry is None:
        guard.warnings.append(
            WarningEntry(number=number, fail_count=1, first_fail_at=now)
        )
        return FailureResult.warned(1)
    guard._drop_warning(number)
    count = entry.fail_count + 1
    if count >= FAILURES_BEFORE_BLOCK:
        guard.blocked.append(number)
        logger.info(f"{number} blocked after {count} failures")
        return FailureResult.blocked()
    guard.warnings.append(entry.model_copy(update={"fail_count": count}))
    return FailureResult.warned(count)


def block_now(guard: GuardState, number: str) -> None:
    guard._drop_warning(number)
    if not guard.is_blocked(number):
        guard.blocked.append(number)
        logger.info(f"{number} blocked immediately")


def clear_blocked(guard: GuardState) -> None:
    if guard.blocked:
        logger.info(f"clearing {len(guard.blocked)} blocked numbers")
    guard.blocked = []
