from itertools import combinations_with_replacement

import pytest

from sms_remote.constants import FailureStatus, SenderCheck, SenderStatus
from sms_remote.errors import AlreadyBlocked
from sms_remote.guard import (
    FailureResult,
    GuardState,
    block_now,
    clear_blocked,
    record_failure,
    sender_status,
    validate_sender,
)

SERVER = "+919000000001"
STRANGER = "+919000000009"
HOUR = 3600
TIME_GRID = (0, HOUR, 47 * HOUR, 49 * HOUR, 96 * HOUR)


@pytest.mark.parametrize(
    "sender,check",
    [
        ("AD-WAY2SMS", SenderCheck.NOT_MSISDN),
        ("+919000000001", SenderCheck.SELF_REQUEST),
        ("919000000001", SenderCheck.SELF_REQUEST),
        ("+919000000002", SenderCheck.VALID),
        ("12345", SenderCheck.NOT_MSISDN),
        ("", SenderCheck.NOT_MSISDN),
    ],
)
def test_validate_sender(sender, check):
    assert validate_sender(sender, SERVER).check == check


def _statuses(guard: GuardState, times: list[int]) -> list[FailureResult]:
    return [record_failure(guard, STRANGER, t) for t in times]


def test_three_strikes_within_window():
    guard = GuardState()
    assert _statuses(guard, [0, 10, 20]) == [
        FailureResult.warned(1),
        FailureResult.warned(2),
        FailureResult.blocked(),
    ]
    assert sender_status(guard, STRANGER, 30) == SenderStatus.BLOCKED
    assert guard.warnings == []


def test_third_failure_after_expiry_starts_fresh():
    guard = GuardState()
    assert _statuses(guard, [0, 10, 180_000]) == [
        FailureResult.warned(1),
        FailureResult.warned(2),
        FailureResult.warned(1),
    ]
    assert sender_status(guard, STRANGER, 180_001) == SenderStatus.ALLOWED


@pytest.mark.parametrize(
    "times,final",
    [
        ([0, HOUR, 2 * HOUR], FailureStatus.BLOCKED),
        ([0, HOUR, 49 * HOUR], FailureStatus.WARNED),
    ],
)
def test_failure_timelines(times, final):
    assert _statuses(GuardState(), times)[-1].status == final


def test_query_after_expiry_purges_warning():
    guard = GuardState()
    _statuses(guard, [0, 0])
    assert sender_status(guard, STRANGER, 200_000) == SenderStatus.ALLOWED
    assert guard.warning_for(STRANGER) is None


def test_window_boundary_is_inclusive():
    guard = GuardState()
    _statuses(guard, [0, 10])
    assert record_failure(guard, STRANGER, 48 * HOUR).status == FailureStatus.BLOCKED


def test_record_failure_on_blocked_number():
    guard = GuardState()
    block_now(guard, STRANGER)
    with pytest.raises(AlreadyBlocked):
        record_failure(guard, STRANGER, 0)


def test_block_now_is_idempotent_and_drops_warning():
    guard = GuardState()
    record_failure(guard, STRANGER, 0)
    block_now(guard, STRANGER)
    block_now(guard, STRANGER)
    assert guard.blocked == [STRANGER]
    assert guard.warnings == []
    assert sender_status(guard, STRANGER, 10**9) == SenderStatus.BLOCKED


def test_clear_blocked_keeps_warnings():
    guard = GuardState()
    other = "+919000000008"
    block_now(guard, STRANGER)
    record_failure(guard, other, 0)
    clear_blocked(guard)
    assert sender_status(guard, STRANGER, 1) == SenderStatus.ALLOWED
    assert record_failure(guard, other, 2) == FailureResult.warned(2)
    clear_blocked(GuardState())


def _oracle(times: tuple[int, ...]) -> list[str]:
    """Counts failures since the start of the current 48 hour episode."""
    outcomes: list[str] = []
    episode: list[int] = []
    for t in times:
        if outcomes and outcomes[-1] in ("blocked", "already-blocked"):
            outcomes.append("already-blocked")
            continue
        if episode and t - episode[0] > 48 * HOUR:
            episode = []
        episode.append(t)
        outcomes.append("blocked" if len(episode) == 3 else f"warned-{len(episode)}")
    return outcomes


def _observed(times: tuple[int, ...]) -> list[str]:
    guard = GuardState()
    outcomes = []
    for t in times:
        try:
            result = record_failure(guard, STRANGER, t)
        except AlreadyBlocked:
            outcomes.append("already-blocked")
            continue
        if result.status == FailureStatus.BLOCKED:
            outcomes.append("blocked")
        else:
            outcomes.append(f"warned-{result.count}")
    return outcomes


def test_timeline_matches_oracle(subtests):
    for length in range(1, 6):
        for times in combinations_with_replacement(TIME_GRID, length):
            with subtests.test(times=times):
                assert _observed(times) == _oracle(times)
