"""The wire unit (SmsMessage) and the outputs returned by the agent and client."""
from __future__ import annotations

import re
from typing import Union

from pydantic import Field
from typing_extensions import TypeAlias

from model_lib import Event
from sms_remote.constants import SMS_MAX_LENGTH


class SmsMessage(Event):
    sender: str
    recipient: str
    body: str = Field(max_length=SMS_MAX_LENGTH)
    at: int = Field(default=0, ge=0)


class SendSms(Event):
    to: str
    body: str = Field(max_length=SMS_MAX_LENGTH)


class LogEntry(Event):
    text: str


Effect: TypeAlias = Union[SendSms, LogEntry]

_PART_PREFIX = re.compile(r"^\[(?P<index>[0-9]+)/(?P<total>[0-9]+)\] ")


def _part_prefix(index: int, total: int) -> str:
    return f"[{index}/{total}] "


def split_reply(text: str, limit: int = SMS_MAX_LENGTH) -> list[str]:
    """Split a logical reply into `[i/n] ` prefixed parts of at most `limit` chars.

    >>> split_reply("short")
    ['short']
    >>> parts = split_reply("x" * 300)
    >>> [len(part) for part in parts]
    [160, 152]
    >>> parts[1][:6]
    '[2/2] '
    """
    if len(text) <= limit:
        return [text]
    total = 2
    while True:
        # the prefix width grows with the number of digits in `total`
        room = limit - len(_part_prefix(total, total))
        chunks = [text[start : start + room] for start in range(0, len(text), room)]
        if len(chunks) <= total:
            break
        total = len(chunks)
    return [
        _part_prefix(index, len(chunks)) + chunk
        for index, chunk in enumerate(chunks, start=1)
    ]


def parse_part(body: str) -> tuple[int, int, str] | None:
    """
    >>> parse_part("[1/2] CONTACT Raja")
    (1, 2, 'CONTACT Raja')
    >>> parse_part("CONTACT Raja") is None
    True
    """
    if match := _PART_PREFIX.match(body):
        index, total = int(match["index"]), int(match["total"])
        if 1 <= index <= total:
            return index, total, body[match.end() :]
    return None
