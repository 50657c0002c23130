"""Transcript entries: the ordered, timestamped record every run produces.

    <iso-ts> SMS <from>-><to> "<body>"
    <iso-ts> CALL <from>-><to>
    <iso-ts> LOG <text>
"""
from __future__ import annotations

import re

from model_lib import Event
from sms_remote.timestamps import iso_timestamp
from zero_3rdparty.enum_utils import StrEnum

WILDCARD = "*"


class TranscriptKind(StrEnum):
    SMS = "SMS"
    CALL = "CALL"
    LOG = "LOG"


class TranscriptEntry(Event):
    at: int
    kind: TranscriptKind
    sender: str = ""
    recipient: str = ""
    text: str = ""

    def render(self) -> str:
        """
        >>> TranscriptEntry(at=1, kind=TranscriptKind.SMS, sender="+919000000002", recipient="+919000000001", text="$SIGNOFF").render()
        '2012-01-01T00:00:01Z SMS +919000000002->+919000000001 "$SIGNOFF"'
        >>> TranscriptEntry(at=0, kind=TranscriptKind.LOG, text="LOST a->b").render()
        '2012-01-01T00:00:00Z LOG LOST a->b'
        """
        timestamp = iso_timestamp(self.at)
        match self.kind:
            case TranscriptKind.SMS:
                return f'{timestamp} SMS {self.sender}->{self.recipient} "{self.text}"'
            case TranscriptKind.CALL:
                return f"{timestamp} CALL {self.sender}->{self.recipient}"
        return f"{timestamp} LOG {self.text}"


def sms_entry(at: int, sender: str, recipient: str, body: str) -> TranscriptEntry:
    return TranscriptEntry(
        at=at, kind=TranscriptKind.SMS, sender=sender, recipient=recipient, text=body
    )


def call_entry(at: int, caller: str, callee: str) -> TranscriptEntry:
    return TranscriptEntry(
        at=at, kind=TranscriptKind.CALL, sender=caller, recipient=callee
    )


def log_entry(at: int, text: str) -> TranscriptEntry:
    return TranscriptEntry(at=at, kind=TranscriptKind.LOG, text=text)


def wildcard_regex(pattern: str) -> re.Pattern:
    """
    >>> bool(wildcard_regex("CONTACT * r@x.com").match("CONTACT Raja +919 r@x.com"))
    True
    >>> bool(wildcard_regex("OK $SILENT-ON").match("OK $SILENT-OFF"))
    False
    """
    parts = (re.escape(part) for part in pattern.split(WILDCARD))
    return re.compile(f"^{'.*'.join(parts)}$", re.DOTALL)


def wildcard_match(pattern: str, value: str) -> bool:
    return bool(wildcard_regex(pattern).match(value))
