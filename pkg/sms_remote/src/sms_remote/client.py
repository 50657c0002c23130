"""The smartphone client: connection bootstrap, the temporary login PIN,
command sending and the mirrored views of the remote device."""
from __future__ import annotations

import logging
from random import Random
from typing import Optional

from pydantic import Field

from model_lib import Entity, Event
from sms_remote.agent import ERR_UNKNOWN_COMMAND, SIGNED_OFF, SIM_CHANGED
from sms_remote.command import Command, render_command
from sms_remote.constants import TEMP_PIN_DIGITS, Channel, ClientPhase, UnlockResult
from sms_remote.effects import Effect, LogEntry, SendSms, SmsMessage, parse_part
from sms_remote.errors import NotConnected, SelfTarget, UiLocked
from sms_remote.guard import same_number
from sms_remote.protocol import (
    CipherKey,
    SharedSecret,
    derive_key,
    encode_frame,
    open_reply,
)

logger = logging.getLogger(__name__)


class MissedCall(Event):
    number: str
    at: str


class MirroredSms(Event):
    sender: str
    body: str


class ClientState(Entity):
    server: str
    secret: SharedSecret
    channel: Channel
    phase: ClientPhase = ClientPhase.AWAITING_CONFIRMATION
    temp_pin: Optional[str] = None
    ui_locked: bool = True
    missed_calls: list[MissedCall] = Field(default_factory=list)
    inbox_mirror: list[MirroredSms] = Field(default_factory=list)
    contact_results: list[str] = Field(default_factory=list)
    location_reports: list[str] = Field(default_factory=list)
    alerts: list[str] = Field(default_factory=list)
    replies: list[str] = Field(default_factory=list)
    pending_parts: dict[int, str] = Field(default_factory=dict)

    @property
    def key(self) -> CipherKey:
        return derive_key(self.secret)


def new_temp_pin(rng: Random) -> str:
    """
    >>> pin = new_temp_pin(Random(0))
    >>> len(pin), pin.isdigit(), pin == new_temp_pin(Random(0))
    (4, True, True)
    """
    return f"{rng.randrange(10**TEMP_PIN_DIGITS):0{TEMP_PIN_DIGITS}d}"


def begin_connection(
    server: str, secret: SharedSecret, channel: Channel, own_number: str = ""
) -> tuple[ClientState, SendSms]:
    if own_number and same_number(server, own_number):
        raise SelfTarget(server)
    state = ClientState(server=server, secret=secret, channel=channel)
    command_text = f"${secret.activation_command} {secret.activation_pin}"
    body = encode_frame(command_text, channel, state.key)
    return state, SendSms(to=server, body=body)


def _reassemble(c: ClientState, text: str) -> str | None:
    if (part := parse_part(text)) is None:
        return text
    index, total, chunk = part
    c.pending_parts[index] = chunk
    if any(i not in c.pending_parts for i in range(1, total + 1)):
        return None
    joined = "".join(c.pending_parts[i] for i in range(1, total + 1))
    c.pending_parts = {}
    return joined


def _head_rest(text: str) -> tuple[str, str]:
    head, _, rest = text.partition(" ")
    return head, rest


def _is_sim_change_from(text: str, sender: str) -> bool:
    """A swapped device alerts from its new number, reported as `number=`."""
    head, rest = _head_rest(text)
    return head == SIM_CHANGED and any(
        token.startswith("number=") and same_number(token[len("number=") :], sender)
        for token in rest.split()
    )


def _record_alert(c: ClientState, text: str) -> list[Effect]:
    logger.warning(f"alert for {c.server}: {text}")
    c.alerts.append(text)
    return [LogEntry(text=f"ALERT {text}")]


def handle_inbound(c: ClientState, msg: SmsMessage, rng: Random) -> list[Effect]:
    if not same_number(msg.sender, c.server):
        if c.phase != ClientPhase.AWAITING_CONFIRMATION and _is_sim_change_from(
            text := open_reply(msg.body, c.key), msg.sender
        ):
            return _record_alert(c, text)
        logger.debug(f"ignoring {msg.sender}, not the server {c.server}")
        return [LogEntry(text=f"IGNORED {msg.sender}")]
    text = _reassemble(c, open_reply(msg.body, c.key))
    if text is None:
        return []
    head, rest = _head_rest(text)
    if c.phase == ClientPhase.AWAITING_CONFIRMATION:
        if head != "CONNECTED":
            return [LogEntry(text=f"IGNORED-UNCONFIRMED {head}")]
        c.phase = ClientPhase.ACTIVE
        c.temp_pin = new_temp_pin(rng)
        c.ui_locked = True
        logger.info(f"connected to {c.server}")
        return [LogEntry(text=f"TEMP-PIN {c.temp_pin}")]
    match head:
        case "CALL-ALERT":
            number, _, at = rest.partition(" ")
            c.missed_calls.append(MissedCall(number=number, at=at))
        case "SMS-FROM":
            sender, _, body = rest.partition(": ")
            c.inbox_mirror.append(MirroredSms(sender=sender, body=body))
        case "CONTACT":
            c.contact_results.append(rest)
        case "LOC":
            c.location_reports.append(rest)
        case "SIM-CHANGED" | "INTRUDER":
            return _record_alert(c, text)
        case _ if text == SIGNED_OFF:
            c.phase = ClientPhase.ENDED
            c.ui_locked = True
            logger.info(f"session with {c.server} ended")
        case "OK" | "CONNECTED":
            c.replies.append(text)
        case _ if text == ERR_UNKNOWN_COMMAND:
            c.replies.append(text)
        case _:
            return [LogEntry(text=f"UNRECOGNIZED {text}")]
    return []


def request(c: ClientState, cmd: Command) -> SendSms:
    if c.phase != ClientPhase.ACTIVE:
        raise NotConnected(c.phase)
    if c.ui_locked:
        raise UiLocked()
    body = encode_frame(
        render_command(cmd, c.secret.activation_command), c.channel, c.key
    )
    return SendSms(to=c.server, body=body)


def unlock_ui(c: ClientState, pin: str) -> UnlockResult:
    if c.phase != ClientPhase.ACTIVE:
        raise NotConnected(c.phase)
    if pin != c.temp_pin:
        logger.info(f"wrong temporary pin for {c.server}")
        return UnlockResult.WRONG_PIN
    c.ui_locked = False
    return UnlockResult.OK
