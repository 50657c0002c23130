"""The protected device's handlers: request listener, call handler, boot handler
and the background location tracker.

Handlers return effects and never send anything themselves. Only
`handle_boot` raises; every anomaly while handling an SMS becomes a
`LogEntry`.
"""
from __future__ import annotations

import logging

from sms_remote.command import Command, CommandKind, parse_command, render_command
from sms_remote.constants import (
    ENCRYPTED_PREFIX,
    SMS_MAX_LENGTH,
    Channel,
    FailureStatus,
    Feature,
    SenderStatus,
)
from sms_remote.device import (
    CallRecord,
    DeviceState,
    apply_toggle,
    close_session,
    is_reachable,
    lock,
    open_session,
    search_contacts,
    wipeout,
)
from sms_remote.effects import Effect, LogEntry, SendSms, SmsMessage, split_reply
from sms_remote.errors import AlreadyBooted, NonPrintableInput, UnknownCommand
from sms_remote.guard import (
    block_now,
    record_failure,
    same_number,
    sender_status,
    validate_sender,
)
from sms_remote.protocol import DecodedFrame, decode_frame, seal_reply
from sms_remote.timestamps import iso_timestamp

logger = logging.getLogger(__name__)

ERR_UNKNOWN_COMMAND = "ERR UNKNOWN-COMMAND"
SIGNED_OFF = "SIGNED-OFF"
LOC_UNKNOWN = "LOC UNKNOWN"
SIM_CHANGED = "SIM-CHANGED"

_TOGGLES: dict[str, tuple[Feature, bool]] = {
    CommandKind.SILENT_ON: (Feature.SILENT, True),
    CommandKind.SILENT_OFF: (Feature.SILENT, False),
    CommandKind.GPS_ON: (Feature.GPS, True),
    CommandKind.GPS_OFF: (Feature.GPS, False),
    CommandKind.WIFI_ON: (Feature.WIFI, True),
    CommandKind.WIFI_OFF: (Feature.WIFI, False),
}
_SETTING_FLAGS: dict[str, tuple[str, bool]] = {
    CommandKind.CALL_ALERT_ON: ("call_alert", True),
    CommandKind.CALL_ALERT_OFF: ("call_alert", False),
    CommandKind.SMS_DIVERT_ON: ("sms_divert", True),
    CommandKind.SMS_DIVERT_OFF: ("sms_divert", False),
}


def connected_reply(msisdn: str) -> str:
    return f"CONNECTED {msisdn}"


def intruder_alert(sender: str) -> str:
    return f"INTRUDER {sender} BLOCKED"


def location_reply(d: DeviceState, now: int) -> str:
    """
    >>> from sms_remote.device import Location, provision_device
    >>> from sms_remote.protocol import SharedSecret
    >>> secret = SharedSecret(activation_command="MYDOB", activation_pin="1989")
    >>> d = provision_device("+919000000001", secret, login_pin="4321")
    >>> location_reply(d, 0)
    'LOC UNKNOWN'
    >>> d.location = Location(lat=12.0, lon=79.8)
    >>> location_reply(d, 600)
    'LOC 12.0,79.8 2012-01-01T00:10:00Z'
    """
    if d.location is None:
        return LOC_UNKNOWN
    return f"LOC {d.location.render()} {iso_timestamp(now)}"


def _log(text: str) -> list[Effect]:
    return [LogEntry(text=text)]


def _send(d: DeviceState, to: str, text: str, channel: Channel) -> list[Effect]:
    limit = SMS_MAX_LENGTH
    if channel == Channel.ENCRYPTED:
        limit -= len(ENCRYPTED_PREFIX)
    try:
        return [
            SendSms(to=to, body=seal_reply(part, channel, d.settings.key))
            for part in split_reply(text, limit)
        ]
    except NonPrintableInput as e:
        logger.error(f"reply to {to} cannot be encrypted: {e!r}")
        return _log(f"UNSENDABLE-REPLY {to}")


def _reply_to_peer(d: DeviceState, text: str) -> list[Effect]:
    session = d.settings.session
    if session is None:
        return _log(f"NO-SESSION {text}")
    return _send(d, session.peer, text, session.channel)


def handle_sms(d: DeviceState, msg: SmsMessage, now: int) -> list[Effect]:
    sender = msg.sender
    if not d.booted:
        return _log(f"UNDELIVERED-OFF {sender}")
    validation = validate_sender(sender, d.msisdn)
    frame = decode_frame(msg.body, d.settings.key)
    if not validation.is_valid:
        if frame is None:
            d.inbox.append(msg)
            return []
        logger.info(f"rejected {sender}: {validation.check}")
        return _log(f"REJECTED-SENDER {sender} {validation.check}")
    if sender_status(d.guard, sender, now) == SenderStatus.BLOCKED:
        logger.debug(f"dropped message from blocked {sender}")
        return _log(f"DROPPED-BLOCKED {sender}")
    if frame is None:
        return _handle_ordinary(d, msg)
    if not d.has_session:
        return _handle_idle_command(d, sender, frame, now)
    if d.is_peer(sender):
        return _handle_peer_command(d, frame, now)
    block_now(d.guard, sender)
    logger.info(f"intruder {sender} blocked during session")
    alert = intruder_alert(sender)
    return _reply_to_peer(d, alert) + _log(alert)


def _handle_ordinary(d: DeviceState, msg: SmsMessage) -> list[Effect]:
    d.inbox.append(msg)
    if not d.has_session or d.is_peer(msg.sender):
        return []
    effects: list[Effect] = []
    settings = d.settings
    if settings.sms_divert:
        effects.extend(_reply_to_peer(d, f"SMS-FROM {msg.sender}: {msg.body}"))
    if settings.auto_reply:
        effects.extend(_send(d, msg.sender, settings.auto_reply, Channel.PLAIN))
    return effects


def _parse_or_none(d: DeviceState, frame: DecodedFrame) -> Command | None:
    try:
        return parse_command(frame.command_text, d.settings.secret.activation_command)
    except UnknownCommand:
        return None


def _is_valid_connect(d: DeviceState, command: Command | None) -> bool:
    return (
        command is not None
        and command.kind == CommandKind.CONNECT
        and command.argument == d.settings.secret.activation_pin
    )


def _handle_idle_command(
    d: DeviceState, sender: str, frame: DecodedFrame, now: int
) -> list[Effect]:
    command = _parse_or_none(d, frame)
    if _is_valid_connect(d, command):
        open_session(d, sender, frame.channel, now)
        logger.info(f"session opened by {sender} over {frame.channel}")
        return _log(f"SESSION-OPENED {sender} {frame.channel}") + _reply_to_peer(
            d, connected_reply(d.msisdn)
        )
    result = record_failure(d.guard, sender, now)
    if result.status == FailureStatus.BLOCKED:
        return _log(f"AUTH-FAILED {sender} BLOCKED")
    return _log(f"AUTH-FAILED {sender} WARNED {result.count}")


def _handle_peer_command(d: DeviceState, frame: DecodedFrame, now: int) -> list[Effect]:
    command = _parse_or_none(d, frame)
    if command is None:
        return _reply_to_peer(d, ERR_UNKNOWN_COMMAND)
    if command.kind == CommandKind.CONNECT:
        if _is_valid_connect(d, command):
            return _reply_to_peer(d, connected_reply(d.msisdn))
        return _reply_to_peer(d, ERR_UNKNOWN_COMMAND)
    return execute(d, command, now)


def execute(d: DeviceState, cmd: Command, now: int) -> list[Effect]:
    if not d.has_session:
        return _log(f"NO-SESSION {cmd.kind}")
    kind = cmd.kind
    ack = f"OK {render_command(cmd, d.settings.secret.activation_command)}"
    settings = d.settings
    if toggle := _TOGGLES.get(kind):
        feature, on = toggle
        apply_toggle(d, feature, on)
        if kind == CommandKind.GPS_ON:
            return _reply_to_peer(d, ack) + _reply_to_peer(d, location_reply(d, now))
        return _reply_to_peer(d, ack)
    if flag := _SETTING_FLAGS.get(kind):
        name, on = flag
        setattr(settings, name, on)
        return _reply_to_peer(d, ack)
    match kind:
        case CommandKind.CONNECT:
            return _reply_to_peer(d, connected_reply(d.msisdn))
        case CommandKind.AUTO_REPLY_ON:
            settings.auto_reply = cmd.argument
            return _reply_to_peer(d, ack)
        case CommandKind.AUTO_REPLY_OFF:
            settings.auto_reply = None
            return _reply_to_peer(d, ack)
        case CommandKind.CONTACT_LOOKUP:
            if matches := search_contacts(d, cmd.argument):
                effects: list[Effect] = []
                for contact in matches:
                    effects.extend(
                        _reply_to_peer(
                            d, f"CONTACT {contact.name} {contact.mobile} {contact.email}"
                        )
                    )
                return effects
            return _reply_to_peer(d, f"CONTACT NOT-FOUND {cmd.argument}")
        case CommandKind.WIPEOUT:
            wipeout(d)
            return _reply_to_peer(d, ack)
        case CommandKind.FLIGHT_ON:
            effects = _reply_to_peer(d, ack)
            apply_toggle(d, Feature.FLIGHT, True)
            return effects
        case CommandKind.SIGN_OFF:
            effects = _reply_to_peer(d, SIGNED_OFF)
            logger.info(f"{d.settings.session.peer} signed off")
            close_session(d)
            return effects
    return _reply_to_peer(d, ERR_UNKNOWN_COMMAND)


def handle_call(d: DeviceState, caller: str, now: int) -> list[Effect]:
    d.call_log.append(CallRecord(caller=caller, at=now))
    if d.settings.call_alert and d.has_session:
        return _reply_to_peer(d, f"CALL-ALERT {caller} {iso_timestamp(now)}")
    return []


def handle_boot(d: DeviceState, now: int) -> list[Effect]:
    if d.booted:
        raise AlreadyBooted(d.msisdn)
    d.booted = True
    effects: list[Effect] = []
    if d.has_session:
        lock(d)
        effects.extend(_log("LOCKED-ON-BOOT"))
    if d.sim_id != d.last_boot_sim:
        alert = f"{SIM_CHANGED} old={d.last_boot_sim} new={d.sim_id} number={d.msisdn}"
        logger.warning(f"{alert} at {iso_timestamp(now)}")
        if remote := d.settings.trusted_remote:
            session = d.settings.session
            if session and same_number(session.peer, remote):
                effects.extend(_reply_to_peer(d, alert))
            else:
                effects.extend(_send(d, remote, alert, Channel.PLAIN))
        else:
            effects.extend(_log(alert))
    d.last_boot_sim = d.sim_id
    return effects


def gps_tick(d: DeviceState, now: int) -> list[Effect]:
    if not (d.gps_tracking and d.has_session and is_reachable(d)):
        return []
    return _reply_to_peer(d, location_reply(d, now))
