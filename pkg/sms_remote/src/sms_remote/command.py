"""The closed command vocabulary.

Keywords are matched case-sensitively against the canonical uppercase forms;
the connect command is the user-chosen activation word followed by the pin.
"""
from __future__ import annotations

import re

from pydantic import field_validator, model_validator

from model_lib import Event
from sms_remote.constants import COMMAND_PREFIX, PIN_REGEX
from sms_remote.errors import UnknownCommand
from zero_3rdparty.enum_utils import StrEnum

AUTO_REPLY_OFF_ARGUMENT = "OFF"
_PIN_PATTERN = re.compile(PIN_REGEX)


class CommandKind(StrEnum):
    CONNECT = "CONNECT"
    SILENT_ON = "SILENT-ON"
    SILENT_OFF = "SILENT-OFF"
    GPS_ON = "GPS-ON"
    GPS_OFF = "GPS-OFF"
    WIFI_ON = "WIFI-ON"
    WIFI_OFF = "WIFI-OFF"
    CALL_ALERT_ON = "CALLALERT-ON"
    CALL_ALERT_OFF = "CALLALERT-OFF"
    SMS_DIVERT_ON = "SMSDIVERT-ON"
    SMS_DIVERT_OFF = "SMSDIVERT-OFF"
    AUTO_REPLY_ON = "SMS-REPLY"
    AUTO_REPLY_OFF = "SMS-REPLY OFF"
    CONTACT_LOOKUP = "CONTACT"
    WIPEOUT = "WIPEOUT"
    FLIGHT_ON = "FLIGHT-ON"
    SIGN_OFF = "SIGNOFF"


_NO_ARGUMENT_KINDS = {
    kind
    for kind in CommandKind
    if kind
    not in (
        CommandKind.CONNECT,
        CommandKind.AUTO_REPLY_ON,
        CommandKind.CONTACT_LOOKUP,
    )
}
_KEYWORD_TO_KIND: dict[str, CommandKind] = {
    kind.value: kind for kind in _NO_ARGUMENT_KINDS
}
# `$CONTACT <digits>` reads as a lookup, never as `$<activation> <pin>`
RESERVED_ACTIVATION_COMMANDS = frozenset({CommandKind.CONTACT_LOOKUP.value})


class Command(Event):
    kind: CommandKind
    argument: str = ""

    @field_validator("argument")
    @classmethod
    def strip_argument(cls, value: str) -> str:
        return value.strip()

    @model_validator(mode="after")
    def check_argument(self) -> Command:
        kind, argument = self.kind, self.argument
        if kind in _NO_ARGUMENT_KINDS:
            if argument:
                raise ValueError(f"{kind} takes no argument, got {argument!r}")
        elif kind == CommandKind.CONNECT:
            if not _PIN_PATTERN.match(argument):
                raise ValueError(f"connect pin must match {PIN_REGEX}")
        elif not argument:
            raise ValueError(f"{kind} needs a non-empty argument")
        elif kind == CommandKind.AUTO_REPLY_ON and argument == AUTO_REPLY_OFF_ARGUMENT:
            raise ValueError("auto reply text OFF is reserved for $SMS-REPLY OFF")
        return self

    @classmethod
    def of(cls, kind: CommandKind) -> Command:
        return cls(kind=kind)

    @classmethod
    def connect(cls, pin: str) -> Command:
        return cls(kind=CommandKind.CONNECT, argument=pin)

    @classmethod
    def auto_reply_on(cls, message: str) -> Command:
        return cls(kind=CommandKind.AUTO_REPLY_ON, argument=message)

    @classmethod
    def contact_lookup(cls, query: str) -> Command:
        return cls(kind=CommandKind.CONTACT_LOOKUP, argument=query)


def parse_command(command_text: str, activation_command: str) -> Command:
    """
    >>> parse_command("$SILENT-ON", "MYDOB").kind
    'SILENT-ON'
    >>> parse_command("$MYDOB 1989", "MYDOB").argument
    '1989'
    >>> parse_command("$SMS-REPLY OFF", "MYDOB").kind
    'SMS-REPLY OFF'
    >>> parse_command("$SMS-REPLY In a meeting", "MYDOB").argument
    'In a meeting'
    """
    if not command_text.startswith(COMMAND_PREFIX):
        raise UnknownCommand(command_text)
    keyword, separator, rest = command_text[len(COMMAND_PREFIX) :].partition(" ")
    argument = rest.strip()
    if not separator:
        if kind := _KEYWORD_TO_KIND.get(keyword):
            return Command.of(kind)
        raise UnknownCommand(command_text)
    if keyword == CommandKind.AUTO_REPLY_ON and argument:
        if argument == AUTO_REPLY_OFF_ARGUMENT:
            return Command.of(CommandKind.AUTO_REPLY_OFF)
        return Command.auto_reply_on(argument)
    if keyword == CommandKind.CONTACT_LOOKUP and argument:
        return Command.contact_lookup(argument)
    if keyword == activation_command and _PIN_PATTERN.match(argument):
        return Command.connect(argument)
    raise UnknownCommand(command_text)


def render_command(command: Command, activation_command: str) -> str:
    """
    >>> render_command(Command.of(CommandKind.WIPEOUT), "MYDOB")
    '$WIPEOUT'
    >>> render_command(Command.connect("1989"), "MYDOB")
    '$MYDOB 1989'
    >>> render_command(Command.auto_reply_on("ok"), "MYDOB")
    '$SMS-REPLY ok'
    """
    kind = command.kind
    if kind == CommandKind.CONNECT:
        return f"{COMMAND_PREFIX}{activation_command} {command.argument}"
    if kind in (CommandKind.AUTO_REPLY_ON, CommandKind.CONTACT_LOOKUP):
        return f"{COMMAND_PREFIX}{kind} {command.argument}"
    return f"{COMMAND_PREFIX}{kind}"
