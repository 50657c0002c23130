from __future__ import annotations

from zero_3rdparty.error import BaseError, Code


class NonPrintableInput(BaseError):
    code = Code.INVALID_ARGUMENT

    def __init__(self, text: str, position: int):
        self.text = text
        self.position = position


class MissingKey(BaseError):
    code = Code.INVALID_ARGUMENT
    msg_template = "MissingKey: encrypted channel requires a cipher key"


class MalformedCommandText(BaseError):
    code = Code.INVALID_ARGUMENT

    def __init__(self, command_text: str):
        self.command_text = command_text


class UnknownCommand(BaseError):
    code = Code.NOT_FOUND

    def __init__(self, command_text: str):
        self.command_text = command_text


class ReservedActivationCommand(BaseError):
    code = Code.INVALID_ARGUMENT

    def __init__(self, activation_command: str):
        self.activation_command = activation_command


class AlreadyBlocked(BaseError):
    code = Code.ALREADY_EXISTS

    def __init__(self, number: str):
        self.number = number


class NotBooted(BaseError):
    code = Code.PERMISSION_DENIED

    def __init__(self, msisdn: str):
        self.msisdn = msisdn


class AlreadyBooted(BaseError):
    code = Code.ALREADY_EXISTS

    def __init__(self, msisdn: str):
        self.msisdn = msisdn


class DeviceBooted(BaseError):
    """SIM swaps only happen while the device is powered off."""

    code = Code.PERMISSION_DENIED

    def __init__(self, msisdn: str):
        self.msisdn = msisdn


class NotLocked(BaseError):
    code = Code.PERMISSION_DENIED

    def __init__(self, msisdn: str):
        self.msisdn = msisdn


class EmptyQuery(BaseError):
    code = Code.INVALID_ARGUMENT
    msg_template = "EmptyQuery: contact search needs a non-empty query"


class DeviceFileParseError(BaseError):
    code = Code.INVALID_ARGUMENT
    msg_template = "DeviceFileParseError: line {line_number}: {reason}"

    def __init__(self, line_number: int, reason: str):
        self.line_number = line_number
        self.reason = reason


class SelfTarget(BaseError):
    code = Code.INVALID_ARGUMENT

    def __init__(self, number: str):
        self.number = number


class NotConnected(BaseError):
    code = Code.UNAUTHENTICATED

    def __init__(self, phase: str):
        self.phase = phase


class UiLocked(BaseError):
    code = Code.UNAUTHENTICATED
    msg_template = "UiLocked: unlock the client with the temporary PIN first"


class UnsupportedToggle(BaseError):
    """Flight mode is only left through a local unlock."""

    code = Code.INVALID_ARGUMENT

    def __init__(self, feature: str, on: bool):
        self.feature = feature
        self.on = on
