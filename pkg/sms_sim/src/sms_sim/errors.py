from __future__ import annotations

from zero_3rdparty.error import BaseError, Code


class DuplicateNumber(BaseError):
    code = Code.ALREADY_EXISTS

    def __init__(self, msisdn: str, registered_by: str):
        self.msisdn = msisdn
        self.registered_by = registered_by


class DuplicateName(BaseError):
    code = Code.ALREADY_EXISTS

    def __init__(self, name: str):
        self.name = name


class UnknownEndpoint(BaseError):
    code = Code.NOT_FOUND

    def __init__(self, name: str, expected: str = "endpoint"):
        self.name = name
        self.expected = expected


class ScenarioParseError(BaseError):
    code = Code.INVALID_ARGUMENT
    msg_template = "line {line_number}: {reason}: {line}"

    def __init__(self, line_number: int, line: str, reason: str):
        self.line_number = line_number
        self.line = line
        self.reason = reason


class InvalidDuration(BaseError):
    code = Code.INVALID_ARGUMENT

    def __init__(self, duration: str):
        self.duration = duration
