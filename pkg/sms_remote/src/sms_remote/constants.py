from __future__ import annotations

from zero_3rdparty.enum_utils import StrEnum

SMS_MAX_LENGTH = 160
PRINTABLE_FIRST = 32
PRINTABLE_LAST = 126
PRINTABLE_SIZE = PRINTABLE_LAST - PRINTABLE_FIRST + 1  # 95

ENCRYPTED_PREFIX = "$$"
COMMAND_PREFIX = "$"

WARNING_TTL_SECONDS = 48 * 60 * 60
FAILURES_BEFORE_BLOCK = 3
MAX_CONTACT_RESULTS = 5
GPS_TICK_SECONDS = 600

MSISDN_REGEX = r"^\+?[0-9]{7,15}$"
ACTIVATION_COMMAND_REGEX = r"^[A-Z]{1,16}$"
PIN_REGEX = r"^[0-9]{4,8}$"
TEMP_PIN_DIGITS = 4


class FrameKind(StrEnum):
    ENCRYPTED_COMMAND = "encrypted_command"
    PLAIN_COMMAND = "plain_command"
    ORDINARY = "ordinary"


class Channel(StrEnum):
    ENCRYPTED = "encrypted"
    PLAIN = "plain"


class Feature(StrEnum):
    SILENT = "silent"
    WIFI = "wifi"
    GPS = "gps"
    FLIGHT = "flight"


class SenderCheck(StrEnum):
    VALID = "valid"
    NOT_MSISDN = "not-msisdn"
    SELF_REQUEST = "self-request"


class SenderStatus(StrEnum):
    ALLOWED = "allowed"
    BLOCKED = "blocked"


class FailureStatus(StrEnum):
    WARNED = "warned"
    BLOCKED = "blocked"


class UnlockResult(StrEnum):
    OK = "ok"
    WRONG_PIN = "wrong_pin"


class ClientPhase(StrEnum):
    AWAITING_CONFIRMATION = "awaiting"
    ACTIVE = "active"
    ENDED = "ended"
