"""Scenario files: one directive per line, `#` starts a comment.

Every line is parsed, and every endpoint reference checked, before anything
runs. The same parser serves the REPL one line at a time.
"""
from __future__ import annotations

import logging
import re
import shlex
from pathlib import Path
from typing import Callable, Optional

from pydantic import Field

from model_lib import Event
from sms_remote.command import RESERVED_ACTIVATION_COMMANDS, Command, parse_command
from sms_remote.constants import PIN_REGEX, SMS_MAX_LENGTH, Channel
from sms_remote.errors import UnknownCommand
from sms_remote.guard import is_msisdn
from sms_remote.protocol import SharedSecret
from sms_sim.errors import InvalidDuration, ScenarioParseError
from sms_sim.settings import parse_duration
from sms_sim.transcript import TranscriptKind
from zero_3rdparty.iter_utils import key_equal_value_to_dict

logger = logging.getLogger(__name__)
_NAME_PATTERN = re.compile(r"^[A-Za-z][A-Za-z0-9_-]*$")
_PIN_PATTERN = re.compile(PIN_REGEX)

DEVICE_FLAG_CHECKS = frozenset(
    {
        "locked",
        "unlocked",
        "wifi-on",
        "wifi-off",
        "silent",
        "not-silent",
        "flight",
        "gps-on",
        "gps-off",
        "reachable",
        "unreachable",
    }
)
DEVICE_COUNT_CHECKS = frozenset({"contacts", "inbox", "calllog", "files"})
DEVICE_NUMBER_CHECKS = frozenset({"blocked", "warned", "session"})
CLIENT_FLAG_CHECKS = frozenset(
    {"awaiting", "active", "ended", "ui-locked", "ui-unlocked"}
)
CLIENT_COUNT_CHECKS = frozenset({"missed", "mirror", "contacts", "locations", "alerts"})
NO_SESSION = "none"


class Directive(Event):
    line_number: int = 0
    line: str = ""


class SeedDirective(Directive):
    seed: int


class DeviceDirective(Directive):
    name: str
    msisdn: str
    secret: SharedSecret
    login_pin: str
    sim: Optional[str] = None


class ClientDirective(Directive):
    name: str
    msisdn: str
    target: str
    channel: Channel


class HandsetDirective(Directive):
    name: str
    msisdn: str


class ContactDirective(Directive):
    device: str
    contact_name: str
    mobile: str
    email: str = ""


class LocateDirective(Directive):
    device: str
    lat: float = Field(ge=-90, le=90)
    lon: float = Field(ge=-180, le=180)


class BootDirective(Directive):
    device: str


class ShutdownDirective(Directive):
    device: str


class SimSwapDirective(Directive):
    device: str
    sim: str
    msisdn: str


class SmsDirective(Directive):
    sender: str
    recipient: str
    body: str = Field(max_length=SMS_MAX_LENGTH)


class CallDirective(Directive):
    caller: str
    callee: str


class AdvanceDirective(Directive):
    seconds: int = Field(ge=0)


class ExpectDirective(Directive):
    kind: TranscriptKind
    sender: str = ""
    recipient: str = ""
    pattern: str


class AssertDirective(Directive):
    target: str
    check: str
    value: Optional[str] = None


class ConnectDirective(Directive):
    client: str


class RequestDirective(Directive):
    client: str
    command: Command


class UnlockUiDirective(Directive):
    client: str
    pin: Optional[str] = None


class UnlockDirective(Directive):
    device: str
    pin: str


class ClearBlockedDirective(Directive):
    device: str


class FileDirective(Directive):
    device: str
    file_name: str


class Scenario(Event):
    directives: list[Directive] = Field(default_factory=list)
    seed: Optional[int] = None


def _expect_args(args: list[str], count: int, usage: str) -> None:
    if len(args) != count:
        raise ValueError(f"usage: {usage}")


def _options(args: list[str], required: set[str], optional: set[str] = set()) -> dict:
    if any("=" not in arg for arg in args):
        raise ValueError(f"expected key=value options, got {args}")
    options = key_equal_value_to_dict(args)
    if missing := required - options.keys():
        raise ValueError(f"missing options: {sorted(missing)}")
    if unknown := options.keys() - required - optional:
        raise ValueError(f"unknown options: {sorted(unknown)}")
    return options


class ScenarioParser:
    """Keeps the declared endpoints so later lines can be checked against them."""

    def __init__(self) -> None:
        self.devices: dict[str, DeviceDirective] = {}
        self.clients: dict[str, ClientDirective] = {}
        self.handsets: dict[str, HandsetDirective] = {}
        self.seed: Optional[int] = None
        self._parsers: dict[str, Callable[[list[str]], Directive]] = {
            "seed": self._seed,
            "device": self._device,
            "client": self._client,
            "handset": self._handset,
            "contact": self._contact,
            "locate": self._locate,
            "boot": lambda args: BootDirective(device=self._one_device(args, "boot")),
            "shutdown": lambda args: ShutdownDirective(
                device=self._one_device(args, "shutdown")
            ),
            "simswap": self._simswap,
            "sms": self._sms,
            "call": self._call,
            "advance": self._advance,
            "expect": self._expect,
            "assert": self._assert,
            "connect": self._connect,
            "request": self._request,
            "unlockui": self._unlock_ui,
            "unlock": self._unlock,
            "clearblocked": lambda args: ClearBlockedDirective(
                device=self._one_device(args, "clearblocked")
            ),
            "file": self._file,
        }

    @property
    def keywords(self) -> list[str]:
        return sorted(self._parsers)

    def parse_line(self, line: str, line_number: int) -> Optional[Directive]:
        try:
            tokens = shlex.split(line, comments=True)
        except ValueError as e:
            raise ScenarioParseError(line_number, line.strip(), str(e)) from e
        if not tokens:
            return None
        keyword, *args = tokens
        if (parser := self._parsers.get(keyword)) is None:
            raise ScenarioParseError(line_number, line.strip(), f"unknown directive {keyword!r}")
        try:
            directive = parser(args)
        except (ValueError, InvalidDuration, UnknownCommand) as e:
            raise ScenarioParseError(line_number, line.strip(), str(e)) from e
        return directive.model_copy(
            update={"line_number": line_number, "line": line.strip()}
        )

    def parse(self, text: str) -> Scenario:
        directives = [
            directive
            for line_number, line in enumerate(text.splitlines(), start=1)
            if (directive := self.parse_line(line, line_number)) is not None
        ]
        return Scenario(directives=directives, seed=self.seed)

    def _declared(self) -> set[str]:
        return self.devices.keys() | self.clients.keys() | self.handsets.keys()

    def _new_name(self, name: str) -> str:
        if not _NAME_PATTERN.match(name):
            raise ValueError(f"invalid name {name!r}")
        if name in self._declared():
            raise ValueError(f"{name!r} is already declared")
        return name

    def _number(self, msisdn: str) -> str:
        if not is_msisdn(msisdn):
            raise ValueError(f"invalid msisdn {msisdn!r}")
        return msisdn

    def _device_name(self, name: str) -> str:
        if name not in self.devices:
            raise ValueError(f"unknown device {name!r}")
        return name

    def _client_name(self, name: str) -> str:
        if name not in self.clients:
            raise ValueError(f"unknown client {name!r}")
        return name

    def _one_device(self, args: list[str], keyword: str) -> str:
        _expect_args(args, 1, f"{keyword} <device>")
        return self._device_name(args[0])

    def _seed(self, args: list[str]) -> Directive:
        _expect_args(args, 1, "seed <int>")
        directive = SeedDirective(seed=int(args[0]))
        self.seed = directive.seed
        return directive

    def _device(self, args: list[str]) -> Directive:
        if len(args) < 2:
            raise ValueError(
                "usage: device <name> <msisdn> activation=<WORD> pin=<digits> login=<digits> [sim=<id>]"
            )
        name, msisdn, *rest = args
        options = _options(rest, {"activation", "pin", "login"}, {"sim"})
        secret = SharedSecret(
            activation_command=options["activation"], activation_pin=options["pin"]
        )
        if secret.activation_command in RESERVED_ACTIVATION_COMMANDS:
            raise ValueError(f"activation {secret.activation_command} is a command")
        if not _PIN_PATTERN.match(options["login"]):
            raise ValueError(f"login pin must match {PIN_REGEX}")
        directive = DeviceDirective(
            name=self._new_name(name),
            msisdn=self._number(msisdn),
            secret=secret,
            login_pin=options["login"],
            sim=options.get("sim"),
        )
        self.devices[name] = directive
        return directive

    def _client(self, args: list[str]) -> Directive:
        if len(args) < 2:
            raise ValueError(
                "usage: client <name> <msisdn> target=<device> channel=plain|encrypted"
            )
        name, msisdn, *rest = args
        options = _options(rest, {"target", "channel"})
        directive = ClientDirective(
            name=self._new_name(name),
            msisdn=self._number(msisdn),
            target=self._device_name(options["target"]),
            channel=Channel(options["channel"]),
        )
        self.clients[name] = directive
        return directive

    def _handset(self, args: list[str]) -> Directive:
        _expect_args(args, 2, "handset <name> <msisdn>")
        name, msisdn = args
        directive = HandsetDirective(
            name=self._new_name(name), msisdn=self._number(msisdn)
        )
        self.handsets[name] = directive
        return directive

    def _contact(self, args: list[str]) -> Directive:
        if len(args) not in (3, 4):
            raise ValueError('usage: contact <device> "<name>" <msisdn> [<email>]')
        device, contact_name, mobile, *email = args
        return ContactDirective(
            device=self._device_name(device),
            contact_name=contact_name,
            mobile=self._number(mobile),
            email=email[0] if email else "",
        )

    def _locate(self, args: list[str]) -> Directive:
        _expect_args(args, 3, "locate <device> <lat> <lon>")
        device, lat, lon = args
        return LocateDirective(
            device=self._device_name(device), lat=float(lat), lon=float(lon)
        )

    def _simswap(self, args: list[str]) -> Directive:
        _expect_args(args, 3, "simswap <device> <simid> <msisdn>")
        device, sim, msisdn = args
        return SimSwapDirective(
            device=self._device_name(device), sim=sim, msisdn=self._number(msisdn)
        )

    def _sms(self, args: list[str]) -> Directive:
        _expect_args(args, 3, 'sms <from> <to> "<body>"')
        sender, recipient, body = args
        return SmsDirective(sender=sender, recipient=recipient, body=body)

    def _call(self, args: list[str]) -> Directive:
        _expect_args(args, 2, "call <from> <to>")
        caller, callee = args
        return CallDirective(caller=caller, callee=callee)

    def _advance(self, args: list[str]) -> Directive:
        _expect_args(args, 1, "advance <N>(s|m|h)")
        return AdvanceDirective(seconds=parse_duration(args[0]))

    def _expect(self, args: list[str]) -> Directive:
        match args:
            case ["sms", sender, recipient, pattern]:
                return ExpectDirective(
                    kind=TranscriptKind.SMS,
                    sender=sender,
                    recipient=recipient,
                    pattern=pattern,
                )
            case ["log", pattern]:
                return ExpectDirective(kind=TranscriptKind.LOG, pattern=pattern)
        raise ValueError('usage: expect sms <from> <to> "<body>" | expect log "<text>"')

    def _assert(self, args: list[str]) -> Directive:
        _expect_args(args, 2, "assert <name> <check>")
        target, raw_check = args
        check, separator, value = raw_check.partition("=")
        if target in self.devices:
            flags, counts, numbers = (
                DEVICE_FLAG_CHECKS,
                DEVICE_COUNT_CHECKS,
                DEVICE_NUMBER_CHECKS,
            )
        elif target in self.clients:
            flags, counts, numbers = CLIENT_FLAG_CHECKS, CLIENT_COUNT_CHECKS, frozenset()
        else:
            raise ValueError(f"unknown device or client {target!r}")
        if not separator:
            if check not in flags:
                raise ValueError(f"unknown check {check!r} for {target}")
            return AssertDirective(target=target, check=check)
        if check in counts:
            if not value.isdigit():
                raise ValueError(f"{check} needs a count, got {value!r}")
        elif check not in numbers:
            raise ValueError(f"unknown check {check!r} for {target}")
        return AssertDirective(target=target, check=check, value=value)

    def _connect(self, args: list[str]) -> Directive:
        _expect_args(args, 1, "connect <client>")
        return ConnectDirective(client=self._client_name(args[0]))

    def _request(self, args: list[str]) -> Directive:
        _expect_args(args, 2, 'request <client> "<$COMMAND>"')
        name, command_text = args
        client = self.clients[self._client_name(name)]
        activation = self.devices[client.target].secret.activation_command
        return RequestDirective(
            client=name, command=parse_command(command_text, activation)
        )

    def _unlock_ui(self, args: list[str]) -> Directive:
        if len(args) not in (1, 2):
            raise ValueError("usage: unlockui <client> [<pin>]")
        name, *pin = args
        return UnlockUiDirective(
            client=self._client_name(name), pin=pin[0] if pin else None
        )

    def _unlock(self, args: list[str]) -> Directive:
        _expect_args(args, 2, "unlock <device> <pin>")
        device, pin = args
        return UnlockDirective(device=self._device_name(device), pin=pin)

    def _file(self, args: list[str]) -> Directive:
        _expect_args(args, 2, "file <device> <name>")
        device, file_name = args
        return FileDirective(device=self._device_name(device), file_name=file_name)


def parse_scenario(text: str) -> Scenario:
    return ScenarioParser().parse(text)


def load_scenario(path: Path) -> Scenario:
    logger.info(f"loading scenario {path}")
    return parse_scenario(path.read_text(encoding="utf-8"))
