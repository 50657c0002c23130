"""Executes scenario directives against a `SimNetwork`.

Domain errors raised by a directive are recorded as failures and the run
continues. `expect` searches forward from a cursor for the next matching
transcript entry.
"""
from __future__ import annotations

import logging
from functools import singledispatchmethod
from pathlib import Path
from random import Random
from typing import Callable, Iterable, Optional, TextIO

from pydantic import ValidationError

from model_lib import Event
from sms_remote import client, device, guard, persistence
from sms_remote.client import ClientState
from sms_remote.constants import ClientPhase
from sms_remote.device import Contact, DeviceState, Location
from sms_remote.errors import NotConnected
from sms_remote.guard import same_number
from sms_sim.endpoints import ClientEndpoint, DeviceEndpoint, RawHandset
from sms_sim.errors import ScenarioParseError
from sms_sim.scenario import (
    NO_SESSION,
    AdvanceDirective,
    AssertDirective,
    BootDirective,
    CallDirective,
    ClearBlockedDirective,
    ClientDirective,
    ConnectDirective,
    ContactDirective,
    DeviceDirective,
    Directive,
    ExpectDirective,
    FileDirective,
    HandsetDirective,
    LocateDirective,
    RequestDirective,
    Scenario,
    SeedDirective,
    ShutdownDirective,
    SimSwapDirective,
    SmsDirective,
    UnlockDirective,
    UnlockUiDirective,
    load_scenario,
)
from sms_sim.settings import SimSettings
from sms_sim.simnet import SimNetwork
from sms_sim.transcript import TranscriptEntry, TranscriptKind, wildcard_match
from zero_3rdparty.error import BaseError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_PARSE_ERROR = 2
TranscriptSink = Callable[[str], None]


class RunFailure(Event):
    line_number: int
    line: str
    reason: str

    def render(self) -> str:
        return f"FAILED line {self.line_number}: {self.reason}: {self.line}"


def client_rng(seed: int, name: str) -> Random:
    return Random(f"{seed}:{name}")


def _device_flags(d: DeviceState) -> dict[str, bool]:
    return {
        "locked": d.locked,
        "unlocked": not d.locked,
        "wifi-on": d.wifi_on,
        "wifi-off": not d.wifi_on,
        "silent": d.profile_silent,
        "not-silent": not d.profile_silent,
        "flight": d.flight_mode,
        "gps-on": d.gps_tracking,
        "gps-off": not d.gps_tracking,
        "reachable": device.is_reachable(d),
        "unreachable": not device.is_reachable(d),
    }


def _device_counts(d: DeviceState) -> dict[str, int]:
    return {
        "contacts": len(d.contacts),
        "inbox": len(d.inbox),
        "calllog": len(d.call_log),
        "files": len(d.user_files),
    }


def _client_flags(c: Optional[ClientState]) -> dict[str, bool]:
    phase = c.phase if c else None
    ui_locked = c is None or c.ui_locked
    return {
        "awaiting": phase == ClientPhase.AWAITING_CONFIRMATION,
        "active": phase == ClientPhase.ACTIVE,
        "ended": phase == ClientPhase.ENDED,
        "ui-locked": ui_locked,
        "ui-unlocked": not ui_locked,
    }


def _client_counts(c: Optional[ClientState]) -> dict[str, int]:
    if c is None:
        return dict.fromkeys(["missed", "mirror", "contacts", "locations", "alerts"], 0)
    return {
        "missed": len(c.missed_calls),
        "mirror": len(c.inbox_mirror),
        "contacts": len(c.contact_results),
        "locations": len(c.location_reports),
        "alerts": len(c.alerts),
    }


def _on_flags(flags: dict[str, bool]) -> str:
    return ",".join(name for name, on in flags.items() if on)


class ScenarioRunner:
    def __init__(
        self,
        settings: SimSettings | None = None,
        seed_override: int | None = None,
        sinks: Iterable[TranscriptSink] = (),
    ):
        self.settings = settings or SimSettings()
        self.seed_locked = seed_override is not None
        self.network = SimNetwork(self.settings, seed=seed_override)
        self.sinks = list(sinks)
        self.failures: list[RunFailure] = []
        self._expect_cursor = 0
        self.network.listeners.append(self._emit)

    def _emit(self, entry: TranscriptEntry) -> None:
        line = entry.render()
        for sink in self.sinks:
            sink(line)

    @property
    def exit_code(self) -> int:
        return EXIT_FAILED if self.failures else EXIT_OK

    def resolve(self, token: str) -> str:
        if self.network.has_endpoint(token):
            return self.network.endpoint(token).msisdn
        return token

    def run(self, scenario: Scenario) -> int:
        for directive in scenario.directives:
            self.apply(directive)
        return self.exit_code

    def apply(self, directive: Directive) -> Optional[RunFailure]:
        """Returns the failure this directive recorded, if any."""
        recorded = len(self.failures)
        try:
            self._apply(directive)
        except (BaseError, ValidationError) as e:
            return self.fail(directive, str(e))
        if len(self.failures) > recorded:
            return self.failures[-1]
        return None

    def fail(self, directive: Directive, reason: str) -> RunFailure:
        failure = RunFailure(
            line_number=directive.line_number, line=directive.line, reason=reason
        )
        logger.warning(failure.render())
        self.failures.append(failure)
        return failure

    def _log(self, msisdn: str, text: str) -> None:
        self.network.log(f"{msisdn} {text}")

    def _device_state(self, name: str) -> DeviceState:
        return self.network.device(name).state

    @singledispatchmethod
    def _apply(self, directive: Directive) -> None:
        raise NotImplementedError(f"no handler for {type(directive).__name__}")

    @_apply.register
    def _seed(self, directive: SeedDirective) -> None:
        if self.seed_locked:
            logger.info(f"ignoring seed {directive.seed}, --seed {self.network.seed} wins")
            return
        self.network.reseed(directive.seed)

    @_apply.register
    def _device(self, directive: DeviceDirective) -> None:
        state = self._restore(directive.msisdn)
        if state is None:
            state = device.provision_device(
                directive.msisdn,
                directive.secret,
                directive.login_pin,
                sim_id=directive.sim,
            )
        self.network.register(DeviceEndpoint(name=directive.name, state=state))

    def _restore(self, msisdn: str) -> Optional[DeviceState]:
        state_dir = self.settings.state_dir
        if state_dir is None:
            return None
        path = persistence.device_file_path(state_dir, msisdn)
        if not path.exists():
            return None
        state = persistence.load_device_file(path)
        state.booted = False
        logger.info(f"restored {msisdn} from {path}")
        return state

    @_apply.register
    def _client(self, directive: ClientDirective) -> None:
        target = self._device_state(directive.target)
        endpoint = ClientEndpoint(
            name=directive.name,
            number=directive.msisdn,
            target=directive.target,
            secret=target.settings.secret,
            channel=directive.channel,
            rng=client_rng(self.network.seed, directive.name),
        )
        self.network.register(endpoint)

    @_apply.register
    def _handset(self, directive: HandsetDirective) -> None:
        self.network.register(RawHandset(name=directive.name, number=directive.msisdn))

    @_apply.register
    def _contact(self, directive: ContactDirective) -> None:
        contact = Contact(
            name=directive.contact_name, mobile=directive.mobile, email=directive.email
        )
        self._device_state(directive.device).contacts.append(contact)

    @_apply.register
    def _locate(self, directive: LocateDirective) -> None:
        location = Location(lat=directive.lat, lon=directive.lon)
        self._device_state(directive.device).location = location

    @_apply.register
    def _boot(self, directive: BootDirective) -> None:
        self.network.power_on(directive.device)

    @_apply.register
    def _shutdown(self, directive: ShutdownDirective) -> None:
        self.network.power_off(directive.device)

    @_apply.register
    def _simswap(self, directive: SimSwapDirective) -> None:
        self.network.swap_sim(directive.device, directive.sim, directive.msisdn)

    @_apply.register
    def _sms(self, directive: SmsDirective) -> None:
        self.network.submit_sms(
            self.resolve(directive.sender),
            self.resolve(directive.recipient),
            directive.body,
        )

    @_apply.register
    def _call(self, directive: CallDirective) -> None:
        self.network.submit_call(
            self.resolve(directive.caller), self.resolve(directive.callee)
        )

    @_apply.register
    def _advance(self, directive: AdvanceDirective) -> None:
        self.network.advance(directive.seconds)

    @_apply.register
    def _expect(self, directive: ExpectDirective) -> None:
        transcript = self.network.transcript
        for index in range(self._expect_cursor, len(transcript)):
            if self._matches(directive, transcript[index]):
                self._expect_cursor = index + 1
                return
        self.fail(directive, "no matching transcript entry")

    def _matches(self, directive: ExpectDirective, entry: TranscriptEntry) -> bool:
        if entry.kind != directive.kind:
            return False
        if directive.kind == TranscriptKind.SMS and not (
            same_number(entry.sender, self.resolve(directive.sender))
            and same_number(entry.recipient, self.resolve(directive.recipient))
        ):
            return False
        return wildcard_match(directive.pattern, entry.text)

    @_apply.register
    def _assert(self, directive: AssertDirective) -> None:
        endpoint = self.network.endpoint(directive.target)
        if isinstance(endpoint, DeviceEndpoint):
            ok, actual = self._check_device(endpoint.state, directive)
        elif isinstance(endpoint, ClientEndpoint):
            ok, actual = self._check_client(endpoint.state, directive)
        else:
            ok, actual = False, type(endpoint).__name__
        if not ok:
            expected = directive.check
            if directive.value is not None:
                expected = f"{directive.check}={directive.value}"
            self.fail(directive, f"expected {expected}, actual {actual}")

    def _check_device(
        self, d: DeviceState, directive: AssertDirective
    ) -> tuple[bool, str]:
        check, value = directive.check, directive.value
        if value is None:
            flags = _device_flags(d)
            return flags[check], _on_flags(flags)
        counts = _device_counts(d)
        if check in counts:
            return counts[check] == int(value), str(counts[check])
        match check:
            case "blocked":
                return d.guard.is_blocked(self.resolve(value)), ",".join(
                    d.guard.blocked
                )
            case "warned":
                entry = d.guard.warning_for(self.resolve(value))
                active = entry is not None and not entry.expired(self.network.now)
                return active, ",".join(w.number for w in d.guard.warnings)
        peer = d.session.peer if d.session else NO_SESSION
        if value == NO_SESSION:
            return d.session is None, peer
        return d.is_peer(self.resolve(value)), peer

    def _check_client(
        self, c: Optional[ClientState], directive: AssertDirective
    ) -> tuple[bool, str]:
        check, value = directive.check, directive.value
        if value is None:
            flags = _client_flags(c)
            return flags[check], _on_flags(flags)
        counts = _client_counts(c)
        return counts[check] == int(value), str(counts[check])

    def _client_endpoint(self, name: str) -> tuple[ClientEndpoint, ClientState]:
        endpoint = self.network.client(name)
        if endpoint.state is None:
            raise NotConnected("idle")
        return endpoint, endpoint.state

    @_apply.register
    def _connect(self, directive: ConnectDirective) -> None:
        endpoint = self.network.client(directive.client)
        request = endpoint.begin(self.resolve(endpoint.target))
        self.network.submit_sms(endpoint.msisdn, request.to, request.body)

    @_apply.register
    def _request(self, directive: RequestDirective) -> None:
        endpoint, state = self._client_endpoint(directive.client)
        request = client.request(state, directive.command)
        self.network.submit_sms(endpoint.msisdn, request.to, request.body)

    @_apply.register
    def _unlock_ui(self, directive: UnlockUiDirective) -> None:
        endpoint, state = self._client_endpoint(directive.client)
        pin = directive.pin if directive.pin is not None else state.temp_pin or ""
        result = client.unlock_ui(state, pin)
        self._log(endpoint.msisdn, f"UI-UNLOCK {result.value}")

    @_apply.register
    def _unlock(self, directive: UnlockDirective) -> None:
        endpoint = self.network.device(directive.device)
        result = device.unlock(endpoint.state, directive.pin)
        self._log(endpoint.msisdn, f"UNLOCK {result.value}")

    @_apply.register
    def _clear_blocked(self, directive: ClearBlockedDirective) -> None:
        endpoint = self.network.device(directive.device)
        guard.clear_blocked(endpoint.state.guard)
        self._log(endpoint.msisdn, "BLOCKED-CLEARED")

    @_apply.register
    def _file(self, directive: FileDirective) -> None:
        self._device_state(directive.device).user_files.append(directive.file_name)

    def persist(self) -> list[Path]:
        if (state_dir := self.settings.state_dir) is None:
            return []
        return persistence.save_state_dir(state_dir, self.network.devices())


def write_transcript(path: Path, lines: list[str]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("".join(f"{line}\n" for line in lines), encoding="utf-8")
    logger.info(f"transcript written to {path}")


def run_scenario(
    path: Path,
    settings: SimSettings | None = None,
    seed_override: int | None = None,
    transcript_path: Path | None = None,
    out: TextIO | None = None,
    err: TextIO | None = None,
) -> int:
    lines: list[str] = []
    sinks: list[TranscriptSink] = [lines.append]
    if out is not None:
        sinks.append(lambda line: print(line, file=out, flush=True))
    try:
        try:
            scenario = load_scenario(path)
        except ScenarioParseError as e:
            logger.error(f"{path}: {e}")
            if err is not None:
                print(f"{path}:{e.line_number}: {e.reason}: {e.line}", file=err)
            return EXIT_PARSE_ERROR
        runner = ScenarioRunner(settings, seed_override=seed_override, sinks=sinks)
        exit_code = runner.run(scenario)
        runner.persist()
        if err is not None:
            for failure in runner.failures:
                print(failure.render(), file=err)
        return exit_code
    finally:
        if transcript_path is not None:
            write_transcript(transcript_path, lines)
