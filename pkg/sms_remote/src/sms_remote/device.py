"""The simulated protected phone.

Everything under `contacts`, `inbox`, `call_log` and `user_files` is user data
and disappears on wipeout; `settings` and `guard` live in application storage
and survive it.
"""
from __future__ import annotations

import logging
from typing import Optional

from pydantic import Field, model_validator

from model_lib import Entity, Event
from sms_remote.command import RESERVED_ACTIVATION_COMMANDS
from sms_remote.constants import (
    MAX_CONTACT_RESULTS,
    MSISDN_REGEX,
    PIN_REGEX,
    Channel,
    Feature,
    UnlockResult,
)
from sms_remote.effects import SmsMessage
from sms_remote.errors import (
    DeviceBooted,
    EmptyQuery,
    NotBooted,
    NotLocked,
    ReservedActivationCommand,
    UnsupportedToggle,
)
from sms_remote.guard import GuardState, normalize, same_number
from sms_remote.protocol import CipherKey, SharedSecret, derive_key

logger = logging.getLogger(__name__)


class Contact(Event):
    name: str = Field(min_length=1)
    mobile: str = Field(pattern=MSISDN_REGEX)
    email: str = ""


class Location(Event):
    lat: float = Field(ge=-90, le=90)
    lon: float = Field(ge=-180, le=180)

    def render(self) -> str:
        return f"{self.lat},{self.lon}"


class CallRecord(Event):
    caller: str
    at: int = Field(ge=0)


class Session(Event):
    peer: str = Field(pattern=MSISDN_REGEX)
    channel: Channel
    since: int = Field(ge=0)


class Settings(Entity):
    secret: SharedSecret
    login_pin: str = Field(pattern=PIN_REGEX)
    call_alert: bool = False
    sms_divert: bool = False
    auto_reply: Optional[str] = None
    session: Optional[Session] = None
    trusted_remote: Optional[str] = None

    @model_validator(mode="after")
    def session_peer_is_trusted(self) -> Settings:
        session = self.session
        if session and not (
            self.trusted_remote and same_number(session.peer, self.trusted_remote)
        ):
            raise ValueError(
                f"session peer {session.peer} must be the trusted remote, got {self.trusted_remote}"
            )
        return self

    @property
    def key(self) -> CipherKey:
        return derive_key(self.secret)


class DeviceState(Entity):
    msisdn: str = Field(pattern=MSISDN_REGEX)
    sim_id: str = Field(min_length=1)
    booted: bool = False
    locked: bool = False
    profile_silent: bool = False
    wifi_on: bool = False
    gps_tracking: bool = False
    flight_mode: bool = False
    location: Optional[Location] = None
    contacts: list[Contact] = Field(default_factory=list)
    inbox: list[SmsMessage] = Field(default_factory=list)
    call_log: list[CallRecord] = Field(default_factory=list)
    user_files: list[str] = Field(default_factory=list)
    settings: Settings
    guard: GuardState = Field(default_factory=GuardState)
    last_boot_sim: str = Field(min_length=1)

    @property
    def session(self) -> Optional[Session]:
        return self.settings.session

    @property
    def has_session(self) -> bool:
        return self.settings.session is not None

    def is_peer(self, number: str) -> bool:
        session = self.settings.session
        return session is not None and same_number(session.peer, number)


def default_sim_id(msisdn: str) -> str:
    """
    >>> default_sim_id("+919000000001")
    'SIM-919000000001'
    """
    return f"SIM-{normalize(msisdn)}"


def provision_device(
    msisdn: str,
    secret: SharedSecret,
    login_pin: str,
    sim_id: str | None = None,
) -> DeviceState:
    if secret.activation_command in RESERVED_ACTIVATION_COMMANDS:
        raise ReservedActivationCommand(secret.activation_command)
    sim_id = sim_id or default_sim_id(msisdn)
    return DeviceState(
        msisdn=msisdn,
        sim_id=sim_id,
        last_boot_sim=sim_id,
        settings=Settings(secret=secret, login_pin=login_pin),
    )


def _ensure_booted(d: DeviceState) -> None:
    if not d.booted:
        raise NotBooted(d.msisdn)


def apply_toggle(d: DeviceState, feature: Feature, on: bool) -> None:
    _ensure_booted(d)
    match feature:
        case Feature.SILENT:
            d.profile_silent = on
        case Feature.WIFI:
            d.wifi_on = on
        case Feature.GPS:
            d.gps_tracking = on
        case Feature.FLIGHT:
            if not on:
                raise UnsupportedToggle(feature, on)
            d.flight_mode = True
            logger.info(f"{d.msisdn} isolated by flight mode")


def lock(d: DeviceState) -> None:
    _ensure_booted(d)
    d.locked = True


def unlock(d: DeviceState, pin: str) -> UnlockResult:
    if not d.locked:
        raise NotLocked(d.msisdn)
    if pin != d.settings.login_pin:
        return UnlockResult.WRONG_PIN
    d.locked = False
    if d.settings.session:
        logger.info(f"{d.msisdn} session with {d.settings.session.peer} ended locally")
    d.settings.session = None
    d.flight_mode = False
    return UnlockResult.OK


def open_session(d: DeviceState, peer: str, channel: Channel, now: int) -> Session:
    session = Session(peer=peer, channel=channel, since=now)
    d.settings.trusted_remote = peer
    d.settings.session = session
    lock(d)
    return session


def close_session(d: DeviceState) -> None:
    """Ends the remote session and the lock it caused."""
    d.settings.session = None
    d.locked = False


def wipeout(d: DeviceState) -> None:
    _ensure_booted(d)
    d.contacts = []
    d.inbox = []
    d.call_log = []
    d.user_files = []
    logger.info(f"{d.msisdn} user data wiped")


def search_contacts(d: DeviceState, query: str) -> list[Contact]:
    needle = query.strip().casefold()
    if not needle:
        raise EmptyQuery()
    matches = (contact for contact in d.contacts if needle in contact.name.casefold())
    return [contact for contact, _ in zip(matches, range(MAX_CONTACT_RESULTS))]


def swap_sim(d: DeviceState, new_sim: str, new_msisdn: str) -> None:
    if d.booted:
        raise DeviceBooted(d.msisdn)
    d.sim_id = new_sim
    d.msisdn = new_msisdn


def power_off(d: DeviceState) -> None:
    _ensure_booted(d)
    d.booted = False


def is_reachable(d: DeviceState) -> bool:
    return d.booted and not d.flight_mode
