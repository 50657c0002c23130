"""Subscribers attached to the simulated network."""
from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from random import Random
from typing import Optional

from sms_remote import agent, client
from sms_remote.client import ClientState
from sms_remote.constants import Channel
from sms_remote.device import DeviceState, is_reachable
from sms_remote.effects import Effect, LogEntry, SendSms, SmsMessage
from sms_remote.protocol import SharedSecret

logger = logging.getLogger(__name__)


class Endpoint(ABC):
    name: str

    @property
    @abstractmethod
    def msisdn(self) -> str:
        ...

    @property
    def reachable(self) -> bool:
        return True

    @property
    def unreachable_reason(self) -> str:
        return ""

    @abstractmethod
    def on_sms(self, msg: SmsMessage, now: int) -> list[Effect]:
        ...

    def on_call(self, caller: str, now: int) -> list[Effect]:
        return []


@dataclass
class DeviceEndpoint(Endpoint):
    name: str
    state: DeviceState

    @property
    def msisdn(self) -> str:
        return self.state.msisdn

    @property
    def reachable(self) -> bool:
        return is_reachable(self.state)

    @property
    def unreachable_reason(self) -> str:
        return "UNDELIVERED-OFF" if not self.state.booted else "UNDELIVERED-FLIGHT"

    def on_sms(self, msg: SmsMessage, now: int) -> list[Effect]:
        return agent.handle_sms(self.state, msg, now)

    def on_call(self, caller: str, now: int) -> list[Effect]:
        return agent.handle_call(self.state, caller, now)

    def on_gps_tick(self, now: int) -> list[Effect]:
        return agent.gps_tick(self.state, now)


@dataclass
class ClientEndpoint(Endpoint):
    """A smartphone running the client; `state` is set once it connects."""

    name: str
    number: str
    target: str
    secret: SharedSecret
    channel: Channel
    rng: Random
    state: Optional[ClientState] = None

    @property
    def msisdn(self) -> str:
        return self.number

    def begin(self, server: str) -> SendSms:
        self.state, request = client.begin_connection(
            server, self.secret, self.channel, own_number=self.number
        )
        return request

    def on_sms(self, msg: SmsMessage, now: int) -> list[Effect]:
        if self.state is None:
            return [LogEntry(text=f"IGNORED {msg.sender}")]
        return client.handle_inbound(self.state, msg, self.rng)


@dataclass
class RawHandset(Endpoint):
    """An ordinary phone: keeps whatever it receives."""

    name: str
    number: str
    received: list[SmsMessage] = field(default_factory=list)

    @property
    def msisdn(self) -> str:
        return self.number

    def on_sms(self, msg: SmsMessage, now: int) -> list[Effect]:
        self.received.append(msg)
        return []
