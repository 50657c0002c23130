"""Deterministic SMS and call network driven by a logical clock.

Events are processed in `(due_at, seq)` order where `seq` is a global
submission counter, so events due at the same second are delivered FIFO.
"""
from __future__ import annotations

import heapq
import logging
from dataclasses import dataclass, field
from itertools import count
from random import Random
from typing import Callable, Iterable, Optional, TypeVar, Union

from typing_extensions import TypeAlias

from model_lib import Event
from sms_remote import agent, device
from sms_remote.device import DeviceState
from sms_remote.effects import Effect, LogEntry, SendSms, SmsMessage
from sms_remote.guard import normalize
from sms_sim.endpoints import ClientEndpoint, DeviceEndpoint, Endpoint, RawHandset
from sms_sim.errors import DuplicateName, DuplicateNumber, UnknownEndpoint
from sms_sim.settings import SimSettings
from sms_sim.transcript import TranscriptEntry, call_entry, log_entry, sms_entry

logger = logging.getLogger(__name__)
EndpointT = TypeVar("EndpointT", bound=Endpoint)


class DeliverSms(Event):
    message: SmsMessage


class DeliverCall(Event):
    caller: str
    callee: str


class GpsTick(Event):
    device: str


NetworkPayload: TypeAlias = Union[DeliverSms, DeliverCall, GpsTick]


@dataclass(order=True)
class NetworkEvent:
    due_at: int
    seq: int
    payload: NetworkPayload = field(compare=False)


@dataclass
class Clock:
    now: int = 0

    def advance_to(self, when: int) -> None:
        if when < self.now:
            raise ValueError(f"clock cannot go back from {self.now} to {when}")
        self.now = when


def loss_rng(seed: int) -> Random:
    return Random(f"loss:{seed}")


class SimNetwork:
    def __init__(self, settings: SimSettings | None = None, seed: int | None = None):
        self.settings = settings or SimSettings()
        self.clock = Clock()
        self.transcript: list[TranscriptEntry] = []
        self.listeners: list[Callable[[TranscriptEntry], None]] = []
        self._queue: list[NetworkEvent] = []
        self._seq = count()
        self._endpoints: dict[str, Endpoint] = {}
        self._numbers: dict[str, str] = {}
        self._returned = 0
        self.reseed(self.settings.seed if seed is None else seed)

    @property
    def now(self) -> int:
        return self.clock.now

    def reseed(self, seed: int) -> None:
        self.seed = seed
        self._loss_rng = loss_rng(seed)

    def _record(self, entry: TranscriptEntry) -> None:
        self.transcript.append(entry)
        for listener in self.listeners:
            listener(entry)

    def log(self, text: str) -> None:
        self._record(log_entry(self.now, text))

    def _schedule(self, due_at: int, payload: NetworkPayload) -> None:
        heapq.heappush(self._queue, NetworkEvent(due_at, next(self._seq), payload))

    def register(self, endpoint: Endpoint) -> None:
        if endpoint.name in self._endpoints:
            raise DuplicateName(endpoint.name)
        self._claim_number(endpoint.msisdn, endpoint.name)
        self._endpoints[endpoint.name] = endpoint
        logger.debug(f"registered {endpoint.name} at {endpoint.msisdn}")
        if isinstance(endpoint, DeviceEndpoint):
            self._schedule(
                self.now + self.settings.gps_tick_seconds, GpsTick(device=endpoint.name)
            )

    def _claim_number(self, msisdn: str, name: str) -> None:
        key = normalize(msisdn)
        if (owner := self._numbers.get(key)) and owner != name:
            raise DuplicateNumber(msisdn, owner)
        self._numbers[key] = name

    def endpoint(self, name: str) -> Endpoint:
        try:
            return self._endpoints[name]
        except KeyError as e:
            raise UnknownEndpoint(name) from e

    def _typed(self, name: str, endpoint_type: type[EndpointT]) -> EndpointT:
        endpoint = self.endpoint(name)
        if not isinstance(endpoint, endpoint_type):
            raise UnknownEndpoint(name, expected=endpoint_type.__name__)
        return endpoint

    def device(self, name: str) -> DeviceEndpoint:
        return self._typed(name, DeviceEndpoint)

    def client(self, name: str) -> ClientEndpoint:
        return self._typed(name, ClientEndpoint)

    def handset(self, name: str) -> RawHandset:
        return self._typed(name, RawHandset)

    def has_endpoint(self, name: str) -> bool:
        return name in self._endpoints

    def by_number(self, msisdn: str) -> Optional[Endpoint]:
        if name := self._numbers.get(normalize(msisdn)):
            return self._endpoints[name]
        return None

    def devices(self) -> Iterable[DeviceState]:
        return [
            endpoint.state
            for endpoint in self._endpoints.values()
            if isinstance(endpoint, DeviceEndpoint)
        ]

    def submit_sms(self, sender: str, to: str, body: str) -> None:
        message = SmsMessage(sender=sender, recipient=to, body=body, at=self.now)
        self._schedule(
            self.now + self.settings.delivery_delay_seconds, DeliverSms(message=message)
        )

    def submit_call(self, caller: str, callee: str) -> None:
        self._schedule(
            self.now + self.settings.delivery_delay_seconds,
            DeliverCall(caller=caller, callee=callee),
        )

    def power_on(self, name: str) -> None:
        endpoint = self.device(name)
        self._apply_effects(endpoint, agent.handle_boot(endpoint.state, self.now))

    def power_off(self, name: str) -> None:
        device.power_off(self.device(name).state)

    def swap_sim(self, name: str, new_sim: str, new_msisdn: str) -> None:
        endpoint = self.device(name)
        old_sim, old_msisdn = endpoint.state.sim_id, endpoint.msisdn
        device.swap_sim(endpoint.state, new_sim, new_msisdn)
        try:
            self._claim_number(new_msisdn, name)
        except DuplicateNumber:
            device.swap_sim(endpoint.state, old_sim, old_msisdn)
            raise
        if normalize(old_msisdn) != normalize(new_msisdn):
            self._numbers.pop(normalize(old_msisdn), None)

    def _apply_effects(self, endpoint: Endpoint, effects: list[Effect]) -> None:
        for effect in effects:
            if isinstance(effect, SendSms):
                self.submit_sms(endpoint.msisdn, effect.to, effect.body)
            elif isinstance(effect, LogEntry):
                self.log(f"{endpoint.msisdn} {effect.text}")

    def _target(self, sender: str, to: str) -> Optional[Endpoint]:
        target = self.by_number(to)
        if target is None:
            self.log(f"UNKNOWN-NUMBER {sender}->{to}")
            return None
        if self.settings.loss_rate and self._loss_rng.random() < self.settings.loss_rate:
            self.log(f"LOST {sender}->{to}")
            return None
        if not target.reachable:
            logger.info(f"{to} unreachable, dropping from {sender}")
            self.log(f"{target.unreachable_reason} {sender}->{to}")
            return None
        return target

    def _deliver(self, payload: NetworkPayload) -> None:
        match payload:
            case DeliverSms(message=message):
                message = message.model_copy(update={"at": self.now})
                if target := self._target(message.sender, message.recipient):
                    self._record(
                        sms_entry(
                            self.now, message.sender, message.recipient, message.body
                        )
                    )
                    self._apply_effects(target, target.on_sms(message, self.now))
            case DeliverCall(caller=caller, callee=callee):
                if target := self._target(caller, callee):
                    self._record(call_entry(self.now, caller, callee))
                    self._apply_effects(target, target.on_call(caller, self.now))
            case GpsTick(device=name):
                if endpoint := self._endpoints.get(name):
                    assert isinstance(endpoint, DeviceEndpoint)
                    self._apply_effects(endpoint, endpoint.on_gps_tick(self.now))
                    self._schedule(
                        self.now + self.settings.gps_tick_seconds, GpsTick(device=name)
                    )

    def advance(self, duration: int) -> list[TranscriptEntry]:
        if duration < 0:
            raise ValueError(f"duration must be >= 0, got {duration}")
        until = self.now + duration
        while self._queue and self._queue[0].due_at <= until:
            event = heapq.heappop(self._queue)
            self.clock.advance_to(event.due_at)
            self._deliver(event.payload)
        self.clock.advance_to(until)
        return self.drain()

    def drain(self) -> list[TranscriptEntry]:
        """Entries recorded since the previous call."""
        entries = self.transcript[self._returned :]
        self._returned = len(self.transcript)
        return entries
