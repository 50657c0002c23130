from random import Random

import pytest

from sms_remote.client import (
    ClientState,
    MirroredSms,
    MissedCall,
    begin_connection,
    handle_inbound,
    request,
    unlock_ui,
)
from sms_remote.command import Command, CommandKind
from sms_remote.constants import Channel, ClientPhase, UnlockResult
from sms_remote.effects import LogEntry, SmsMessage, split_reply
from sms_remote.errors import NotConnected, SelfTarget, UiLocked
from sms_remote.protocol import decode_frame, seal_reply

from .conftest import PEER, SERVER, STRANGER


def inbound(c: ClientState, body: str, sender: str = SERVER, seed: int = 0):
    return handle_inbound(c, SmsMessage(sender=sender, recipient=PEER, body=body), Random(seed))


def logs(effects) -> list[str]:
    return [e.text for e in effects if isinstance(e, LogEntry)]


@pytest.fixture()
def active(secret) -> ClientState:
    c, _ = begin_connection(SERVER, secret, Channel.PLAIN)
    inbound(c, f"CONNECTED {SERVER}")
    assert unlock_ui(c, c.temp_pin) == UnlockResult.OK
    return c


def test_begin_connection_plain(secret):
    c, sms = begin_connection(SERVER, secret, Channel.PLAIN, own_number=PEER)
    assert sms.to == SERVER
    assert sms.body == "$MYDOB 1989"
    assert c.phase == ClientPhase.AWAITING_CONFIRMATION
    assert c.ui_locked


def test_begin_connection_encrypted(secret):
    c, sms = begin_connection(SERVER, secret, Channel.ENCRYPTED)
    assert sms.body.startswith("$$")
    assert decode_frame(sms.body, c.key).command_text == "$MYDOB 1989"


def test_begin_connection_to_self(secret):
    with pytest.raises(SelfTarget):
        begin_connection(SERVER, secret, Channel.PLAIN, own_number="919000000001")


def test_confirmation_issues_temp_pin(secret):
    c, _ = begin_connection(SERVER, secret, Channel.PLAIN)
    assert logs(inbound(c, "OK $WIFI-ON")) == ["IGNORED-UNCONFIRMED OK"]
    effects = inbound(c, f"CONNECTED {SERVER}", seed=5)
    assert c.phase == ClientPhase.ACTIVE
    assert logs(effects) == [f"TEMP-PIN {c.temp_pin}"]
    assert len(c.temp_pin) == 4 and c.temp_pin.isdigit()
    assert c.ui_locked


def test_encrypted_confirmation(secret):
    c, _ = begin_connection(SERVER, secret, Channel.ENCRYPTED)
    inbound(c, seal_reply(f"CONNECTED {SERVER}", Channel.ENCRYPTED, c.key))
    assert c.phase == ClientPhase.ACTIVE


def test_non_server_sender_ignored(active):
    assert logs(inbound(active, "CALL-ALERT x y", sender=STRANGER)) == [
        f"IGNORED {STRANGER}"
    ]
    assert active.missed_calls == []


def test_mirrors(active):
    inbound(active, f"CALL-ALERT {STRANGER} 2012-01-01T00:10:00Z")
    inbound(active, f"SMS-FROM {STRANGER}: hi: there")
    inbound(active, "CONTACT Senthilraja +919000000100 r@x.com")
    inbound(active, "LOC 12.0,79.8 2012-01-01T00:10:00Z")
    inbound(active, "OK $WIFI-ON")
    assert active.missed_calls == [
        MissedCall(number=STRANGER, at="2012-01-01T00:10:00Z")
    ]
    assert active.inbox_mirror == [MirroredSms(sender=STRANGER, body="hi: there")]
    assert active.contact_results == ["Senthilraja +919000000100 r@x.com"]
    assert active.location_reports == ["12.0,79.8 2012-01-01T00:10:00Z"]
    assert active.replies == ["OK $WIFI-ON"]
    assert logs(inbound(active, "WHAT is this")) == ["UNRECOGNIZED WHAT is this"]


def test_alerts(active):
    alert = f"INTRUDER {STRANGER} BLOCKED"
    assert logs(inbound(active, alert)) == [f"ALERT {alert}"]
    assert active.alerts == [alert]


def test_sign_off_ends_session(active):
    assert inbound(active, "SIGNED-OFF") == []
    assert active.phase == ClientPhase.ENDED
    assert active.ui_locked
    with pytest.raises(NotConnected):
        request(active, Command.of(CommandKind.WIFI_ON))


def test_split_reply_is_reassembled(active):
    text = "CONTACT " + "y" * 300
    parts = split_reply(text)
    assert len(parts) > 1
    for part in reversed(parts[1:]):
        assert inbound(active, part) == []
    inbound(active, parts[0])
    assert active.contact_results == ["y" * 300]
    assert active.pending_parts == {}


def test_sim_change_from_new_number(active):
    new_number = "+919000000077"
    alert = f"SIM-CHANGED old=SIM-919000000001 new=SIM-THIEF number={new_number}"
    assert logs(inbound(active, alert, sender=new_number)) == [f"ALERT {alert}"]
    forged = "SIM-CHANGED old=a new=b number=+919000000001"
    assert logs(inbound(active, forged, sender=STRANGER)) == [f"IGNORED {STRANGER}"]
    assert active.alerts == [alert]


def test_request_errors(secret):
    c, _ = begin_connection(SERVER, secret, Channel.PLAIN)
    with pytest.raises(NotConnected):
        request(c, Command.of(CommandKind.WIFI_ON))
    inbound(c, f"CONNECTED {SERVER}")
    with pytest.raises(UiLocked):
        request(c, Command.of(CommandKind.WIFI_ON))


def test_request_encrypted_wipeout(secret):
    c, _ = begin_connection(SERVER, secret, Channel.ENCRYPTED)
    inbound(c, seal_reply(f"CONNECTED {SERVER}", Channel.ENCRYPTED, c.key))
    unlock_ui(c, c.temp_pin)
    sms = request(c, Command.of(CommandKind.WIPEOUT))
    assert sms.body.startswith("$$")
    assert decode_frame(sms.body, c.key).command_text == "$WIPEOUT"


def test_request_plain(active):
    assert request(active, Command.contact_lookup("raja")).body == "$CONTACT raja"


def test_unlock_ui(secret):
    c, _ = begin_connection(SERVER, secret, Channel.PLAIN)
    with pytest.raises(NotConnected):
        unlock_ui(c, "0000")
    inbound(c, f"CONNECTED {SERVER}")
    wrong = "0000" if c.temp_pin != "0000" else "1111"
    for _ in range(3):
        assert unlock_ui(c, wrong) == UnlockResult.WRONG_PIN
    assert c.ui_locked
    assert unlock_ui(c, c.temp_pin) == UnlockResult.OK
    assert not c.ui_locked
