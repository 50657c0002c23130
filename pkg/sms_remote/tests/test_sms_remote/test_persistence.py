from random import Random

import pytest

from sms_remote.constants import Channel
from sms_remote.device import (
    CallRecord,
    Contact,
    DeviceState,
    Location,
    open_session,
    wipeout,
)
from sms_remote.effects import SmsMessage
from sms_remote.errors import DeviceFileParseError
from sms_remote.guard import record_failure
from sms_remote.persistence import (
    device_file_name,
    load,
    load_device_file,
    save,
    save_device_file,
    save_state_dir,
)

from .conftest import PEER, SERVER, STRANGER


def test_empty_store_device(device_state):
    assert save(device_state) == (
        "booted=true\n"
        "flight_mode=false\n"
        "gps_tracking=false\n"
        "last_boot_sim=SIM-919000000001\n"
        "locked=false\n"
        "msisdn=+919000000001\n"
        "profile_silent=false\n"
        "records=14\n"
        "settings.call_alert=false\n"
        "settings.login_pin=4321\n"
        "settings.secret.activation_command=MYDOB\n"
        "settings.secret.activation_pin=1989\n"
        "settings.sms_divert=false\n"
        "sim_id=SIM-919000000001\n"
        "wifi_on=false\n"
    )
    assert load(save(device_state)) == device_state


def _random_state(rng: Random, d: DeviceState) -> DeviceState:
    d = d.model_copy(deep=True)
    d.profile_silent = rng.random() < 0.5
    d.wifi_on = rng.random() < 0.5
    d.gps_tracking = rng.random() < 0.5
    if rng.random() < 0.5:
        d.location = Location(lat=rng.uniform(-90, 90), lon=rng.uniform(-180, 180))
    for i in range(rng.randint(0, 12)):
        d.contacts.append(
            Contact(name=f"Name {i}", mobile=f"+91900000{i:04d}", email=f"n{i}@x.com")
        )
    for i in range(rng.randint(0, 11)):
        body = rng.choice(["hi", "multi\nline", "back\\slash", "a=b", " padded ", ""])
        d.inbox.append(SmsMessage(sender=STRANGER, recipient=SERVER, body=body, at=i))
    for i in range(rng.randint(0, 3)):
        d.call_log.append(CallRecord(caller=STRANGER, at=i * 60))
    d.user_files = [f"file{i}.jpg" for i in range(rng.randint(0, 2))]
    if rng.random() < 0.5:
        open_session(d, PEER, rng.choice([Channel.PLAIN, Channel.ENCRYPTED]), now=7)
    if rng.random() < 0.5:
        d.settings.auto_reply = "In a meeting"
    for t in range(rng.randint(0, 3)):
        record_failure(d.guard, f"+91900000990{rng.randint(0, 2)}", t)
    return d


def test_round_trip_random_states(device_state):
    rng = Random(42)
    for _ in range(200):
        d = _random_state(rng, device_state)
        assert load(save(d)) == d


def test_wipeout_survives_round_trip(device_state):
    d = _random_state(Random(3), device_state)
    open_session(d, PEER, Channel.ENCRYPTED, now=1)
    record_failure(d.guard, STRANGER, 2)
    wipeout(d)
    restored = load(save(d))
    assert restored.contacts == restored.inbox == restored.call_log == []
    assert restored.user_files == []
    assert restored.settings == d.settings
    assert restored.guard == d.guard
    assert restored.locked


def _lines(device_state) -> list[str]:
    return save(device_state).splitlines()


@pytest.mark.parametrize(
    "mutate,line_number",
    [
        (lambda lines: lines[:-3], 13),
        (lambda lines: [line for line in lines if not line.startswith("records=")], 15),
        (lambda lines: lines[:2] + ["no separator"] + lines[2:], 3),
        (lambda lines: lines + [lines[0]], 16),
        (lambda lines: ["Bad-Key=1"] + lines, 1),
        (lambda lines: [line.replace("booted=true", "booted=maybe") for line in lines], 1),
    ],
)
def test_load_errors(device_state, mutate, line_number):
    text = "".join(f"{line}\n" for line in mutate(_lines(device_state)))
    with pytest.raises(DeviceFileParseError) as exc_info:
        load(text)
    assert exc_info.value.line_number == line_number


@pytest.mark.parametrize(
    "extra",
    [
        "bogus_field=1",
        "settings.call_alrt=true",
        "settings.secret.hint=dob",
        "guard.muted=yes",
    ],
)
def test_unknown_key_is_rejected(device_state, extra):
    lines = [line.replace("records=14", "records=15") for line in _lines(device_state)]
    lines.insert(3, extra)
    with pytest.raises(DeviceFileParseError) as exc_info:
        load("".join(f"{line}\n" for line in lines))
    assert exc_info.value.line_number == 4
    key, _, _ = extra.partition("=")
    assert exc_info.value.reason == f"unknown key {key!r}"


def test_missing_list_item(device_state):
    device_state.contacts = [
        Contact(name=name, mobile="+919000000100") for name in ("A", "B")
    ]
    lines = [line for line in _lines(device_state) if not line.startswith("contacts.0.")]
    records = len(lines) - 1
    lines = [f"records={records}" if line.startswith("records=") else line for line in lines]
    with pytest.raises(DeviceFileParseError) as exc_info:
        load("".join(f"{line}\n" for line in lines))
    assert "contacts.0" in exc_info.value.reason


def test_state_dir_files(tmp_path, device_state):
    path = save_device_file(tmp_path, device_state)
    assert path.name == device_file_name(SERVER) == "+919000000001.device"
    assert load_device_file(path) == device_state
    assert save_state_dir(tmp_path / "nested", [device_state]) == [
        tmp_path / "nested" / "+919000000001.device"
    ]
