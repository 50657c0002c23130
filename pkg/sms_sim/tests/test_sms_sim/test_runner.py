from io import StringIO
from pathlib import Path

import pytest

from sms_remote.protocol import SharedSecret, decode_frame, derive_key, open_reply
from sms_sim.runner import (
    EXIT_FAILED,
    EXIT_OK,
    EXIT_PARSE_ERROR,
    ScenarioRunner,
    run_scenario,
)
from sms_sim.scenario import parse_scenario
from sms_sim.settings import SimSettings
from sms_sim.transcript import TranscriptKind

SCENARIOS = Path(__file__).parent / "scenarios"
PHONE = "+919000000001"
OWNER = "+919000000002"
DECLARE = """\
device phone +919000000001 activation=MYDOB pin=1989 login=4321
client owner +919000000002 target=phone channel={channel}
handset thief +919000000009
"""
HEADER = DECLARE + "boot phone\n"


def run_text(text: str, channel: str = "plain", **kwargs) -> ScenarioRunner:
    runner = ScenarioRunner(**kwargs)
    runner.run(parse_scenario(text.replace("{channel}", channel)))
    return runner


def sms_bodies(runner: ScenarioRunner, sender: str) -> list[str]:
    return [
        entry.text
        for entry in runner.network.transcript
        if entry.kind == TranscriptKind.SMS and entry.sender == sender
    ]


@pytest.mark.parametrize(
    "name",
    [
        "plain_session",
        "intrusion",
        "sim_swap",
        "divert_and_alerts",
        "flight_mode",
        "three_strikes",
        "contact_and_wipeout",
    ],
)
def test_scenario_passes(name):
    err = StringIO()
    assert run_scenario(SCENARIOS / f"{name}.scn", err=err) == EXIT_OK, err.getvalue()
    assert err.getvalue() == ""


def test_plain_session_transcript(tmp_path, file_regression):
    transcript = tmp_path / "out" / "transcript.txt"
    out = StringIO()
    path = SCENARIOS / "plain_session.scn"
    assert run_scenario(path, transcript_path=transcript, out=out) == EXIT_OK
    text = transcript.read_text()
    assert out.getvalue() == text
    file_regression.check(text, extension=".txt")


def test_failures_are_reported_and_run_continues():
    err = StringIO()
    assert run_scenario(SCENARIOS / "failing.scn", err=err) == EXIT_FAILED
    assert err.getvalue().splitlines() == [
        "FAILED line 6: expected locked, actual unlocked,wifi-off,not-silent,gps-off,reachable: assert phone locked",
        'FAILED line 7: no matching transcript entry: expect log "never logged"',
    ]


def test_parse_error_runs_nothing(tmp_path):
    err = StringIO()
    transcript = tmp_path / "transcript.txt"
    path = SCENARIOS / "bad_directive.scn"
    assert (
        run_scenario(path, transcript_path=transcript, err=err) == EXIT_PARSE_ERROR
    )
    assert err.getvalue() == f"{path}:3: unknown directive 'launch': launch phone\n"
    assert transcript.read_text() == ""


ENCRYPTABLE_SESSION = (
    HEADER
    + 'contact phone "Senthil Raja" +919000000100 raja@example.com\n'
    + """\
connect owner
advance 2s
unlockui owner
request owner "$SILENT-ON"
request owner "$CONTACT raja"
request owner "$GPS-ON"
request owner "$WIPEOUT"
advance 2s
request owner "$SIGNOFF"
advance 2s
"""
)


def test_encrypted_session_matches_plain():
    plain = run_text(ENCRYPTABLE_SESSION, "plain")
    encrypted = run_text(ENCRYPTABLE_SESSION, "encrypted")
    assert plain.failures == encrypted.failures == []
    key = derive_key(SharedSecret(activation_command="MYDOB", activation_pin="1989"))
    replies = sms_bodies(encrypted, PHONE)
    assert all(body.startswith("$$") for body in replies)
    assert [open_reply(body, key) for body in replies] == sms_bodies(plain, PHONE)
    requests = sms_bodies(encrypted, OWNER)
    assert all(body.startswith("$$") for body in requests)
    assert [decode_frame(body, key).command_text for body in requests] == sms_bodies(
        plain, OWNER
    )
    assert sms_bodies(plain, OWNER) == [
        "$MYDOB 1989",
        "$SILENT-ON",
        "$CONTACT raja",
        "$GPS-ON",
        "$WIPEOUT",
        "$SIGNOFF",
    ]
    state = encrypted.network.device("phone").state
    assert state.profile_silent and state.gps_tracking
    assert state.contacts == []


def test_same_seed_same_transcript():
    def rendered(seed: int) -> list[str]:
        runner = run_text(ENCRYPTABLE_SESSION, seed_override=seed)
        return [entry.render() for entry in runner.network.transcript]

    assert rendered(3) == rendered(3)


def test_seed_directive_loses_to_override():
    runner = run_text(HEADER + "seed 5\n", seed_override=9)
    assert runner.network.seed == 9
    assert run_text(HEADER + "seed 5\n").network.seed == 5


def test_warning_expires_after_48_hours():
    runner = run_text(
        HEADER
        + 'sms thief phone "$MYDOB 0000"\n'
        + "advance 1s\n"
        + "assert phone warned=thief\n"
        + "advance 49h\n"
        + "assert phone warned=thief\n"
    )
    [failure] = runner.failures
    assert failure.line_number == 9
    assert failure.reason.startswith("expected warned=thief")


def test_request_before_connect_fails():
    runner = run_text(HEADER + 'request owner "$WIFI-ON"\n')
    [failure] = runner.failures
    assert "NotConnected" in failure.reason


def test_state_dir_survives_restart(tmp_path):
    settings = SimSettings(state_dir=tmp_path)
    first = run_text(
        HEADER + "file phone photo.jpg\nconnect owner\nadvance 2s\n", settings=settings
    )
    assert first.failures == []
    assert first.persist() == [tmp_path / f"{PHONE}.device"]

    second = run_text(
        DECLARE
        + "assert phone unreachable\n"
        + "boot phone\n"
        + 'expect log "+919000000001 LOCKED-ON-BOOT"\n'
        + "assert phone files=1\n"
        + "assert phone locked\n"
        + "assert phone session=owner\n",
        settings=settings,
    )
    assert second.failures == []


def test_apply_returns_recorded_failure():
    runner = run_text(HEADER)
    text = HEADER + "assert phone locked\n" + 'expect log "never logged"\n'
    text += "assert phone unlocked\n"
    scenario = parse_scenario(text.replace("{channel}", "plain"))
    *_, check, expect, passing = scenario.directives
    failure = runner.apply(check)
    assert failure is not None
    assert failure.line_number == 5
    assert failure.reason.startswith("expected locked, actual unlocked")
    assert runner.apply(expect) == runner.failures[-1]
    assert runner.failures[-1].reason == "no matching transcript entry"
    assert runner.apply(passing) is None
    assert len(runner.failures) == 2
