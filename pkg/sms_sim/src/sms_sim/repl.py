"""Interactive shell over a `ScenarioRunner`.

Every scenario directive is accepted as typed, so a session replays the same
way a scenario file does. `send` and `call <to>` come from an operator
handset registered on first use.
"""
from __future__ import annotations

import cmd
import logging
import shlex
from typing import Optional, TextIO

from sms_remote import persistence
from sms_sim.errors import ScenarioParseError
from sms_sim.runner import ScenarioRunner
from sms_sim.scenario import (
    CallDirective,
    ClearBlockedDirective,
    Directive,
    HandsetDirective,
    ScenarioParser,
    SmsDirective,
)
from sms_sim.settings import SimSettings
from zero_3rdparty.error import BaseError

logger = logging.getLogger(__name__)

OPERATOR_NAME = "operator"
DEFAULT_OPERATOR_NUMBER = "+19990000000"
_SHOW_VIEWS = ("state", "inbox", "blocked")


class SimRepl(cmd.Cmd):
    intro = "SMS remote access simulator. Type help for commands, quit to leave."
    prompt = "sms> "

    def __init__(
        self,
        settings: SimSettings | None = None,
        seed_override: int | None = None,
        operator_number: str = DEFAULT_OPERATOR_NUMBER,
        stdin: Optional[TextIO] = None,
        stdout: Optional[TextIO] = None,
    ):
        super().__init__(stdin=stdin, stdout=stdout)
        if stdin is not None:
            self.use_rawinput = False
        self.parser = ScenarioParser()
        self.runner = ScenarioRunner(
            settings, seed_override=seed_override, sinks=[self._print]
        )
        self.operator_number = operator_number
        self.line_number = 0

    def _print(self, text: str) -> None:
        self.stdout.write(f"{text}\n")

    def _error(self, text: str) -> None:
        self._print(f"error: {text}")

    def precmd(self, line: str) -> str:
        self.line_number += 1
        return line

    def emptyline(self) -> bool:
        return False

    def run_line(self, line: str) -> Optional[Directive]:
        """Parses and applies one directive line; parse errors are reported, not raised."""
        try:
            directive = self.parser.parse_line(line, self.line_number)
        except ScenarioParseError as e:
            self._error(f"{e.reason}: {e.line}")
            return None
        if directive is not None:
            self.apply(directive)
        return directive

    def apply(self, directive: Directive) -> None:
        stamped = directive.model_copy(
            update={"line_number": self.line_number, "line": self.lastcmd}
        )
        if failure := self.runner.apply(stamped):
            self._error(failure.reason)

    def default(self, line: str) -> bool:
        keyword, _, _ = line.strip().partition(" ")
        if keyword not in self.parser.keywords:
            self._error(f"unknown command {keyword!r}")
            return self.do_help("")
        self.run_line(line)
        return False

    def _operator(self) -> str:
        if not self.runner.network.has_endpoint(OPERATOR_NAME):
            self.parser.handsets[OPERATOR_NAME] = HandsetDirective(
                name=OPERATOR_NAME, msisdn=self.operator_number
            )
            self.apply(HandsetDirective(name=OPERATOR_NAME, msisdn=self.operator_number))
        return OPERATOR_NAME

    def _split(self, arg: str) -> Optional[list[str]]:
        try:
            return shlex.split(arg)
        except ValueError as e:
            self._error(str(e))
            return None

    def do_send(self, arg: str) -> bool:
        """send <to> <body>: SMS from the operator handset"""
        to, _, body = arg.strip().partition(" ")
        body = body.strip()
        if len(body) >= 2 and body[0] == body[-1] == '"':
            body = body[1:-1]
        if not to or not body:
            self._error("usage: send <to> <body>")
            return False
        try:
            directive = SmsDirective(sender=self._operator(), recipient=to, body=body)
        except ValueError as e:
            self._error(str(e))
            return False
        self.apply(directive)
        return False

    def do_call(self, arg: str) -> bool:
        """call <to> | call <from> <to>: place a call"""
        match self._split(arg):
            case [to]:
                self.apply(CallDirective(caller=self._operator(), callee=to))
            case [_, _]:
                self.run_line(f"call {arg}")
            case None:
                pass
            case _:
                self._error("usage: call <to> | call <from> <to>")
        return False

    def do_clear(self, arg: str) -> bool:
        """clear <device> blocked: empty the block list locally"""
        match self._split(arg):
            case [name, "blocked"] if name in self.parser.devices:
                self.apply(ClearBlockedDirective(device=name))
            case [name, "blocked"]:
                self._error(f"unknown device {name!r}")
            case None:
                pass
            case _:
                self._error("usage: clear <device> blocked")
        return False

    def do_show(self, arg: str) -> bool:
        """show <device> state|inbox|blocked"""
        args = self._split(arg)
        if args is None:
            return False
        if len(args) != 2 or args[1] not in _SHOW_VIEWS:
            self._error("usage: show <device> state|inbox|blocked")
            return False
        name, view = args
        try:
            state = self.runner.network.device(name).state
        except BaseError as e:
            self._error(str(e))
            return False
        match view:
            case "state":
                self.stdout.write(persistence.save(state))
            case "inbox":
                for message in state.inbox:
                    self._print(f'{message.sender} "{message.body}"')
            case "blocked":
                for number in state.guard.blocked:
                    self._print(number)
        return False

    def do_help(self, arg: str) -> bool:
        """help [command]: list commands"""
        if arg:
            return super().do_help(arg)
        self._print("shell commands: send, call, show, clear, help, quit")
        self._print(f"directives: {', '.join(self.parser.keywords)}")
        return False

    def do_quit(self, arg: str) -> bool:
        """quit: persist devices when a state dir is set and leave"""
        for path in self.runner.persist():
            logger.info(f"persisted {path}")
        return True

    do_exit = do_quit
    do_EOF = do_quit
