"""`sms-sim run <scenario>` and `sms-sim repl`.

Standard output carries only the transcript; logs go to standard error.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from pydantic import ValidationError

from sms_sim.errors import ScenarioParseError
from sms_sim.repl import DEFAULT_OPERATOR_NUMBER, SimRepl
from sms_sim.runner import (
    EXIT_FAILED,
    EXIT_OK,
    EXIT_PARSE_ERROR,
    run_scenario,
    write_transcript,
)
from sms_sim.settings import SimSettings
from zero_3rdparty.logging_utils import setup_logging

logger = logging.getLogger(__name__)


def _common_flags() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--seed", type=int, help="overrides any seed directive")
    parent.add_argument("--state-dir", type=Path, help="load and persist devices here")
    parent.add_argument("--transcript", type=Path, help="also write the transcript here")
    parent.add_argument("--delay", type=int, help="delivery delay in seconds")
    parent.add_argument("--loss-rate", type=float, help="share of messages lost")
    parent.add_argument("--log-level", help="python log level, written to stderr")
    return parent


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sms-sim", description="Simulated SMS remote access and anti-theft."
    )
    commands = parser.add_subparsers(dest="command", required=True)
    common = _common_flags()
    run = commands.add_parser("run", parents=[common], help="run a scenario file")
    run.add_argument("scenario", type=Path)
    repl = commands.add_parser("repl", parents=[common], help="interactive shell")
    repl.add_argument("scenario", type=Path, nargs="?", help="directives to run first")
    repl.add_argument(
        "--attach",
        default=DEFAULT_OPERATOR_NUMBER,
        help="msisdn of the operator handset used by send and call",
    )
    return parser


def settings_from_args(args: argparse.Namespace) -> SimSettings:
    overrides = {
        "state_dir": args.state_dir,
        "delivery_delay_seconds": args.delay,
        "loss_rate": args.loss_rate,
        "log_level": args.log_level,
    }
    return SimSettings(**{k: v for k, v in overrides.items() if v is not None})


def configure_logging(level: str) -> None:
    setup_logging(
        {"class": "logging.StreamHandler", "stream": "ext://sys.stderr", "level": level},
        disable_stream_handler=True,
    )
    logging.getLogger().setLevel(level)


def _repl(args: argparse.Namespace, settings: SimSettings) -> int:
    shell = SimRepl(settings, seed_override=args.seed, operator_number=args.attach)
    lines: list[str] = []
    if args.transcript is not None:
        shell.runner.sinks.append(lines.append)
    try:
        if args.scenario is not None:
            text = args.scenario.read_text(encoding="utf-8")
            try:
                shell.runner.run(shell.parser.parse(text))
            except ScenarioParseError as e:
                location = f"{args.scenario}:{e.line_number}"
                print(f"{location}: {e.reason}: {e.line}", file=sys.stderr)
                return EXIT_PARSE_ERROR
        shell.cmdloop()
    finally:
        if args.transcript is not None:
            write_transcript(args.transcript, lines)
    return EXIT_FAILED if shell.runner.failures else EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        settings = settings_from_args(args)
    except ValidationError as e:
        print(f"invalid settings: {e}", file=sys.stderr)
        return EXIT_PARSE_ERROR
    configure_logging(settings.log_level.upper())
    logger.debug(f"settings {settings}")
    if args.command == "run":
        return run_scenario(
            args.scenario,
            settings,
            seed_override=args.seed,
            transcript_path=args.transcript,
            out=sys.stdout,
            err=sys.stderr,
        )
    return _repl(args, settings)
