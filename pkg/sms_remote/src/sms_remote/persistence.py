"""Line oriented `key=value` device files.

Nested fields are joined with `.`, list items use their index
(`contacts.0.name=Raja`). Booleans are `true`/`false`, unset optionals and
empty lists are left out. `\\` and newlines in values are escaped. The
`records` key counts the other lines so a truncated file is detected.
"""
from __future__ import annotations

import logging
import re
from pathlib import Path
from typing import Any, Iterable

from pydantic import BaseModel, ValidationError

from model_lib import dump_as_dict
from sms_remote.device import DeviceState
from sms_remote.errors import DeviceFileParseError
from sms_remote.guard import normalize
from zero_3rdparty.dict_nested import update

logger = logging.getLogger(__name__)

DEVICE_FILE_SUFFIX = ".device"
RECORDS_KEY = "records"
_ESCAPES = {"\\": "\\\\", "\n": "\\n"}
_UNESCAPE = re.compile(r"\\(.)")
_KEY_PATTERN = re.compile(r"^[a-z_]+(\.([a-z_]+|[0-9]+))*$")


def _escape(value: str) -> str:
    return "".join(_ESCAPES.get(char, char) for char in value)


def _unescape(value: str, line_number: int) -> str:
    def replace(found: re.Match) -> str:
        match found.group(1):
            case "\\":
                return "\\"
            case "n":
                return "\n"
        raise DeviceFileParseError(line_number, f"invalid escape {found.group(0)!r}")

    return _UNESCAPE.sub(replace, value)


def _render_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, str):
        return _escape(value)
    return str(value)


def _flatten(value: Any, prefix: str) -> Iterable[tuple[str, str]]:
    if value is None:
        return
    if isinstance(value, dict):
        for key, child in value.items():
            yield from _flatten(child, f"{prefix}.{key}" if prefix else key)
    elif isinstance(value, list):
        for index, child in enumerate(value):
            yield from _flatten(child, f"{prefix}.{index}")
    else:
        yield prefix, _render_value(value)


def save(d: DeviceState) -> str:
    """Sorted `key=value` lines ending with a newline."""
    records = dict(_flatten(dump_as_dict(d), ""))
    records[RECORDS_KEY] = str(len(records))
    return "".join(f"{key}={records[key]}\n" for key in sorted(records))


def _natural_key(item: tuple[str, tuple[int, str]]) -> list[tuple[int, int | str]]:
    key = item[0]
    return [(0, int(part)) if part.isdigit() else (1, part) for part in key.split(".")]


def _nested_path(key: str) -> str:
    return ".".join(f"[{part}]" if part.isdigit() else part for part in key.split("."))


def _parse_lines(text: str) -> dict[str, tuple[int, str]]:
    records: dict[str, tuple[int, str]] = {}
    for line_number, line in enumerate(text.removesuffix("\n").split("\n"), start=1):
        key, separator, raw_value = line.partition("=")
        if not separator:
            raise DeviceFileParseError(line_number, "expected key=value")
        if not _KEY_PATTERN.match(key):
            raise DeviceFileParseError(line_number, f"invalid key {key!r}")
        if key in records:
            raise DeviceFileParseError(line_number, f"duplicate key {key!r}")
        records[key] = (line_number, _unescape(raw_value, line_number))
    return records


def _check_records(records: dict[str, tuple[int, str]]) -> None:
    end_line = len(records) + 1
    if RECORDS_KEY not in records:
        raise DeviceFileParseError(end_line, f"missing {RECORDS_KEY} key")
    line_number, raw_count = records.pop(RECORDS_KEY)
    if not raw_count.isdigit():
        raise DeviceFileParseError(line_number, f"invalid {RECORDS_KEY} {raw_count!r}")
    if (expected := int(raw_count)) != len(records):
        raise DeviceFileParseError(
            end_line, f"expected {expected} records, found {len(records)}"
        )


def _check_contiguous(records: dict[str, tuple[int, str]]) -> None:
    seen: dict[str, set[int]] = {}
    for key, (line_number, _) in records.items():
        parts = key.split(".")
        for position, part in enumerate(parts):
            if not part.isdigit():
                continue
            prefix = ".".join(parts[:position])
            index = int(part)
            indexes = seen.setdefault(prefix, set())
            indexes.add(index)
            if index > 0 and index - 1 not in indexes:
                # keys are visited in natural order so a gap is a missing item
                raise DeviceFileParseError(line_number, f"missing item {prefix}.{index - 1}")


def _error_line(error: ValidationError, records: dict[str, tuple[int, str]]) -> int:
    end_line = len(records) + 2
    if not (errors := error.errors()):
        return end_line
    prefix = ".".join(str(part) for part in errors[0]["loc"])
    return _first_line(prefix, records, default=end_line)


def _first_line(prefix: str, records: dict[str, tuple[int, str]], default: int) -> int:
    lines = [
        line_number
        for key, (line_number, _) in records.items()
        if key == prefix or key.startswith(f"{prefix}.")
    ]
    return min(lines, default=default)


def _unknown_keys(model: BaseModel, prefix: str = "") -> Iterable[str]:
    for name in model.model_extra or {}:
        yield f"{prefix}{name}"
    for name in type(model).model_fields:
        value = getattr(model, name)
        if isinstance(value, BaseModel):
            yield from _unknown_keys(value, f"{prefix}{name}.")
        elif isinstance(value, list):
            for index, child in enumerate(value):
                if isinstance(child, BaseModel):
                    yield from _unknown_keys(child, f"{prefix}{name}.{index}.")


def load(text: str) -> DeviceState:
    records = _parse_lines(text)
    _check_records(records)
    ordered = dict(sorted(records.items(), key=_natural_key))
    _check_contiguous(ordered)
    payload: dict[str, Any] = {}
    for key, (_, value) in ordered.items():
        update(payload, _nested_path(key), value, ensure_parents=True)
    try:
        device = DeviceState(**payload)
    except ValidationError as e:
        line_number = _error_line(e, ordered)
        raise DeviceFileParseError(line_number, str(e).splitlines()[0]) from e
    if unknown := list(_unknown_keys(device)):
        located = sorted((_first_line(key, ordered, default=0), key) for key in unknown)
        line_number, key = located[0]
        raise DeviceFileParseError(line_number, f"unknown key {key!r}")
    return device


def device_file_name(msisdn: str) -> str:
    """
    >>> device_file_name("+919000000001")
    '+919000000001.device'
    """
    return f"{msisdn}{DEVICE_FILE_SUFFIX}"


def device_file_path(state_dir: Path, msisdn: str) -> Path:
    return state_dir / device_file_name(msisdn)


def save_device_file(state_dir: Path, d: DeviceState) -> Path:
    state_dir.mkdir(parents=True, exist_ok=True)
    path = device_file_path(state_dir, d.msisdn)
    path.write_text(save(d), encoding="utf-8")
    logger.info(f"saved {path}")
    return path


def save_state_dir(state_dir: Path, devices: Iterable[DeviceState]) -> list[Path]:
    return [save_device_file(state_dir, d) for d in devices]


def load_device_file(path: Path) -> DeviceState:
    device = load(path.read_text(encoding="utf-8"))
    if normalize(path.name.removesuffix(DEVICE_FILE_SUFFIX)) != normalize(
        device.msisdn
    ):
        logger.warning(f"{path.name} holds device {device.msisdn}")
    return device
