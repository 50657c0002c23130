"""Frame classification, the reference cipher and command/reply framing.

A body starting with `$$` carries an encrypted command, a body starting with a
single `$` carries a plain command and anything else is an ordinary SMS.
"""
from __future__ import annotations

import logging
from itertools import cycle
from typing import Optional, Protocol

from pydantic import Field

from model_lib import Event
from sms_remote.constants import (
    ACTIVATION_COMMAND_REGEX,
    COMMAND_PREFIX,
    ENCRYPTED_PREFIX,
    PIN_REGEX,
    PRINTABLE_FIRST,
    PRINTABLE_LAST,
    PRINTABLE_SIZE,
    Channel,
    FrameKind,
)
from sms_remote.errors import MalformedCommandText, MissingKey, NonPrintableInput

logger = logging.getLogger(__name__)


class SharedSecret(Event):
    """The activation command and pin typed as `$MYDOB 1989`."""

    activation_command: str = Field(pattern=ACTIVATION_COMMAND_REGEX)
    activation_pin: str = Field(pattern=PIN_REGEX)


class CipherKey(Event):
    key: str = Field(min_length=1)


class DecodedFrame(Event):
    command_text: str
    channel: Channel


class TextCipher(Protocol):
    def encrypt(self, plain: str, key: CipherKey) -> str:
        ...

    def decrypt(self, cipher: str, key: CipherKey) -> str:
        ...


def _offsets(text: str) -> list[int]:
    offsets = []
    for position, char in enumerate(text):
        code = ord(char)
        if not PRINTABLE_FIRST <= code <= PRINTABLE_LAST:
            raise NonPrintableInput(text, position)
        offsets.append(code - PRINTABLE_FIRST)
    return offsets


class ShiftCipher:
    """Keyed shift over the 95 printable characters (codepoints 32-126).

    >>> ShiftCipher().encrypt("A", CipherKey(key="A"))
    'b'
    >>> ShiftCipher().decrypt("b", CipherKey(key="A"))
    'A'
    """

    def _shift(self, text: str, key: CipherKey, direction: int) -> str:
        if not text:
            return ""
        key_offsets = _offsets(key.key)
        return "".join(
            chr(PRINTABLE_FIRST + (offset + direction * key_offset) % PRINTABLE_SIZE)
            for offset, key_offset in zip(_offsets(text), cycle(key_offsets))
        )

    def encrypt(self, plain: str, key: CipherKey) -> str:
        return self._shift(plain, key, 1)

    def decrypt(self, cipher: str, key: CipherKey) -> str:
        return self._shift(cipher, key, -1)


REFERENCE_CIPHER: TextCipher = ShiftCipher()


def derive_key(secret: SharedSecret) -> CipherKey:
    """
    >>> derive_key(SharedSecret(activation_command="MYDOB", activation_pin="1989")).key
    'MYDOB1989'
    """
    return CipherKey(key=secret.activation_command + secret.activation_pin)


def encrypt_text(
    plain: str, key: CipherKey, cipher: TextCipher = REFERENCE_CIPHER
) -> str:
    return cipher.encrypt(plain, key)


def decrypt_text(
    cipher_text: str, key: CipherKey, cipher: TextCipher = REFERENCE_CIPHER
) -> str:
    return cipher.decrypt(cipher_text, key)


def classify_frame(body: str) -> FrameKind:
    """
    >>> classify_frame("$$kq9x")
    'encrypted_command'
    >>> classify_frame("$MYDOB 1989")
    'plain_command'
    >>> classify_frame("see you at 5")
    'ordinary'
    """
    if body.startswith(ENCRYPTED_PREFIX):
        return FrameKind.ENCRYPTED_COMMAND
    if body.startswith(COMMAND_PREFIX):
        return FrameKind.PLAIN_COMMAND
    return FrameKind.ORDINARY


def encode_frame(
    command_text: str,
    channel: Channel,
    key: Optional[CipherKey] = None,
    cipher: TextCipher = REFERENCE_CIPHER,
) -> str:
    if not command_text.startswith(COMMAND_PREFIX):
        raise MalformedCommandText(command_text)
    if channel == Channel.PLAIN:
        # a plain body starting with $$ would classify as encrypted
        if command_text.startswith(ENCRYPTED_PREFIX):
            raise MalformedCommandText(command_text)
        return command_text
    if key is None:
        raise MissingKey()
    payload = command_text[len(COMMAND_PREFIX) :]
    return ENCRYPTED_PREFIX + cipher.encrypt(payload, key)


def decode_frame(
    body: str, key: CipherKey, cipher: TextCipher = REFERENCE_CIPHER
) -> Optional[DecodedFrame]:
    """None means an ordinary SMS.

    >>> decode_frame("$WIFI-ON", CipherKey(key="K")).command_text
    '$WIFI-ON'
    >>> decode_frame("hello", CipherKey(key="K")) is None
    True
    """
    kind = classify_frame(body)
    if kind == FrameKind.ORDINARY:
        return None
    if kind == FrameKind.PLAIN_COMMAND:
        return DecodedFrame(command_text=body, channel=Channel.PLAIN)
    payload = body[len(ENCRYPTED_PREFIX) :]
    try:
        plain = cipher.decrypt(payload, key)
    except NonPrintableInput as e:
        logger.debug(f"undecryptable payload kept verbatim: {e!r}")
        plain = payload
    return DecodedFrame(command_text=COMMAND_PREFIX + plain, channel=Channel.ENCRYPTED)


def seal_reply(
    text: str,
    channel: Channel,
    key: Optional[CipherKey] = None,
    cipher: TextCipher = REFERENCE_CIPHER,
) -> str:
    """Replies travel on the channel the session was opened on."""
    if channel == Channel.PLAIN:
        return text
    if key is None:
        raise MissingKey()
    return ENCRYPTED_PREFIX + cipher.encrypt(text, key)


def open_reply(
    body: str, key: CipherKey, cipher: TextCipher = REFERENCE_CIPHER
) -> str:
    if classify_frame(body) != FrameKind.ENCRYPTED_COMMAND:
        return body
    payload = body[len(ENCRYPTED_PREFIX) :]
    try:
        return cipher.decrypt(payload, key)
    except NonPrintableInput:
        return body
