"""Bit-exact OSC 1.0 binary codec.

Layout rules: every component is padded to a 4-byte boundary with zero
bytes, numeric types are big-endian, strings are NUL-terminated. Bundles
start with the literal "#bundle" string and carry size-prefixed elements.

Only the four core typetags (i, f, s, b) are supported; packets using any
other tag are rejected rather than skipped. Bundle nesting is capped at
``MAX_BUNDLE_DEPTH`` as a guard against hostile input.
"""

from __future__ import annotations

import struct

from .messages import (
    IMMEDIATELY,
    INT32_MAX,
    INT32_MIN,
    OscBundle,
    OscMessage,
    OscPacket,
)

MAX_BUNDLE_DEPTH = 8

_BUNDLE_HEADER = b"#bundle\x00"


class OscEncodeError(ValueError):
    """A message or bundle violated an encoding invariant."""


class OscDecodeError(ValueError):
    """Malformed packet bytes; ``offset`` points at the failure."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.reason = message
        self.offset = offset

    def rebased(self, base: int) -> "OscDecodeError":
        return OscDecodeError(self.reason, self.offset + base)


def _pad4(data: bytes) -> bytes:
    rem = len(data) % 4
    return data if rem == 0 else data + b"\x00" * (4 - rem)


def validate_address(address: str) -> None:
    """Raise OscEncodeError unless ``address`` is a legal OSC address."""
    if not address.startswith("/"):
        raise OscEncodeError(f"address must start with '/', got {address!r}")
    for ch in address:
        if ch == "\x00":
            raise OscEncodeError("address contains NUL character")
        if ch.isspace():
            raise OscEncodeError(f"address contains whitespace character {ch!r}")
        if ord(ch) > 126 or ord(ch) < 32:
            raise OscEncodeError(f"address contains non-printable character {ch!r}")


def _encode_string(s: str) -> bytes:
    if "\x00" in s:
        raise OscEncodeError("string argument contains NUL character")
    return _pad4(s.encode("utf-8") + b"\x00")


def encode_message(msg: OscMessage) -> bytes:
    """Encode one message; output length is always a multiple of 4."""
    validate_address(msg.address)
    parts = [_encode_string(msg.address)]
    tags = [","]
    body: list[bytes] = []
    for i, arg in enumerate(msg.args):
        if isinstance(arg, bool):
            # bool is an int subclass; send it as int32 0/1
            tags.append("i")
            body.append(struct.pack(">i", int(arg)))
        elif isinstance(arg, int):
            if not INT32_MIN <= arg <= INT32_MAX:
                raise OscEncodeError(f"arg {i}: int {arg} does not fit in int32")
            tags.append("i")
            body.append(struct.pack(">i", arg))
        elif isinstance(arg, float):
            tags.append("f")
            try:
                body.append(struct.pack(">f", arg))
            except OverflowError as exc:
                raise OscEncodeError(f"arg {i}: float {arg} does not fit in float32") from exc
        elif isinstance(arg, str):
            tags.append("s")
            body.append(_encode_string(arg))
        elif isinstance(arg, (bytes, bytearray, memoryview)):
            blob = bytes(arg)
            if len(blob) > INT32_MAX:
                raise OscEncodeError(f"arg {i}: blob length {len(blob)} exceeds int32")
            tags.append("b")
            body.append(struct.pack(">i", len(blob)) + _pad4(blob))
        else:
            raise OscEncodeError(f"arg {i}: unsupported argument type {type(arg).__name__}")
    parts.append(_encode_string("".join(tags)))
    parts.extend(body)
    return b"".join(parts)


def encode_bundle(bundle: OscBundle, _depth: int = 1) -> bytes:
    if _depth > MAX_BUNDLE_DEPTH:
        raise OscEncodeError(f"bundle nesting exceeds depth {MAX_BUNDLE_DEPTH}")
    if not 0 <= bundle.timetag < 1 << 64:
        raise OscEncodeError(f"timetag {bundle.timetag} does not fit in uint64")
    parts = [_BUNDLE_HEADER, struct.pack(">Q", bundle.timetag)]
    for el in bundle.elements:
        if isinstance(el, OscBundle):
            payload = encode_bundle(el, _depth + 1)
        elif isinstance(el, OscMessage):
            payload = encode_message(el)
        else:
            raise OscEncodeError(f"bundle element has unsupported type {type(el).__name__}")
        parts.append(struct.pack(">i", len(payload)))
        parts.append(payload)
    return b"".join(parts)


def encode_packet(packet: OscPacket) -> bytes:
    """Encode a message or bundle into one datagram payload."""
    if isinstance(packet, OscBundle):
        return encode_bundle(packet)
    return encode_message(packet)


# -- decoding ---------------------------------------------------------------
#
# Element decoders work on an element-sized slice and raise offsets relative
# to that slice; each nesting level rebases child errors so the offset in
# the final exception always points into the original datagram.


def _read_string(data: bytes, offset: int) -> tuple[str, int]:
    end = data.find(b"\x00", offset)
    if end < 0:
        raise OscDecodeError("unterminated string", offset)
    try:
        s = data[offset:end].decode("utf-8")
    except UnicodeDecodeError:
        raise OscDecodeError("string is not valid UTF-8", offset) from None
    padded_end = end + 1
    rem = padded_end % 4
    if rem:
        padded_end += 4 - rem
    if padded_end > len(data):
        raise OscDecodeError("string padding runs past end of packet", end + 1)
    if any(b != 0 for b in data[end + 1 : padded_end]):
        raise OscDecodeError("nonzero string padding", end + 1)
    return s, padded_end


def _read_int32(data: bytes, offset: int) -> tuple[int, int]:
    if offset + 4 > len(data):
        raise OscDecodeError("truncated int32", offset)
    return struct.unpack_from(">i", data, offset)[0], offset + 4


def _decode_message(data: bytes) -> OscMessage:
    address, offset = _read_string(data, 0)
    if not address.startswith("/"):
        raise OscDecodeError(f"address {address!r} does not start with '/'", 0)
    if offset == len(data):
        # Tolerated: some senders omit the typetag string for bare messages.
        return OscMessage(address, ())
    tag_offset = offset
    tags, offset = _read_string(data, offset)
    if not tags.startswith(","):
        raise OscDecodeError("typetag string does not start with ','", tag_offset)
    args: list = []
    for tag in tags[1:]:
        if tag == "i":
            value, offset = _read_int32(data, offset)
            args.append(value)
        elif tag == "f":
            if offset + 4 > len(data):
                raise OscDecodeError("truncated float32", offset)
            args.append(struct.unpack_from(">f", data, offset)[0])
            offset += 4
        elif tag == "s":
            value, offset = _read_string(data, offset)
            args.append(value)
        elif tag == "b":
            size, offset = _read_int32(data, offset)
            if size < 0:
                raise OscDecodeError(f"negative blob length {size}", offset - 4)
            padded = size + (-size % 4)
            if offset + padded > len(data):
                raise OscDecodeError("blob runs past end of packet", offset)
            blob = data[offset : offset + size]
            if any(b != 0 for b in data[offset + size : offset + padded]):
                raise OscDecodeError("nonzero blob padding", offset + size)
            args.append(bytes(blob))
            offset += padded
        else:
            raise OscDecodeError(f"unknown typetag {tag!r}", tag_offset)
    if offset != len(data):
        raise OscDecodeError("trailing bytes after last argument", offset)
    return OscMessage(address, tuple(args))


def _decode_bundle(data: bytes, depth: int) -> OscBundle:
    if depth > MAX_BUNDLE_DEPTH:
        raise OscDecodeError(f"bundle nesting exceeds depth {MAX_BUNDLE_DEPTH}", 0)
    if len(data) < 16:
        raise OscDecodeError("bundle shorter than header + timetag", 0)
    timetag = struct.unpack_from(">Q", data, 8)[0]
    offset = 16
    elements: list = []
    while offset < len(data):
        size, offset = _read_int32(data, offset)
        if size <= 0 or size % 4 != 0:
            raise OscDecodeError(f"bad bundle element size {size}", offset - 4)
        if offset + size > len(data):
            raise OscDecodeError("bundle element runs past end of packet", offset)
        chunk = data[offset : offset + size]
        try:
            elements.append(_decode_element(chunk, depth))
        except OscDecodeError as exc:
            raise exc.rebased(offset) from None
        offset += size
    return OscBundle(timetag, tuple(elements))


def _decode_element(data: bytes, depth: int) -> OscPacket:
    if data.startswith(_BUNDLE_HEADER):
        return _decode_bundle(data, depth + 1)
    if data.startswith(b"/"):
        return _decode_message(data)
    raise OscDecodeError("packet starts with neither '/' nor '#bundle'", 0)


def decode_packet(data: bytes) -> OscPacket:
    """Decode one datagram into a message or bundle.

    Raises OscDecodeError with a byte offset on any malformed input; never
    reads past ``data``.
    """
    data = bytes(data)
    if len(data) == 0:
        raise OscDecodeError("empty packet", 0)
    if len(data) % 4 != 0:
        raise OscDecodeError("length not multiple of 4", 0)
    return _decode_element(data, 0)


def flatten_messages(packet: OscPacket) -> list[OscMessage]:
    """All messages in wire order, bundles unwrapped."""
    if isinstance(packet, OscMessage):
        return [packet]
    out: list[OscMessage] = []
    for el in packet.elements:
        out.extend(flatten_messages(el))
    return out


def packet_timetag(packet: OscPacket) -> int | None:
    """The outermost bundle timetag, or None for a bare message."""
    return packet.timetag if isinstance(packet, OscBundle) else None


__all__ = [
    "MAX_BUNDLE_DEPTH",
    "IMMEDIATELY",
    "OscEncodeError",
    "OscDecodeError",
    "validate_address",
    "encode_message",
    "encode_bundle",
    "encode_packet",
    "decode_packet",
    "flatten_messages",
    "packet_timetag",
]
