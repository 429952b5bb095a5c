"""OSC 1.0 codec, address pattern matcher and UDP endpoint."""

from .messages import (
    IMMEDIATELY,
    OscAtom,
    OscBundle,
    OscMessage,
    timetag_from_unix_ms,
    timetag_to_unix_ms,
)
from .codec import OscDecodeError, OscEncodeError, decode_packet, encode_bundle, encode_message, encode_packet
from .patterns import OscPatternError, match_address
from .udp import EndpointConfig, OscUdpEndpoint

__all__ = [
    "IMMEDIATELY",
    "OscAtom",
    "OscBundle",
    "OscMessage",
    "timetag_from_unix_ms",
    "timetag_to_unix_ms",
    "OscDecodeError",
    "OscEncodeError",
    "decode_packet",
    "encode_bundle",
    "encode_message",
    "encode_packet",
    "OscPatternError",
    "match_address",
    "EndpointConfig",
    "OscUdpEndpoint",
]
