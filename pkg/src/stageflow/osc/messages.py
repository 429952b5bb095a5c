"""Wire-level OSC 1.0 value types.

Argument atoms are plain Python values mapped onto the four core typetags:
``int`` -> 'i' (int32), ``float`` -> 'f' (float32), ``str`` -> 's',
``bytes`` -> 'b' (blob). Extended OSC 1.1 types are deliberately unsupported.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

OscAtom = Union[int, float, str, bytes]

#: Timetag value meaning "execute immediately".
IMMEDIATELY = 1

# Offset between the NTP epoch (1900-01-01) and the Unix epoch (1970-01-01).
_NTP_UNIX_OFFSET_S = 2_208_988_800

INT32_MIN = -(2**31)
INT32_MAX = 2**31 - 1


def timetag_from_unix_ms(ms: float) -> int:
    """Pack a Unix-epoch millisecond instant into a 64-bit NTP timetag."""
    seconds = ms / 1000.0 + _NTP_UNIX_OFFSET_S
    whole = int(seconds)
    frac = int(round((seconds - whole) * (1 << 32)))
    if frac == 1 << 32:
        whole += 1
        frac = 0
    return (whole << 32) | frac


def timetag_to_unix_ms(tag: int) -> float:
    """Unpack a 64-bit NTP timetag into Unix-epoch milliseconds."""
    whole = tag >> 32
    frac = tag & 0xFFFFFFFF
    return (whole - _NTP_UNIX_OFFSET_S) * 1000.0 + frac / (1 << 32) * 1000.0


@dataclass(frozen=True)
class OscMessage:
    """One OSC message: an address plus an ordered argument list."""

    address: str
    args: tuple[OscAtom, ...] = ()

    def __post_init__(self):
        if not isinstance(self.args, tuple):
            object.__setattr__(self, "args", tuple(self.args))


@dataclass(frozen=True)
class OscBundle:
    """An OSC bundle: a timetag plus messages or nested bundles."""

    timetag: int = IMMEDIATELY
    elements: tuple[Union["OscMessage", "OscBundle"], ...] = ()

    def __post_init__(self):
        if not isinstance(self.elements, tuple):
            object.__setattr__(self, "elements", tuple(self.elements))


OscPacket = Union[OscMessage, OscBundle]
