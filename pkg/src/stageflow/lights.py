"""Lamp states, the 20-slot memory store and the bridge client.

Lamp state lives in stage units (percent brightness/saturation, hue in
degrees); commands to the bridge use the consumer API's units (bri/sat in
1..254 resp. 0..254, hue as uint16). The bri range excludes 0, so 0%
brightness maps to bri 1 with the lamp switched off via the on flag.
"""

from __future__ import annotations

import json
import time
import urllib.error
import urllib.request
from dataclasses import dataclass
from typing import Mapping, Optional

from .errors import InputError, NotFoundError, RangeError

MAX_MEMORIES = 20
DEFAULT_TRANSITION_MS = 400

BRIDGE_RETRIES = 3
BRIDGE_BACKOFF_S = 0.1


@dataclass(frozen=True)
class LightState:
    on: bool = True
    brightness_pct: float = 100.0
    hue_deg: float = 0.0
    saturation_pct: float = 100.0

    def __post_init__(self):
        if not 0.0 <= self.brightness_pct <= 100.0:
            raise InputError(f"brightness must be in [0, 100], got {self.brightness_pct}")
        if not 0.0 <= self.hue_deg < 360.0:
            raise InputError(f"hue must be in [0, 360), got {self.hue_deg}")
        if not 0.0 <= self.saturation_pct <= 100.0:
            raise InputError(f"saturation must be in [0, 100], got {self.saturation_pct}")


@dataclass(frozen=True)
class LightMemory:
    index: int
    states: Mapping[str, LightState]
    label: str = ""

    def __post_init__(self):
        if not 1 <= self.index <= MAX_MEMORIES:
            raise RangeError(f"light memory index must be in [1, {MAX_MEMORIES}], got {self.index}")
        if not self.states:
            raise InputError(f"light memory {self.index} has an empty state map")
        object.__setattr__(self, "states", dict(self.states))


@dataclass(frozen=True)
class BridgeCommand:
    lamp_id: str
    on: bool
    bri: int
    hue_u16: int
    sat: int
    transition_ms: int = DEFAULT_TRANSITION_MS

    def body(self) -> dict:
        # transitiontime is in centiseconds in the bridge dialect
        return {
            "on": self.on,
            "bri": self.bri,
            "hue": self.hue_u16,
            "sat": self.sat,
            "transitiontime": round(self.transition_ms / 100),
        }


def map_to_bridge_units(s: LightState) -> tuple[int, int, int, bool]:
    """(bri, hue_u16, sat, on) in bridge API units.

    Hue wraps on the circle: 360 degrees maps back onto 0. The bri floor of
    1 keeps the value in the API's legal range; off-ness rides on the on
    flag instead.
    """
    bri = max(1, round(s.brightness_pct / 100.0 * 254))
    hue_u16 = round(s.hue_deg / 360.0 * 65536) % 65536
    sat = round(s.saturation_pct / 100.0 * 254)
    on = s.on and s.brightness_pct > 0.0
    return bri, hue_u16, sat, on


def command_for(lamp_id: str, state: LightState, transition_ms: int = DEFAULT_TRANSITION_MS) -> BridgeCommand:
    bri, hue_u16, sat, on = map_to_bridge_units(state)
    return BridgeCommand(lamp_id, on, bri, hue_u16, sat, transition_ms)


class MemoryStore:
    """Holds up to 20 light memories, indexed 1..20."""

    def __init__(self, memories: Optional[Mapping[int, LightMemory]] = None):
        self._memories: dict[int, LightMemory] = dict(memories or {})
        for index in self._memories:
            self._check_index(index)

    @staticmethod
    def _check_index(index: int) -> None:
        if not isinstance(index, int) or not 1 <= index <= MAX_MEMORIES:
            raise RangeError(f"light memory index must be in [1, {MAX_MEMORIES}], got {index}")

    def __len__(self) -> int:
        return len(self._memories)

    def __contains__(self, index: int) -> bool:
        return index in self._memories

    def indices(self) -> list[int]:
        return sorted(self._memories)

    def as_dict(self) -> dict[int, LightMemory]:
        return dict(self._memories)

    def save(self, index: int, current: Mapping[str, LightState], label: str = "") -> LightMemory:
        """Store (overwriting) the given lamp states at ``index``."""
        self._check_index(index)
        if not current:
            raise InputError("cannot save a memory from an empty lamp state map")
        memory = LightMemory(index=index, states=dict(current), label=label)
        self._memories[index] = memory
        return memory

    def get(self, index: int) -> LightMemory:
        self._check_index(index)
        if index not in self._memories:
            raise NotFoundError(f"light memory {index} is not saved")
        return self._memories[index]

    def recall(self, index: int, transition_ms: int = DEFAULT_TRANSITION_MS) -> list[BridgeCommand]:
        """One command per lamp in the memory, sorted by lamp id."""
        memory = self.get(index)
        return [
            command_for(lamp_id, memory.states[lamp_id], transition_ms)
            for lamp_id in sorted(memory.states)
        ]


class BridgeTransportError(Exception):
    """Bridge unreachable after bounded retries."""


class BridgeCommandError(Exception):
    """The bridge answered with an error body."""


class BridgeClient:
    """Thin client for the bridge's per-lamp state resource.

    ``lamp_map`` translates engine lamp ids to the bridge's numeric light
    ids. Transport failures retry a fixed number of times with a short
    backoff; rehearsal must never stall on lighting hardware, so callers
    are expected to log and drop on failure.
    """

    def __init__(
        self,
        base_url: str,
        api_key: str,
        lamp_map: Mapping[str, int],
        timeout_s: float = 2.0,
        retries: int = BRIDGE_RETRIES,
        backoff_s: float = BRIDGE_BACKOFF_S,
    ):
        self.base_url = base_url.rstrip("/")
        self.api_key = api_key
        self.lamp_map = dict(lamp_map)
        self.timeout_s = timeout_s
        self.retries = retries
        self.backoff_s = backoff_s

    def apply(self, cmd: BridgeCommand) -> list:
        """PUT the command body to the lamp's state resource."""
        if cmd.lamp_id not in self.lamp_map:
            raise BridgeCommandError(f"lamp {cmd.lamp_id!r} is not in the configured lamp map")
        light_id = self.lamp_map[cmd.lamp_id]
        url = f"{self.base_url}/api/{self.api_key}/lights/{light_id}/state"
        payload = json.dumps(cmd.body()).encode("utf-8")
        last_exc: Exception | None = None
        for attempt in range(self.retries):
            request = urllib.request.Request(url, data=payload, method="PUT")
            request.add_header("Content-Type", "application/json")
            try:
                with urllib.request.urlopen(request, timeout=self.timeout_s) as resp:
                    body = json.loads(resp.read().decode("utf-8"))
                errors = [e["error"] for e in body if isinstance(e, dict) and "error" in e]
                if errors:
                    raise BridgeCommandError(errors[0].get("description", "bridge error"))
                return body
            except urllib.error.HTTPError as exc:
                # an HTTP status error with a parseable error body is a
                # command failure, not a transport one; do not retry it
                try:
                    body = json.loads(exc.read().decode("utf-8"))
                    errors = [e["error"] for e in body if isinstance(e, dict) and "error" in e]
                except Exception:
                    errors = []
                if errors:
                    raise BridgeCommandError(errors[0].get("description", "bridge error")) from None
                raise BridgeCommandError(f"bridge answered HTTP {exc.code}") from None
            except (urllib.error.URLError, TimeoutError, ConnectionError, OSError) as exc:
                last_exc = exc
                if attempt + 1 < self.retries:
                    time.sleep(self.backoff_s)
        raise BridgeTransportError(f"bridge unreachable after {self.retries} attempts: {last_exc}")
