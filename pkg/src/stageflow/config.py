"""Engine configuration: ports, bridge address, device map and defaults.

Config files are YAML; every field has a default so an empty config is
valid. Relative paths resolve against the config file's directory (or the
working directory when no file is given). ``STAGEFLOW_OSC_PORT`` and
``STAGEFLOW_CONTROL_PORT`` override the two ports from the environment.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import yaml

from .audio import GateSettings
from .errors import ConfigError

ENV_OSC_PORT = "STAGEFLOW_OSC_PORT"
ENV_CONTROL_PORT = "STAGEFLOW_CONTROL_PORT"


@dataclass(frozen=True)
class OscSettings:
    bind_host: str = "127.0.0.1"
    bind_port: int = 9000
    send_to: tuple[tuple[str, int], ...] = ()
    max_datagram: int = 1472


@dataclass(frozen=True)
class ControlSettings:
    host: str = "127.0.0.1"
    port: int = 8765


@dataclass(frozen=True)
class BridgeSettings:
    base_url: str = "http://127.0.0.1:8090"
    api_key: str = "devkey"
    lamps: tuple[tuple[str, int], ...] = (("lamp-a", 1), ("lamp-b", 2), ("lamp-c", 3))

    def lamp_map(self) -> dict[str, int]:
        return dict(self.lamps)


@dataclass(frozen=True)
class AudioSettings:
    sink: str = "files"  # "files" | "null"
    out_dir: str = "cue_renders"
    command_log: str = "cues.jsonl"
    devices: tuple[str, ...] = ("default", "main")


@dataclass(frozen=True)
class LogSettings:
    position_log: str = "positions.jsonl"
    action_log: str = "actions.jsonl"


@dataclass(frozen=True)
class EngineDefaults:
    cooldown_ms: int = 1000
    transition_ms: int = 400
    gate: GateSettings = field(default_factory=GateSettings)


@dataclass(frozen=True)
class EngineSettings:
    osc: OscSettings = field(default_factory=OscSettings)
    control: ControlSettings = field(default_factory=ControlSettings)
    bridge: BridgeSettings = field(default_factory=BridgeSettings)
    audio: AudioSettings = field(default_factory=AudioSettings)
    logs: LogSettings = field(default_factory=LogSettings)
    defaults: EngineDefaults = field(default_factory=EngineDefaults)
    clock: str = "wall"  # "wall" | "external"
    console_dir: Optional[str] = None
    base_dir: str = "."

    def resolve(self, path: str) -> Path:
        p = Path(path)
        return p if p.is_absolute() else Path(self.base_dir) / p


def _section(data: dict, key: str) -> dict:
    value = data.get(key) or {}
    if not isinstance(value, dict):
        raise ConfigError(f"config section {key!r} must be a mapping")
    return value


def _port(value, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or not 0 <= value <= 65535:
        raise ConfigError(f"{where} must be a port number, got {value!r}")
    return value


def settings_from_dict(data: dict, base_dir: str = ".") -> EngineSettings:
    osc_raw = _section(data, "osc")
    send_to = []
    for i, dest in enumerate(osc_raw.get("send_to") or []):
        if not isinstance(dest, dict) or "host" not in dest or "port" not in dest:
            raise ConfigError(f"osc.send_to[{i}] must be a mapping with host and port")
        send_to.append((str(dest["host"]), _port(dest["port"], f"osc.send_to[{i}].port")))
    osc = OscSettings(
        bind_host=str(osc_raw.get("bind_host", "127.0.0.1")),
        bind_port=_port(osc_raw.get("bind_port", 9000), "osc.bind_port"),
        send_to=tuple(send_to),
        max_datagram=int(osc_raw.get("max_datagram", 1472)),
    )

    control_raw = _section(data, "control")
    control = ControlSettings(
        host=str(control_raw.get("host", "127.0.0.1")),
        port=_port(control_raw.get("port", 8765), "control.port"),
    )

    bridge_raw = _section(data, "bridge")
    lamps_raw = bridge_raw.get("lamps")
    if lamps_raw is None:
        lamps = BridgeSettings().lamps
    elif isinstance(lamps_raw, dict):
        lamps = tuple(sorted((str(k), int(v)) for k, v in lamps_raw.items()))
    else:
        raise ConfigError("bridge.lamps must map lamp ids to bridge light numbers")
    bridge = BridgeSettings(
        base_url=str(bridge_raw.get("base_url", BridgeSettings.base_url)),
        api_key=str(bridge_raw.get("api_key", BridgeSettings.api_key)),
        lamps=lamps,
    )

    audio_raw = _section(data, "audio")
    sink_raw = audio_raw.get("sink", "files")
    sink = "null" if sink_raw is None else str(sink_raw)  # YAML reads a bare null as None
    if sink not in ("files", "null"):
        raise ConfigError(f"audio.sink must be 'files' or 'null', got {sink!r}")
    audio = AudioSettings(
        sink=sink,
        out_dir=str(audio_raw.get("out_dir", AudioSettings.out_dir)),
        command_log=str(audio_raw.get("command_log", AudioSettings.command_log)),
        devices=tuple(str(d) for d in (audio_raw.get("devices") or AudioSettings.devices)),
    )

    logs_raw = _section(data, "logs")
    logs = LogSettings(
        position_log=str(logs_raw.get("position_log", LogSettings.position_log)),
        action_log=str(logs_raw.get("action_log", LogSettings.action_log)),
    )

    defaults_raw = _section(data, "defaults")
    gate_raw = defaults_raw.get("gate") or {}
    if not isinstance(gate_raw, dict):
        raise ConfigError("defaults.gate must be a mapping")
    gate = GateSettings(
        threshold_db=float(gate_raw.get("threshold_db", -40.0)),
        attack_ms=float(gate_raw.get("attack_ms", 5.0)),
        release_ms=float(gate_raw.get("release_ms", 50.0)),
        window_ms=float(gate_raw.get("window_ms", 10.0)),
    )
    defaults = EngineDefaults(
        cooldown_ms=int(defaults_raw.get("cooldown_ms", 1000)),
        transition_ms=int(defaults_raw.get("transition_ms", 400)),
        gate=gate,
    )

    clock = str(data.get("clock", "wall"))
    if clock not in ("wall", "external"):
        raise ConfigError(f"clock must be 'wall' or 'external', got {clock!r}")

    console_dir = data.get("console_dir")

    settings = EngineSettings(
        osc=osc,
        control=control,
        bridge=bridge,
        audio=audio,
        logs=logs,
        defaults=defaults,
        clock=clock,
        console_dir=None if console_dir is None else str(console_dir),
        base_dir=base_dir,
    )
    return apply_env_overrides(settings)


def apply_env_overrides(settings: EngineSettings) -> EngineSettings:
    osc_port = os.environ.get(ENV_OSC_PORT)
    control_port = os.environ.get(ENV_CONTROL_PORT)
    if osc_port is not None:
        settings = EngineSettings(
            **{**settings.__dict__, "osc": OscSettings(**{**settings.osc.__dict__, "bind_port": int(osc_port)})}
        )
    if control_port is not None:
        settings = EngineSettings(
            **{
                **settings.__dict__,
                "control": ControlSettings(**{**settings.control.__dict__, "port": int(control_port)}),
            }
        )
    return settings


def load_settings(path: Optional[str] = None) -> EngineSettings:
    if path is None:
        return apply_env_overrides(EngineSettings())
    raw = Path(path).read_text(encoding="utf-8")
    try:
        data = yaml.safe_load(raw) or {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"config file {path}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must hold a mapping")
    return settings_from_dict(data, base_dir=str(Path(path).resolve().parent))
