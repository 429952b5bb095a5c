"""Scripted stand-in for the live sensors.

Replays timestamped position/landmark/speech/emotion steps as OSC into a
running engine and records everything that comes out: bridge PUTs (via the
simulated bridge it owns), audio sink log lines and generic OSC sends (via
a capture socket). In realtime mode steps go out on schedule and latency
is measured wall-to-wall; in accelerated mode the engine runs on the
script clock (bundle timetags) and the simulator advances only when the
engine has fully digested the previous step, so a transcript is
deterministic run-to-run.
"""

from __future__ import annotations

import json
import random
import socket
import subprocess
import sys
import tempfile
import threading
import time
import urllib.error
import urllib.request
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

import yaml

from .bridge_sim import ObservedCommand, SimulatedBridge
from .errors import StageflowError
from .osc import (
    IMMEDIATELY,
    EndpointConfig,
    OscBundle,
    OscMessage,
    OscUdpEndpoint,
    decode_packet,
    encode_packet,
    timetag_from_unix_ms,
)
from .osc.codec import OscDecodeError, flatten_messages

SCRIPT_SCHEMA_VERSION = 1

STEP_KINDS = ("positions", "landmarks", "speech", "emotion")

_POLL_S = 0.0005
_STEP_TIMEOUT_S = 10.0
_DRAIN_TIMEOUT_S = 1.0


class ScriptError(StageflowError):
    code = "script_error"

    def __init__(self, message: str, line: Optional[int] = None):
        if line is not None:
            message = f"{message} (line {line})"
        super().__init__(message)
        self.line = line


def monotonic_ms() -> float:
    return time.monotonic() * 1000.0


# -- script files ------------------------------------------------------------------


@dataclass(frozen=True)
class ScriptStep:
    at_ms: float
    kind: str  # one of STEP_KINDS
    payload: object
    line: Optional[int] = None


@dataclass(frozen=True)
class ScenarioScript:
    name: str
    steps: tuple[ScriptStep, ...]
    frame_width: int = 640
    frame_height: int = 480
    jitter_px: float = 0.0
    jitter_seed: int = 0


def _step_lines(text: str) -> list[Optional[int]]:
    """Start line (1-based) of each entry under the steps key."""
    try:
        root = yaml.compose(text)
    except yaml.YAMLError:
        return []
    if root is None or not hasattr(root, "value"):
        return []
    for key_node, value_node in getattr(root, "value", []):
        if getattr(key_node, "value", None) == "steps" and hasattr(value_node, "value"):
            return [getattr(item, "start_mark").line + 1 for item in value_node.value]
    return []


def parse_script(text: Union[str, bytes]) -> ScenarioScript:
    """Parse scenario text; order violations name the offending line."""
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ScriptError(
            str(getattr(exc, "problem", exc)), None if mark is None else mark.line + 1
        ) from None
    if not isinstance(data, dict):
        raise ScriptError("script must be a mapping")
    version = data.get("schema_version")
    if version != SCRIPT_SCHEMA_VERSION:
        raise ScriptError(
            f"script schema_version {version!r} is not supported; this engine reads version {SCRIPT_SCHEMA_VERSION}"
        )
    name = data.get("name", "scenario")
    frame = data.get("frame") or {}
    if not isinstance(frame, dict):
        raise ScriptError("frame must be a mapping with width/height")
    jitter = data.get("jitter") or {}
    if not isinstance(jitter, dict):
        raise ScriptError("jitter must be a mapping")

    steps_raw = data.get("steps", [])
    if not isinstance(steps_raw, list):
        raise ScriptError("steps must be a list")
    lines = _step_lines(text)
    steps: list[ScriptStep] = []
    last_at: Optional[float] = None
    for i, raw in enumerate(steps_raw):
        line = lines[i] if i < len(lines) else None
        if not isinstance(raw, dict):
            raise ScriptError(f"step {i} must be a mapping", line)
        if "at_ms" not in raw:
            raise ScriptError(f"step {i} is missing at_ms", line)
        at_ms = raw["at_ms"]
        if isinstance(at_ms, bool) or not isinstance(at_ms, (int, float)) or at_ms < 0:
            raise ScriptError(f"step {i}: at_ms must be a non-negative number", line)
        if last_at is not None and at_ms < last_at:
            raise ScriptError(f"step {i}: at_ms {at_ms} is earlier than the previous step ({last_at})", line)
        last_at = float(at_ms)
        payload_keys = [k for k in raw if k in STEP_KINDS]
        unknown = set(raw) - set(STEP_KINDS) - {"at_ms"}
        if unknown:
            raise ScriptError(f"step {i}: unknown fields {sorted(unknown)}", line)
        if len(payload_keys) != 1:
            raise ScriptError(f"step {i} must carry exactly one of {STEP_KINDS}", line)
        kind = payload_keys[0]
        payload = _validate_payload(kind, raw[kind], i, line)
        steps.append(ScriptStep(float(at_ms), kind, payload, line))

    return ScenarioScript(
        name=str(name),
        steps=tuple(steps),
        frame_width=int(frame.get("width", 640)),
        frame_height=int(frame.get("height", 480)),
        jitter_px=float(jitter.get("position_px", 0.0)),
        jitter_seed=int(jitter.get("seed", 0)),
    )


def _validate_payload(kind: str, raw, index: int, line):
    if kind == "positions":
        if not isinstance(raw, list) or not raw:
            raise ScriptError(f"step {index}: positions must be a non-empty list", line)
        out = []
        for j, p in enumerate(raw):
            if not isinstance(p, dict) or not {"id", "x_px", "y_px"} <= set(p):
                raise ScriptError(f"step {index}: positions[{j}] needs id, x_px, y_px", line)
            out.append({"id": int(p["id"]), "x_px": float(p["x_px"]), "y_px": float(p["y_px"])})
        return tuple((p["id"], p["x_px"], p["y_px"]) for p in out)
    if kind == "landmarks":
        if not isinstance(raw, list) or not raw:
            raise ScriptError(f"step {index}: landmarks must be a non-empty list", line)
        out = []
        for j, p in enumerate(raw):
            if not isinstance(p, dict) or not {"id", "x", "y"} <= set(p):
                raise ScriptError(f"step {index}: landmarks[{j}] needs id, x, y", line)
            out.append((int(p["id"]), float(p["x"]), float(p["y"])))
        return tuple(out)
    if kind == "speech":
        if not isinstance(raw, str) or not raw:
            raise ScriptError(f"step {index}: speech must be a non-empty string", line)
        return raw
    if kind == "emotion":
        if not isinstance(raw, str) or not raw:
            raise ScriptError(f"step {index}: emotion must be a non-empty string", line)
        return raw
    raise ScriptError(f"step {index}: unknown payload kind {kind}", line)


# -- transcripts ----------------------------------------------------------------------


@dataclass
class TranscriptInput:
    step: int
    at_ms: float
    kind: str
    detail: object
    sent_ms: float  # monotonic wall


@dataclass
class TranscriptOutput:
    channel: str  # bridge | audio | osc
    payload: dict
    observed_ms: float  # monotonic wall
    step: int = -1
    seq: int = 0

    @property
    def latency_ms(self) -> Optional[float]:
        return None if self._latency is None else self._latency

    _latency: Optional[float] = field(default=None, repr=False)


@dataclass
class RunTranscript:
    script_name: str
    mode: str
    inputs: list[TranscriptInput] = field(default_factory=list)
    outputs: list[TranscriptOutput] = field(default_factory=list)

    def pair_outputs(self) -> None:
        """Attribute outputs to inputs and compute per-pairing latency."""
        for out in self.outputs:
            if out.step < 0:
                candidates = [i for i in self.inputs if i.sent_ms <= out.observed_ms + 1e-6]
                out.step = candidates[-1].step if candidates else 0
            sent = next((i.sent_ms for i in self.inputs if i.step == out.step), None)
            out._latency = None if sent is None else out.observed_ms - sent

    def latencies(self) -> list[float]:
        return [out._latency for out in self.outputs if out._latency is not None]

    def outputs_on(self, channel: str) -> list[TranscriptOutput]:
        return [o for o in self.outputs if o.channel == channel]

    def normalized_jsonl(self) -> str:
        """Canonical transcript: wall-clock fields stripped, stable order."""
        lines = [
            json.dumps(
                {
                    "type": "run",
                    "name": self.script_name,
                    "mode": self.mode,
                    "inputs": len(self.inputs),
                    "outputs": len(self.outputs),
                },
                sort_keys=True,
                separators=(",", ":"),
            )
        ]
        for i in self.inputs:
            lines.append(
                json.dumps(
                    {"type": "input", "step": i.step, "at_ms": i.at_ms, "kind": i.kind, "detail": i.detail},
                    sort_keys=True,
                    separators=(",", ":"),
                )
            )
        ordered = sorted(self.outputs, key=lambda o: (o.step, o.channel, o.seq))
        # wall-clock fields and per-engine-run artifacts (render file names,
        # sink sequence numbers) are normalized out; semantics stay
        run_scoped = {"t_ms", "seq", "file"}
        for o in ordered:
            payload = {k: v for k, v in o.payload.items() if k not in run_scoped}
            lines.append(
                json.dumps(
                    {"type": "output", "step": o.step, "channel": o.channel, "payload": payload},
                    sort_keys=True,
                    separators=(",", ":"),
                )
            )
        return "\n".join(lines) + "\n"

    def summary(self) -> str:
        lat = self.latencies()
        base = f"{len(self.inputs)} inputs, {len(self.outputs)} outputs"
        if lat:
            base += f", max latency {max(lat):.1f} ms"
        return base


# -- output collection ------------------------------------------------------------------


class OutputCollector:
    """Gathers bridge PUTs, audio sink log lines and captured OSC sends."""

    def __init__(self, sink_log: Optional[Path] = None):
        self._lock = threading.Lock()
        self.outputs: list[TranscriptOutput] = []
        self._seq = {"bridge": 0, "audio": 0, "osc": 0}
        self.sink_log = sink_log
        self._sink_pos = 0
        self.capture: Optional[OscUdpEndpoint] = None

    def _add(self, channel: str, payload: dict, observed_ms: float) -> None:
        with self._lock:
            self._seq[channel] += 1
            self.outputs.append(
                TranscriptOutput(channel, payload, observed_ms, seq=self._seq[channel])
            )

    def mark(self) -> int:
        with self._lock:
            return len(self.outputs)

    def window(self, start: int) -> list[TranscriptOutput]:
        """Outputs observed since ``start``, renumbered per channel from 1."""
        with self._lock:
            outputs = list(self.outputs[start:])
        seq: dict[str, int] = {}
        for out in outputs:
            seq[out.channel] = seq.get(out.channel, 0) + 1
            out.seq = seq[out.channel]
        return outputs

    # bridge observer callback
    def on_bridge(self, cmd: ObservedCommand) -> None:
        self._add("bridge", {"light": cmd.light_id, "body": dict(sorted(cmd.body.items()))}, cmd.recv_ms)

    def start_capture(self) -> tuple[str, int]:
        def on_packet(data: bytes, recv_ms: float) -> None:
            try:
                packet = decode_packet(data)
            except OscDecodeError:
                self._add("osc", {"undecodable": data.hex()}, recv_ms)
                return
            for msg in flatten_messages(packet):
                self._add("osc", {"address": msg.address, "args": list(msg.args)}, recv_ms)

        self.capture = OscUdpEndpoint(EndpointConfig(bind_port=0), on_packet=on_packet)
        self.capture.start()
        return self.capture.bound_address

    def poll_sink_log(self) -> None:
        if self.sink_log is None or not self.sink_log.exists():
            return
        with open(self.sink_log, "r", encoding="utf-8") as f:
            f.seek(self._sink_pos)
            chunk = f.read()
            self._sink_pos = f.tell()
        for line in chunk.splitlines():
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError:
                continue
            self._add("audio", record, float(record.get("t_ms", 0.0)))

    def counts(self) -> dict[str, int]:
        with self._lock:
            return dict(self._seq)

    def close(self) -> None:
        if self.capture is not None:
            self.capture.close()


# -- engine client helpers ------------------------------------------------------------------


class EngineUnreachable(StageflowError):
    code = "engine_unreachable"


def _http_json(url: str, timeout: float = 2.0) -> dict:
    try:
        with urllib.request.urlopen(url, timeout=timeout) as resp:
            return json.loads(resp.read().decode("utf-8"))
    except (urllib.error.URLError, TimeoutError, OSError, json.JSONDecodeError) as exc:
        raise EngineUnreachable(f"engine control API unreachable at {url}: {exc}") from None


def _wait_for(predicate, timeout_s: float, what: str) -> None:
    deadline = time.monotonic() + timeout_s
    while time.monotonic() < deadline:
        if predicate():
            return
        time.sleep(_POLL_S)
    raise EngineUnreachable(f"timed out waiting for {what}")


# -- packet building ------------------------------------------------------------------------


def build_step_packet(step: ScriptStep, script: ScenarioScript, mode: str,
                      rng: Optional[random.Random] = None) -> tuple[OscBundle, object]:
    """One OSC bundle per step; returns (bundle, detail-for-transcript)."""
    timetag = timetag_from_unix_ms(step.at_ms) if mode == "accelerated" else IMMEDIATELY
    seq = int(step.at_ms)
    if step.kind == "positions":
        msgs = []
        detail = []
        for pid, x_px, y_px in step.payload:
            if rng is not None and script.jitter_px > 0:
                x_px = min(max(x_px + rng.uniform(-script.jitter_px, script.jitter_px), 0.0), script.frame_width)
                y_px = min(max(y_px + rng.uniform(-script.jitter_px, script.jitter_px), 0.0), script.frame_height)
            msgs.append(
                OscMessage(
                    "/in/position",
                    (pid, seq, float(x_px), float(y_px), script.frame_width, script.frame_height),
                )
            )
            detail.append({"id": pid, "x_px": round(x_px, 3), "y_px": round(y_px, 3)})
        return OscBundle(timetag, tuple(msgs)), detail
    if step.kind == "landmarks":
        msgs = tuple(
            OscMessage("/in/landmark", (lid, seq, float(x), float(y))) for lid, x, y in step.payload
        )
        detail = [{"id": lid, "x": x, "y": y} for lid, x, y in step.payload]
        return OscBundle(timetag, msgs), detail
    if step.kind == "speech":
        return OscBundle(timetag, (OscMessage("/in/speech", (step.payload,)),)), step.payload
    if step.kind == "emotion":
        return OscBundle(timetag, (OscMessage("/in/emotion", (step.payload,)),)), step.payload
    raise ScriptError(f"unknown step kind {step.kind}")


# -- the runner ------------------------------------------------------------------------------


def run_scenario(
    script: ScenarioScript,
    control_url: str,
    mode: str = "accelerated",
    collector: Optional[OutputCollector] = None,
) -> RunTranscript:
    """Drive a running engine with the script and record the outcome.

    The engine's clock mode must match: external for accelerated replays,
    wall for realtime ones. The collector carries whichever output
    observers the caller wired up (bridge observer, sink log, capture).
    """
    if mode not in ("realtime", "accelerated"):
        raise ScriptError(f"unknown clock mode {mode!r}")
    collector = collector or OutputCollector()
    status = _http_json(control_url.rstrip("/") + "/status")
    osc_ep = status["endpoints"]["osc"]
    dest = (osc_ep["host"], osc_ep["port"])
    base_counters = status["counters"]

    sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
    transcript = RunTranscript(script.name, mode)
    rng = random.Random(script.jitter_seed) if script.jitter_px > 0 else None
    start_ms = monotonic_ms()
    target_packets = base_counters.get("packets_processed", 0)
    window_start = collector.mark()

    try:
        for index, step in enumerate(script.steps):
            if mode == "realtime":
                delay_s = (start_ms + step.at_ms - monotonic_ms()) / 1000.0
                if delay_s > 0:
                    time.sleep(delay_s)
            bundle, detail = build_step_packet(step, script, mode, rng)
            data = encode_packet(bundle)
            sent_ms = monotonic_ms()
            sock.sendto(data, dest)
            transcript.inputs.append(TranscriptInput(index, step.at_ms, step.kind, detail, sent_ms))
            target_packets += 1
            if mode == "accelerated":
                _settle_step(control_url, collector, target_packets)
                _tag_untagged(collector, index)
        if mode == "realtime":
            _settle_realtime(control_url, collector)
    finally:
        sock.close()

    transcript.outputs = collector.window(window_start)
    transcript.pair_outputs()
    return transcript


def _status_counters(control_url: str) -> dict:
    return _http_json(control_url.rstrip("/") + "/status")["counters"]


def _settle_step(control_url: str, collector: OutputCollector, target_packets: int) -> None:
    _wait_for(
        lambda: _status_counters(control_url).get("packets_processed", 0) >= target_packets,
        _STEP_TIMEOUT_S,
        f"engine to process packet {target_packets}",
    )
    _wait_for(
        lambda: (
            lambda c: c.get("outputs_completed", 0) >= c.get("outputs_enqueued", 0)
        )(_status_counters(control_url)),
        _STEP_TIMEOUT_S,
        "output dispatch to quiesce",
    )
    counters = _status_counters(control_url)
    expect = {
        "bridge": counters.get("bridge_applied", 0),
        "audio": counters.get("audio_rendered", 0),
        "osc": counters.get("osc_sent", 0),
    }

    def drained() -> bool:
        collector.poll_sink_log()
        have = collector.counts()
        return all(have[ch] >= expect[ch] for ch in expect)

    try:
        _wait_for(drained, _DRAIN_TIMEOUT_S, "collector to observe all outputs")
    except EngineUnreachable:
        pass  # failed bridge sends etc. never reach an observer; carry on


def _settle_realtime(control_url: str, collector: OutputCollector) -> None:
    def quiet() -> bool:
        c = _status_counters(control_url)
        return c.get("outputs_completed", 0) >= c.get("outputs_enqueued", 0)

    try:
        _wait_for(quiet, 2.0, "output dispatch to quiesce")
    except EngineUnreachable:
        pass
    time.sleep(0.1)  # grace for in-flight loopback datagrams
    collector.poll_sink_log()


def _tag_untagged(collector: OutputCollector, step: int) -> None:
    with collector._lock:
        for out in collector.outputs:
            if out.step < 0:
                out.step = step


# -- full harness ------------------------------------------------------------------------------


@dataclass
class HarnessPorts:
    control_url: str
    osc: tuple[str, int]


class SimulationHarness:
    """Spawns an engine wired to a simulated bridge, file audio sink and
    OSC capture; runs scenarios against it.

    ``spawn=True`` launches the engine as a subprocess through the CLI
    (the arrangement the acceptance suite uses); ``spawn=False`` hosts it
    in-process, which is faster for unit tests.
    """

    def __init__(
        self,
        scene_text: str,
        mode: str = "accelerated",
        *,
        spawn: bool = True,
        workdir: Optional[Path] = None,
        cue_files: Optional[dict[str, bytes]] = None,
    ):
        self.mode = mode
        self.spawn = spawn
        self._tmp: Optional[tempfile.TemporaryDirectory] = None
        if workdir is None:
            self._tmp = tempfile.TemporaryDirectory(prefix="stageflow-sim-")
            workdir = Path(self._tmp.name)
        self.workdir = Path(workdir)
        self.workdir.mkdir(parents=True, exist_ok=True)

        for name, payload in (cue_files or {}).items():
            (self.workdir / name).write_bytes(payload)
        self.scene_path = self.workdir / "scene.scene"
        self.scene_path.write_text(scene_text, encoding="utf-8")

        self.collector = OutputCollector(sink_log=self.workdir / "cues.jsonl")
        self.bridge = SimulatedBridge(api_key="simkey", observer=self.collector.on_bridge)
        self.bridge.start()
        capture_host, capture_port = self.collector.start_capture()

        config = {
            "osc": {
                "bind_host": "127.0.0.1",
                "bind_port": 0,
                "send_to": [{"host": capture_host, "port": capture_port}],
            },
            "control": {"host": "127.0.0.1", "port": 0},
            "bridge": {
                "base_url": self.bridge.base_url,
                "api_key": "simkey",
                "lamps": {"lamp-a": 1, "lamp-b": 2, "lamp-c": 3},
            },
            "audio": {
                "sink": "files",
                "out_dir": "cue_renders",
                "command_log": "cues.jsonl",
            },
            "logs": {"position_log": "positions.jsonl", "action_log": "actions.jsonl"},
            "clock": "external" if mode == "accelerated" else "wall",
        }
        self.config_path = self.workdir / "engine.yaml"
        self.config_path.write_text(yaml.safe_dump(config), encoding="utf-8")

        self._proc: Optional[subprocess.Popen] = None
        self._engine = None
        self._service = None
        self.ports = self._start_engine()

    def _start_engine(self) -> HarnessPorts:
        if self.spawn:
            self._proc = subprocess.Popen(
                [sys.executable, "-m", "stageflow.cli", "run",
                 "--scene", str(self.scene_path), "--config", str(self.config_path)],
                stdout=subprocess.PIPE,
                stderr=subprocess.STDOUT,
                text=True,
                cwd=str(self.workdir),
            )
            ready = self._await_ready()
            return ready
        from .config import load_settings
        from .engine import Engine
        from .scene import parse_scene
        from .service import ControlService

        settings = load_settings(str(self.config_path))
        scene = parse_scene(self.scene_path.read_text(encoding="utf-8"))
        self._engine = Engine(scene, settings, scene_dir=str(self.workdir), scene_path=str(self.scene_path))
        self._engine.start()
        self._service = ControlService(self._engine, settings.control.host, settings.control.port)
        self._service.start()
        host, port = self._service.address
        return HarnessPorts(f"http://{host}:{port}", self._engine.osc_address)

    def _await_ready(self) -> HarnessPorts:
        assert self._proc is not None and self._proc.stdout is not None
        deadline = time.monotonic() + 15.0
        lines = []
        while time.monotonic() < deadline:
            line = self._proc.stdout.readline()
            if not line:
                if self._proc.poll() is not None:
                    break
                continue
            lines.append(line.rstrip())
            if line.startswith("READY "):
                fields = dict(part.split("=", 1) for part in line.split()[1:])
                control = fields["control"]
                osc_host, osc_port = fields["osc"].rsplit(":", 1)
                # keep draining stdout in the background so the pipe never fills
                threading.Thread(target=self._drain_stdout, daemon=True).start()
                return HarnessPorts(f"http://{control}", (osc_host, int(osc_port)))
        raise EngineUnreachable(
            "engine process did not report READY; output was:\n" + "\n".join(lines)
        )

    def _drain_stdout(self) -> None:
        assert self._proc is not None and self._proc.stdout is not None
        for _ in self._proc.stdout:
            pass

    def run(self, script: Union[ScenarioScript, str], fresh: bool = True) -> RunTranscript:
        """Run a scenario; ``fresh`` re-loads the scene first so edge state,
        hold counters and playback start pristine."""
        if isinstance(script, str):
            script = parse_script(script)
        if fresh:
            self._reload_scene()
        return run_scenario(script, self.ports.control_url, self.mode, self.collector)

    def _reload_scene(self) -> None:
        request = urllib.request.Request(
            self.ports.control_url + "/scene",
            data=self.scene_path.read_bytes(),
            method="PUT",
            headers={"Content-Type": "text/plain"},
        )
        with urllib.request.urlopen(request, timeout=5.0) as resp:
            resp.read()

    def close(self) -> None:
        if self._proc is not None:
            self._proc.terminate()
            try:
                self._proc.wait(timeout=5.0)
            except subprocess.TimeoutExpired:
                self._proc.kill()
                self._proc.wait(timeout=5.0)
        if self._service is not None:
            self._service.close()
        if self._engine is not None:
            self._engine.stop()
        self.bridge.close()
        self.collector.close()
        if self._tmp is not None:
            self._tmp.cleanup()

    def __enter__(self) -> "SimulationHarness":
        return self

    def __exit__(self, *exc) -> None:
        self.close()
