"""The engine loop: one thread owns all mutable show state.

Inputs arrive as OSC datagrams (sensor plane) or control commands (operator
plane); both are serialized onto a single queue, so flow evaluation, scene
mutation and state reads never interleave. Outputs leave through dedicated
sender threads behind bounded queues: a stuck lighting bridge or audio
device can never stall evaluation. When a bounded queue overflows, the
oldest command is dropped and the drop is logged.

Input OSC address map (see docs/osc-map.md):
    /in/position  ii ffii  person_id, frame_seq, x_px, y_px, frame_w, frame_h
    /in/landmark  ii ff    landmark_id, frame_seq, x, y
    /in/speech    s        transcript
    /in/emotion   s        label

Messages sharing one datagram and one frame_seq form one frame; send one
bundle per video frame. In external-clock mode the bundle timetag drives
the engine clock, which is how scripted replays stay deterministic.
"""

from __future__ import annotations

import collections
import json
import logging
import queue
import threading
import time
from concurrent.futures import Future
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

from .audio import (
    CueBank,
    FileAudioSink,
    NullAudioSink,
    PlaybackCommand,
    PlaybackStateMachine,
    SoundCue,
)
from .config import EngineSettings
from .errors import InputError, NotFoundError, RangeError, StageflowError
from .flows import ConditionStateSet, evaluate_event
from .lights import (
    BridgeClient,
    BridgeCommand,
    BridgeCommandError,
    BridgeTransportError,
    LightState,
    MemoryStore,
)
from .osc import (
    IMMEDIATELY,
    EndpointConfig,
    OscMessage,
    OscUdpEndpoint,
    decode_packet,
    encode_message,
    timetag_to_unix_ms,
)
from .osc.codec import OscDecodeError, OscEncodeError, flatten_messages, packet_timetag
from .perception import (
    EmotionEvent,
    GestureClassifier,
    GestureEvent,
    PositionFrame,
    PositionLog,
    RawDetection,
    SpeechEvent,
    build_frame,
)
from .scene import (
    EmitOsc,
    PlaySoundCue,
    RecallLightMemory,
    SceneDocument,
    StopSoundCue,
    action_to_jsonable,
    build_scene,
    parse_scene,
    scene_to_jsonable,
)

log = logging.getLogger("stageflow.engine")

ADDR_POSITION = "/in/position"
ADDR_LANDMARK = "/in/landmark"
ADDR_SPEECH = "/in/speech"
ADDR_EMOTION = "/in/emotion"

DISPATCH_QUEUE_MAX = 256
MONITOR_QUEUE_MAX = 1000

DEFAULT_RECORD_TOLERANCE_DEG = 15.0


def monotonic_ms() -> float:
    return time.monotonic() * 1000.0


# -- monitor stream -----------------------------------------------------------


@dataclass
class MonitorSubscription:
    kinds: Optional[set[str]]
    q: "queue.Queue[Optional[dict]]" = field(default_factory=lambda: queue.Queue(MONITOR_QUEUE_MAX))
    dropped: bool = False


class MonitorHub:
    """Fan-out of engine events to any number of bounded subscriber queues.

    Publishing never blocks: a subscriber that stops draining its queue is
    marked dropped and its feed ends after the backlog.
    """

    def __init__(self):
        self._lock = threading.Lock()
        self._subs: list[MonitorSubscription] = []
        self._seq = 0

    def subscribe(self, kinds: Optional[set[str]] = None) -> MonitorSubscription:
        sub = MonitorSubscription(kinds=kinds)
        with self._lock:
            self._subs.append(sub)
        return sub

    def unsubscribe(self, sub: MonitorSubscription) -> None:
        with self._lock:
            if sub in self._subs:
                self._subs.remove(sub)

    def publish(self, kind: str, payload: dict, t_ms: float) -> dict:
        with self._lock:
            self._seq += 1
            event = {"seq": self._seq, "t_ms": round(t_ms, 3), "kind": kind, "payload": payload}
            for sub in self._subs:
                if sub.dropped or (sub.kinds is not None and kind not in sub.kinds):
                    continue
                try:
                    sub.q.put_nowait(event)
                except queue.Full:
                    sub.dropped = True
        return event

    def close(self) -> None:
        with self._lock:
            for sub in self._subs:
                sub.dropped = True
                try:
                    sub.q.put_nowait(None)
                except queue.Full:
                    pass
            self._subs.clear()


# -- bounded dispatch queues -----------------------------------------------------


class BoundedDispatch:
    """Deque with drop-oldest overflow, consumed by one sender thread."""

    def __init__(self, maxlen: int = DISPATCH_QUEUE_MAX):
        self._items: collections.deque = collections.deque()
        self._maxlen = maxlen
        self._cond = threading.Condition()
        self._closed = False

    def put(self, item) -> Optional[Any]:
        """Returns the dropped item on overflow, else None."""
        dropped = None
        with self._cond:
            if len(self._items) >= self._maxlen:
                dropped = self._items.popleft()
            self._items.append(item)
            self._cond.notify()
        return dropped

    def get(self, timeout: float = 0.1):
        with self._cond:
            if not self._items:
                self._cond.wait(timeout)
            if self._items:
                return self._items.popleft()
            return None

    def close(self) -> None:
        with self._cond:
            self._closed = True
            self._cond.notify_all()

    @property
    def closed(self) -> bool:
        return self._closed


@dataclass
class Counters:
    """Shared progress counters; reads are approximate except through the loop."""

    packets_received: int = 0
    packets_processed: int = 0
    events_processed: int = 0
    flows_fired: int = 0
    outputs_enqueued: int = 0
    outputs_completed: int = 0
    bridge_applied: int = 0
    bridge_failed: int = 0
    bridge_dropped: int = 0
    audio_rendered: int = 0
    audio_dropped: int = 0
    osc_sent: int = 0
    osc_failed: int = 0
    errors: int = 0

    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def bump(self, name: str, amount: int = 1) -> None:
        with self._lock:
            setattr(self, name, getattr(self, name) + amount)

    def snapshot(self) -> dict:
        with self._lock:
            return {
                k: v
                for k, v in self.__dict__.items()
                if not k.startswith("_")
            }


# -- event summaries ---------------------------------------------------------------


def summarize_event(event) -> dict:
    if isinstance(event, GestureEvent):
        return {"type": "gesture", "name": event.name, "angle": round(event.measured_angle, 3)}
    if isinstance(event, PositionFrame):
        return {
            "type": "position",
            "persons": [
                {"id": p.person_id, "x": round(p.x_norm, 3), "y": round(p.y_norm, 3)}
                for p in event.persons
            ],
            "distances": [
                {"a": a, "b": b, "d": round(d, 3)} for (a, b), d in sorted(event.distances.items())
            ],
        }
    if isinstance(event, SpeechEvent):
        return {"type": "speech", "transcript": event.transcript}
    if isinstance(event, EmotionEvent):
        return {"type": "emotion", "label": event.label}
    return {"type": "unknown"}


class Engine:
    """Single-loop show engine; see the module docstring for the model."""

    def __init__(
        self,
        scene: SceneDocument,
        settings: EngineSettings,
        *,
        bridge_client: Optional[BridgeClient] = None,
        audio_sink=None,
        scene_dir: Optional[str] = None,
        scene_path: Optional[str] = None,
    ):
        self.settings = settings
        self.scene = scene
        self.scene_path = scene_path
        self.scene_dir = Path(scene_dir) if scene_dir else Path(settings.base_dir)

        self.states = ConditionStateSet(scene)
        self.memory = MemoryStore(scene.light_memories)
        self.bank = CueBank(default_gate=settings.defaults.gate)
        self.playback = PlaybackStateMachine()
        self.classifier = GestureClassifier(scene.gesture_templates)
        self.monitor = MonitorHub()
        self.counters = Counters()

        self.bridge_client = bridge_client or BridgeClient(
            settings.bridge.base_url, settings.bridge.api_key, settings.bridge.lamp_map()
        )
        if audio_sink is not None:
            self.audio_sink = audio_sink
        elif settings.audio.sink == "files":
            self.audio_sink = FileAudioSink(
                settings.resolve(settings.audio.out_dir), settings.resolve(settings.audio.command_log)
            )
        else:
            self.audio_sink = NullAudioSink()

        self._queue: "queue.Queue[tuple]" = queue.Queue()
        self._bridge_out = BoundedDispatch()
        self._audio_out = BoundedDispatch()

        self._current_lamp_states: dict[str, LightState] = {}
        self._pending_gesture_record: Optional[dict] = None
        self._external_now_ms: float = 0.0
        self._started_ms: float = 0.0
        self._stop = threading.Event()
        self._threads: list[threading.Thread] = []

        self._position_log: Optional[PositionLog] = None
        self._action_log = None

        self.osc = OscUdpEndpoint(
            EndpointConfig(
                bind_host=settings.osc.bind_host,
                bind_port=settings.osc.bind_port,
                destinations=settings.osc.send_to,
                max_datagram=settings.osc.max_datagram,
            ),
            on_packet=self._on_packet,
        )
        self.control_address: Optional[tuple[str, int]] = None  # set by the control service

    # -- lifecycle ---------------------------------------------------------------

    def start(self) -> None:
        self._started_ms = monotonic_ms()
        try:
            self._position_log = PositionLog.open(self.settings.resolve(self.settings.logs.position_log))
        except OSError as exc:
            log.warning("position log unavailable: %s", exc)
        try:
            self._action_log = open(self.settings.resolve(self.settings.logs.action_log), "a", encoding="utf-8")
        except OSError as exc:
            log.warning("action log unavailable: %s", exc)
        self._load_cue_bank(self.scene)
        self.osc.start()
        for name, target in (
            ("engine-loop", self._run),
            ("bridge-sender", self._bridge_sender),
            ("audio-sender", self._audio_sender),
        ):
            t = threading.Thread(target=target, name=name, daemon=True)
            t.start()
            self._threads.append(t)

    def stop(self) -> None:
        self._stop.set()
        self._bridge_out.close()
        self._audio_out.close()
        for t in self._threads:
            t.join(timeout=3.0)
        self.osc.close()
        self.monitor.close()
        if self._position_log is not None:
            self._position_log.close()
        if self._action_log is not None:
            self._action_log.close()
        self.audio_sink.close()

    def __enter__(self) -> "Engine":
        self.start()
        return self

    def __exit__(self, *exc) -> None:
        self.stop()

    @property
    def osc_address(self) -> tuple[str, int]:
        return self.osc.bound_address

    def now_ms(self) -> float:
        if self.settings.clock == "external":
            return self._external_now_ms
        return monotonic_ms()

    # -- control entry (any thread) -------------------------------------------------

    def submit(self, op: str, payload: Optional[dict] = None, timeout: float = 10.0):
        """Run a control command on the engine loop and wait for its result."""
        fut: Future = Future()
        self._queue.put(("cmd", op, payload or {}, fut))
        return fut.result(timeout=timeout)

    # -- OSC input (receiver thread) --------------------------------------------------

    def _on_packet(self, data: bytes, recv_ms: float) -> None:
        self.counters.bump("packets_received")
        self._queue.put(("packet", data, recv_ms))

    # -- engine loop -------------------------------------------------------------------

    def _run(self) -> None:
        while not self._stop.is_set():
            try:
                item = self._queue.get(timeout=0.05)
            except queue.Empty:
                continue
            try:
                if item[0] == "packet":
                    self._handle_packet(item[1], item[2])
                elif item[0] == "cmd":
                    _, op, payload, fut = item
                    if not fut.set_running_or_notify_cancel():
                        continue
                    try:
                        fut.set_result(self._handle_command(op, payload))
                    except BaseException as exc:  # noqa: BLE001 - surfaced to the caller
                        fut.set_exception(exc)
            except Exception:
                log.exception("engine loop error")

    def _note_error(self, code: str, message: str, **extra) -> None:
        self.counters.bump("errors")
        payload = {"code": code, "message": message, **extra}
        self.monitor.publish("error", payload, self.now_ms())
        log.warning("%s: %s", code, message)

    # -- packet handling ------------------------------------------------------------------

    def _handle_packet(self, data: bytes, recv_ms: float) -> None:
        try:
            packet = decode_packet(data)
        except OscDecodeError as exc:
            self._note_error("osc_decode", str(exc))
            self.counters.bump("packets_processed")
            return

        timetag = packet_timetag(packet)
        if timetag is not None and timetag != IMMEDIATELY:
            tag_ms = timetag_to_unix_ms(timetag)
            if self.settings.clock == "external":
                self._external_now_ms = tag_ms
            elif tag_ms > time.time() * 1000.0 + 50.0:
                # timed scheduling is out of scope: run now, note the deferral
                self._note_error(
                    "future_timetag",
                    "bundle carries a future timetag; executed immediately",
                    timetag_ms=round(tag_ms, 3),
                )

        position_groups: dict[int, list[RawDetection]] = {}
        landmark_groups: dict[int, dict[int, tuple[float, float]]] = {}
        discrete: list = []
        for msg in flatten_messages(packet):
            self._route_message(msg, position_groups, landmark_groups, discrete)

        now = self.now_ms()
        for seq, detections in position_groups.items():
            try:
                frame = build_frame(detections, now)
            except (InputError, StageflowError) as exc:
                self._note_error("bad_position_frame", str(exc), frame_seq=seq)
                continue
            if self._position_log is not None:
                try:
                    self._position_log.append(frame)
                except OSError as exc:
                    self._note_error("position_log", f"write failed: {exc}")
            self._process_event(frame)
        for seq, landmarks in landmark_groups.items():
            self._capture_pending_gesture(landmarks)
            for event in self.classifier.update(landmarks, now):
                self._process_event(event)
        for event in discrete:
            self._process_event(event)

        self.counters.bump("packets_processed")

    def _route_message(self, msg: OscMessage, position_groups, landmark_groups, discrete) -> None:
        now = self.now_ms()
        try:
            if msg.address == ADDR_POSITION:
                pid, seq, x_px, y_px, fw, fh = self._args(msg, (int, int, float, float, int, int))
                position_groups.setdefault(seq, []).append(
                    RawDetection(pid, x_px, y_px, fw, fh, timestamp_ms=now)
                )
            elif msg.address == ADDR_LANDMARK:
                lid, seq, x, y = self._args(msg, (int, int, float, float))
                landmark_groups.setdefault(seq, {})[lid] = (x, y)
            elif msg.address == ADDR_SPEECH:
                (transcript,) = self._args(msg, (str,))
                discrete.append(SpeechEvent(transcript, now))
            elif msg.address == ADDR_EMOTION:
                (label,) = self._args(msg, (str,))
                if label not in self.scene.input.emotion_labels:
                    raise InputError(
                        f"emotion label {label!r} is not in the configured set "
                        f"{list(self.scene.input.emotion_labels)}"
                    )
                discrete.append(EmotionEvent(label, now))
            else:
                self._note_error("unknown_address", f"no input route for {msg.address}")
        except (InputError, StageflowError) as exc:
            self._note_error("bad_input", f"{msg.address}: {exc}")

    @staticmethod
    def _args(msg: OscMessage, shape: tuple) -> tuple:
        if len(msg.args) != len(shape):
            raise InputError(f"expected {len(shape)} args, got {len(msg.args)}")
        coerced = []
        for i, (value, want) in enumerate(zip(msg.args, shape)):
            if want is float and isinstance(value, int):
                value = float(value)
            if not isinstance(value, want) or isinstance(value, bool):
                raise InputError(f"arg {i} must be {want.__name__}, got {type(value).__name__}")
            coerced.append(value)
        return tuple(coerced)

    # -- events and actions -------------------------------------------------------------------

    def _process_event(self, event) -> None:
        self.counters.bump("events_processed")
        now = self.now_ms()
        summary = summarize_event(event)
        self.monitor.publish("input", summary, now)
        firings = evaluate_event(event, self.scene, self.states, now)
        if not firings:
            return
        by_flow: dict[str, list] = {}
        for flow_id, action in firings:
            by_flow.setdefault(flow_id, []).append(action)
        for flow_id, actions in by_flow.items():
            self.counters.bump("flows_fired")
            record = {
                "ts": round(now, 3),
                "flow_id": flow_id,
                "event": summary,
                "actions": [action_to_jsonable(a) for a in actions],
            }
            self._append_action_log(record)
            self.monitor.publish("flow_fired", record, now)
            for action in actions:
                self._dispatch_action(flow_id, action, now)

    def _append_action_log(self, record: dict) -> None:
        if self._action_log is None:
            return
        try:
            self._action_log.write(json.dumps(record, separators=(",", ":")) + "\n")
            self._action_log.flush()
        except OSError as exc:
            self._note_error("action_log", f"write failed: {exc}")

    def _dispatch_action(self, flow_id: str, action, now: float) -> None:
        if isinstance(action, RecallLightMemory):
            try:
                commands = self.memory.recall(action.index, self.settings.defaults.transition_ms)
            except (NotFoundError, RangeError) as exc:
                self._note_error("recall_memory", str(exc), flow_id=flow_id)
                return
            memory = self.memory.get(action.index)
            self._current_lamp_states.update(memory.states)
            for cmd in commands:
                self._enqueue_bridge(cmd, flow_id)
        elif isinstance(action, PlaySoundCue):
            try:
                cue = self.bank.get(action.slot)
            except (NotFoundError, RangeError) as exc:
                self._note_error("trigger_cue", str(exc), flow_id=flow_id)
                return
            cmd = self.playback.trigger(action.slot, cue, now)
            self._enqueue_audio(cmd, cue, flow_id)
        elif isinstance(action, StopSoundCue):
            cmd = self.playback.stop(action.slot, now)
            self._enqueue_audio(cmd, None, flow_id)
        elif isinstance(action, EmitOsc):
            self._send_osc(action, flow_id)
        else:
            self._note_error("dispatch", f"unknown action {action!r}", flow_id=flow_id)

    def _enqueue_bridge(self, cmd: BridgeCommand, source: str) -> None:
        self.counters.bump("outputs_enqueued")
        self.monitor.publish(
            "output",
            {"channel": "bridge", "lamp": cmd.lamp_id, "body": cmd.body(), "source": source},
            self.now_ms(),
        )
        dropped = self._bridge_out.put(cmd)
        if dropped is not None:
            self.counters.bump("bridge_dropped")
            self.counters.bump("outputs_completed")
            self._note_error("bridge_overflow", f"dropped oldest command for lamp {dropped.lamp_id}")

    def _enqueue_audio(self, cmd: PlaybackCommand, cue: Optional[SoundCue], source: str) -> None:
        self.counters.bump("outputs_enqueued")
        self.monitor.publish(
            "output",
            {
                "channel": "audio",
                "action": cmd.action,
                "slot": cmd.slot,
                "device": cmd.device_id,
                "source": source,
            },
            self.now_ms(),
        )
        dropped = self._audio_out.put((cmd, cue))
        if dropped is not None:
            self.counters.bump("audio_dropped")
            self.counters.bump("outputs_completed")
            self._note_error("audio_overflow", f"dropped oldest command for slot {dropped[0].slot}")

    def _send_osc(self, action: EmitOsc, source: str) -> None:
        self.counters.bump("outputs_enqueued")
        try:
            data = encode_message(OscMessage(action.address, action.args))
            self.osc.send_bytes(data)
            self.counters.bump("osc_sent")
            self.monitor.publish(
                "output",
                {
                    "channel": "osc",
                    "address": action.address,
                    "args": list(action.args),
                    "source": source,
                },
                self.now_ms(),
            )
        except (OscEncodeError, ValueError, OSError) as exc:
            self.counters.bump("osc_failed")
            self._note_error("emit_osc", str(exc))
        finally:
            self.counters.bump("outputs_completed")

    # -- sender threads ---------------------------------------------------------------------

    def _bridge_sender(self) -> None:
        while not (self._bridge_out.closed and self._stop.is_set()):
            cmd = self._bridge_out.get(timeout=0.1)
            if cmd is None:
                if self._stop.is_set():
                    break
                continue
            try:
                self.bridge_client.apply(cmd)
                self.counters.bump("bridge_applied")
            except BridgeCommandError as exc:
                self.counters.bump("bridge_failed")
                self._note_error("bridge_command", str(exc), lamp=cmd.lamp_id)
            except BridgeTransportError as exc:
                self.counters.bump("bridge_failed")
                self._note_error("bridge_transport", str(exc), lamp=cmd.lamp_id)
            finally:
                self.counters.bump("outputs_completed")

    def _audio_sender(self) -> None:
        while not (self._audio_out.closed and self._stop.is_set()):
            item = self._audio_out.get(timeout=0.1)
            if item is None:
                if self._stop.is_set():
                    break
                continue
            cmd, cue = item
            try:
                if cmd.action == "play" and cue is not None:
                    self.audio_sink.play(cue, cmd, monotonic_ms())
                else:
                    self.audio_sink.stop(cmd, monotonic_ms())
                self.counters.bump("audio_rendered")
            except Exception as exc:  # noqa: BLE001 - audio must never kill the engine
                self._note_error("audio_sink", str(exc))
            finally:
                self.counters.bump("outputs_completed")

    # -- cue bank loading -----------------------------------------------------------------------

    def _load_cue_bank(self, scene: SceneDocument) -> None:
        self.bank = CueBank(default_gate=self.settings.defaults.gate)
        for slot, spec in sorted(scene.cues.items()):
            path = Path(spec.file)
            if not path.is_absolute():
                path = self.scene_dir / path
            try:
                self.bank.load_cue(
                    slot,
                    path,
                    device_id=spec.device,
                    gain_db=spec.gain_db,
                    gate=spec.gate,
                    apply_gate=spec.gate_on_load,
                )
            except (OSError, StageflowError) as exc:
                log.warning("cue %d (%s) not loaded: %s", slot, spec.file, exc)

    # -- control commands (engine loop) ------------------------------------------------------------

    def _handle_command(self, op: str, payload: dict):
        handler = getattr(self, f"_cmd_{op}", None)
        if handler is None:
            raise InputError(f"unknown control command {op!r}")
        result = handler(payload)
        if op != "status" and op != "sync" and op != "get_scene":
            self.monitor.publish("input", {"type": "control", "command": op, **_clean(payload)}, self.now_ms())
        return result

    def _cmd_sync(self, payload: dict) -> dict:
        return {"ok": True}

    def _cmd_status(self, payload: dict) -> dict:
        host, port = self.osc_address
        return {
            "running": not self._stop.is_set(),
            "scene": self.scene.name,
            "counts": self.scene.counts(),
            "endpoints": {
                "osc": {"host": host, "port": port},
                "control": (
                    {"host": self.control_address[0], "port": self.control_address[1]}
                    if self.control_address
                    else None
                ),
                "bridge": self.settings.bridge.base_url,
            },
            "clock": self.settings.clock,
            "uptime_s": round((monotonic_ms() - self._started_ms) / 1000.0, 3),
            "playback": {str(k): v for k, v in self.playback.snapshot().items()},
            "counters": self.counters.snapshot(),
        }

    def _cmd_get_scene(self, payload: dict) -> dict:
        return scene_to_jsonable(self.scene)

    def _cmd_put_scene(self, payload: dict) -> dict:
        if "text" in payload:
            scene = parse_scene(payload["text"])
        else:
            scene = build_scene(payload["data"])
        self.scene = scene
        self.states = ConditionStateSet(scene)
        self.memory = MemoryStore(scene.light_memories)
        self.classifier = GestureClassifier(scene.gesture_templates)
        self.playback = PlaybackStateMachine()
        self._load_cue_bank(scene)
        return {"loaded": True, "counts": scene.counts()}

    def _cmd_save_scene(self, payload: dict) -> dict:
        from .scene import save_scene_file

        path = payload.get("path") or self.scene_path
        if not path:
            raise InputError("no scene path: pass one or start the engine from a scene file")
        save_scene_file(self.scene, path)
        self.scene_path = str(path)
        return {"saved": str(path), "counts": self.scene.counts()}

    def _cmd_save_memory(self, payload: dict) -> dict:
        index = _require_int(payload, "index")
        label = payload.get("label", "")
        states_raw = payload.get("states")
        if states_raw:
            from .scene import _parse_light_state  # shared validation

            states = {
                str(lamp): _parse_light_state(body, f"states[{lamp}]") for lamp, body in states_raw.items()
            }
        else:
            states = dict(self._current_lamp_states)
            if not states:
                raise InputError(
                    "no lamp states to save: supply states in the request or recall a memory first"
                )
        memory = self.memory.save(index, states, label=label)
        self.scene.light_memories[index] = memory
        return {"saved": index, "lamps": sorted(memory.states)}

    def _cmd_recall_memory(self, payload: dict) -> dict:
        index = _require_int(payload, "index")
        commands = self.memory.recall(index, self.settings.defaults.transition_ms)
        memory = self.memory.get(index)
        self._current_lamp_states.update(memory.states)
        for cmd in commands:
            self._enqueue_bridge(cmd, "control")
        return {"recalled": index, "commands": len(commands)}

    def _cmd_trigger_cue(self, payload: dict) -> dict:
        slot = _require_int(payload, "slot")
        cue = self.bank.get(slot)
        cmd = self.playback.trigger(slot, cue, self.now_ms())
        self._enqueue_audio(cmd, cue, "control")
        return {"playing": slot}

    def _cmd_stop_cue(self, payload: dict) -> dict:
        slot = _require_int(payload, "slot")
        cmd = self.playback.stop(slot, self.now_ms())
        self._enqueue_audio(cmd, None, "control")
        return {"stopped": slot}

    def _cmd_set_flow_enabled(self, payload: dict) -> dict:
        flow_id = payload.get("flow_id")
        enabled = payload.get("enabled")
        if not isinstance(flow_id, str) or not isinstance(enabled, bool):
            raise InputError("set_flow_enabled needs flow_id (string) and enabled (boolean)")
        for flow in self.scene.flows:
            if flow.flow_id == flow_id:
                flow.enabled = enabled
                return {"flow_id": flow_id, "enabled": enabled}
        raise NotFoundError(f"no flow with id {flow_id!r}")

    def _cmd_record_gesture(self, payload: dict) -> dict:
        name = payload.get("name")
        if not isinstance(name, str) or not name:
            raise InputError("record_gesture needs a non-empty name")
        landmarks = payload.get("landmarks", list(self.scene.input.record_landmarks))
        if not isinstance(landmarks, list) or len(landmarks) != 3:
            raise InputError("record_gesture landmarks must name three landmark ids")
        tolerance = float(payload.get("tolerance_deg", DEFAULT_RECORD_TOLERANCE_DEG))
        self._pending_gesture_record = {
            "name": name,
            "landmarks": tuple(int(v) for v in landmarks),
            "tolerance": tolerance,
        }
        return {"armed": True, "name": name}

    def _capture_pending_gesture(self, landmarks: dict) -> None:
        pending = self._pending_gesture_record
        if pending is None:
            return
        ids = pending["landmarks"]
        if any(i not in landmarks for i in ids):
            return  # keep waiting for a frame that shows all three points
        from .perception import GestureTemplate, vertex_angle

        try:
            angle = vertex_angle(*(landmarks[i] for i in ids))
        except StageflowError as exc:
            self._note_error("record_gesture", str(exc))
            self._pending_gesture_record = None
            return
        template = GestureTemplate(
            name=pending["name"],
            landmark_ids=ids,
            target_angle=angle,
            tolerance=pending["tolerance"],
        )
        self.scene.gesture_templates = [
            t for t in self.scene.gesture_templates if t.name != template.name
        ] + [template]
        self.classifier.set_templates(self.scene.gesture_templates)
        self._pending_gesture_record = None
        self.monitor.publish(
            "input",
            {"type": "gesture_recorded", "name": template.name, "target_angle": round(angle, 3)},
            self.now_ms(),
        )


def _require_int(payload: dict, key: str) -> int:
    value = payload.get(key)
    if isinstance(value, bool) or not isinstance(value, int):
        raise InputError(f"{key} must be an integer, got {value!r}")
    return value


def _clean(payload: dict) -> dict:
    return {k: v for k, v in payload.items() if k in ("index", "slot", "flow_id", "enabled", "name")}
