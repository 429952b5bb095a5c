"""Scene documents: the persisted authoring unit.

A scene bundles conditional flows, light memories, the cue bank layout,
gesture templates and the input configuration. Scene files are UTF-8 YAML
with a mandatory ``schema_version``; the exact grammar is documented in
docs/scene-format.md. Serialization is canonical: fixed field order, maps
sorted by key, floats in shortest round-trip form, so structurally equal
documents serialize to identical bytes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Mapping, Optional, Union

import yaml

from .audio import MAX_SLOTS, GateSettings
from .errors import StageflowError
from .lights import MAX_MEMORIES, LightMemory, LightState
from .osc.codec import OscEncodeError, validate_address
from .perception import GestureTemplate

SCENE_SCHEMA_VERSION = 1

DEFAULT_COOLDOWN_MS = 1000
DEFAULT_EMOTION_LABELS = ("angry", "happy", "neutral", "sad", "surprised")
DEFAULT_RECORD_LANDMARKS = (11, 13, 15)

MAX_TRIGGER_DISTANCE = 100.0 * math.sqrt(2.0)


class SceneError(StageflowError):
    code = "scene_error"


class SceneSyntaxError(SceneError):
    code = "scene_syntax"

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column


class SceneSemanticError(SceneError):
    code = "scene_semantic"


class SceneVersionError(SceneError):
    code = "scene_version"


# -- trigger and action variants -------------------------------------------------


@dataclass(frozen=True)
class GestureIs:
    name: str


@dataclass(frozen=True)
class PositionNear:
    x: float
    y: float
    radius: float
    person_id: Optional[int] = None  # None selects any person


@dataclass(frozen=True)
class DistanceBelow:
    threshold: float
    pair: Optional[tuple[int, int]] = None  # None selects any pair


@dataclass(frozen=True)
class DistanceAbove:
    threshold: float
    pair: Optional[tuple[int, int]] = None


@dataclass(frozen=True)
class PhraseSpoken:
    phrase: str


@dataclass(frozen=True)
class EmotionIs:
    label: str


TriggerCondition = Union[GestureIs, PositionNear, DistanceBelow, DistanceAbove, PhraseSpoken, EmotionIs]


@dataclass(frozen=True)
class RecallLightMemory:
    index: int


@dataclass(frozen=True)
class PlaySoundCue:
    slot: int


@dataclass(frozen=True)
class StopSoundCue:
    slot: int


@dataclass(frozen=True)
class EmitOsc:
    address: str
    args: tuple = ()


Action = Union[RecallLightMemory, PlaySoundCue, StopSoundCue, EmitOsc]


@dataclass
class Flow:
    """One conditional rule: when the trigger goes true, run the actions."""

    flow_id: str
    trigger: TriggerCondition
    actions: tuple[Action, ...]
    cooldown_ms: int = DEFAULT_COOLDOWN_MS
    enabled: bool = True


@dataclass(frozen=True)
class CueSpec:
    """Cue bank slot description as authored: a file plus routing."""

    file: str
    device: str = "default"
    gain_db: float = 0.0
    gate: Optional[GateSettings] = None
    gate_on_load: bool = False


@dataclass(frozen=True)
class InputConfig:
    frame_width: int = 640
    frame_height: int = 480
    emotion_labels: tuple[str, ...] = DEFAULT_EMOTION_LABELS
    record_landmarks: tuple[int, int, int] = DEFAULT_RECORD_LANDMARKS

    def __post_init__(self):
        object.__setattr__(self, "emotion_labels", tuple(sorted(self.emotion_labels)))
        object.__setattr__(self, "record_landmarks", tuple(self.record_landmarks))


@dataclass
class SceneDocument:
    name: str = "untitled"
    input: InputConfig = field(default_factory=InputConfig)
    gesture_templates: list[GestureTemplate] = field(default_factory=list)
    flows: list[Flow] = field(default_factory=list)
    light_memories: dict[int, LightMemory] = field(default_factory=dict)
    cues: dict[int, CueSpec] = field(default_factory=dict)
    schema_version: int = SCENE_SCHEMA_VERSION

    def counts(self) -> dict[str, int]:
        return {
            "flows": len(self.flows),
            "memories": len(self.light_memories),
            "cues": len(self.cues),
            "gesture_templates": len(self.gesture_templates),
        }


# -- parsing ----------------------------------------------------------------------


def _norm_key(key: Any) -> Any:
    # YAML 1.1 resolves a bare `on` key to boolean True; map it back
    if key is True:
        return "on"
    if key is False:
        return "off"
    return key


def _as_map(value: Any, where: str) -> dict:
    if not isinstance(value, dict):
        raise SceneSemanticError(f"{where} must be a mapping, got {type(value).__name__}")
    return {_norm_key(k): v for k, v in value.items()}


def _as_list(value: Any, where: str) -> list:
    if not isinstance(value, list):
        raise SceneSemanticError(f"{where} must be a list, got {type(value).__name__}")
    return value


def _as_str(value: Any, where: str) -> str:
    if not isinstance(value, str) or not value:
        raise SceneSemanticError(f"{where} must be a non-empty string, got {value!r}")
    return value


def _as_number(value: Any, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SceneSemanticError(f"{where} must be a number, got {value!r}")
    return float(value)


def _as_int(value: Any, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise SceneSemanticError(f"{where} must be an integer, got {value!r}")
    return value


def _as_bool(value: Any, where: str) -> bool:
    if not isinstance(value, bool):
        raise SceneSemanticError(f"{where} must be a boolean, got {value!r}")
    return value


def _index_key(key: Any, where: str) -> int:
    # YAML gives int keys, JSON bodies give strings; accept both
    if isinstance(key, str) and key.lstrip("-").isdigit():
        key = int(key)
    if isinstance(key, bool) or not isinstance(key, int):
        raise SceneSemanticError(f"{where} key must be an integer index, got {key!r}")
    return key


def _parse_trigger(raw: Any, flow_id: str) -> TriggerCondition:
    data = _as_map(raw, f"flow {flow_id}: when")
    if len(data) != 1:
        raise SceneSemanticError(f"flow {flow_id}: when must hold exactly one trigger kind")
    kind, body = next(iter(data.items()))
    where = f"flow {flow_id}: {kind}"
    if kind == "gesture":
        return GestureIs(_as_str(body, where))
    if kind == "phrase":
        return PhraseSpoken(_as_str(body, where))
    if kind == "emotion":
        return EmotionIs(_as_str(body, where))
    if kind == "near":
        body = _as_map(body, where)
        x = _as_number(body.get("x"), f"{where}.x")
        y = _as_number(body.get("y"), f"{where}.y")
        radius = _as_number(body.get("radius"), f"{where}.radius")
        if not 0.0 <= x <= 100.0 or not 0.0 <= y <= 100.0:
            raise SceneSemanticError(f"flow {flow_id}: near center ({x}, {y}) outside the 0-100 grid")
        if radius <= 0:
            raise SceneSemanticError(f"flow {flow_id}: near radius must be > 0, got {radius}")
        person = body.get("person")
        person_id = None if person is None else _as_int(person, f"{where}.person")
        unknown = set(body) - {"x", "y", "radius", "person"}
        if unknown:
            raise SceneSemanticError(f"{where}: unknown fields {sorted(unknown)}")
        return PositionNear(x, y, radius, person_id)
    if kind in ("distance_below", "distance_above"):
        body = _as_map(body, where)
        threshold = _as_number(body.get("threshold"), f"{where}.threshold")
        if not 0.0 < threshold < MAX_TRIGGER_DISTANCE:
            raise SceneSemanticError(
                f"flow {flow_id}: distance threshold must be in (0, {MAX_TRIGGER_DISTANCE:.3f}), got {threshold}"
            )
        pair = body.get("pair")
        pair_ids = None
        if pair is not None:
            pair = _as_list(pair, f"{where}.pair")
            if len(pair) != 2:
                raise SceneSemanticError(f"{where}.pair must name exactly two person ids")
            a, b = (_as_int(v, f"{where}.pair") for v in pair)
            if a == b:
                raise SceneSemanticError(f"{where}.pair must name two distinct person ids")
            pair_ids = (min(a, b), max(a, b))
        unknown = set(body) - {"threshold", "pair"}
        if unknown:
            raise SceneSemanticError(f"{where}: unknown fields {sorted(unknown)}")
        cls = DistanceBelow if kind == "distance_below" else DistanceAbove
        return cls(threshold, pair_ids)
    raise SceneSemanticError(f"flow {flow_id}: unknown trigger kind {kind!r}")


def _parse_osc_arg(raw: Any, where: str):
    if isinstance(raw, bool):
        raise SceneSemanticError(f"{where}: booleans are not OSC atoms; use 0/1")
    if isinstance(raw, (int, float, str)):
        return raw
    if isinstance(raw, dict) and set(raw) == {"b64"}:
        import base64

        try:
            return base64.b64decode(raw["b64"], validate=True)
        except Exception:
            raise SceneSemanticError(f"{where}: bad base64 blob") from None
    raise SceneSemanticError(f"{where}: unsupported OSC argument {raw!r}")


def _parse_action(raw: Any, flow_id: str, position: int) -> Action:
    data = _as_map(raw, f"flow {flow_id}: action {position}")
    if len(data) != 1:
        raise SceneSemanticError(f"flow {flow_id}: action {position} must hold exactly one action kind")
    kind, body = next(iter(data.items()))
    where = f"flow {flow_id}: action {position}"
    if kind == "recall_memory":
        index = _as_int(body, where)
        if not 1 <= index <= MAX_MEMORIES:
            raise SceneSemanticError(
                f"flow {flow_id} references light memory {index}, max is {MAX_MEMORIES}"
            )
        return RecallLightMemory(index)
    if kind in ("play_cue", "stop_cue"):
        slot = _as_int(body, where)
        if not 1 <= slot <= MAX_SLOTS:
            raise SceneSemanticError(f"flow {flow_id} references cue slot {slot}, max is {MAX_SLOTS}")
        return PlaySoundCue(slot) if kind == "play_cue" else StopSoundCue(slot)
    if kind == "emit_osc":
        body = _as_map(body, where)
        address = _as_str(body.get("address"), f"{where}.address")
        try:
            validate_address(address)
        except OscEncodeError as exc:
            raise SceneSemanticError(f"flow {flow_id}: bad OSC address: {exc}") from None
        args_raw = body.get("args", [])
        args = tuple(
            _parse_osc_arg(a, f"{where}.args[{i}]") for i, a in enumerate(_as_list(args_raw, f"{where}.args"))
        )
        unknown = set(body) - {"address", "args"}
        if unknown:
            raise SceneSemanticError(f"{where}: unknown fields {sorted(unknown)}")
        return EmitOsc(address, args)
    raise SceneSemanticError(f"flow {flow_id}: unknown action kind {kind!r}")


def _parse_gate(raw: Any, where: str) -> GateSettings:
    data = _as_map(raw, where)
    unknown = set(data) - {"threshold_db", "attack_ms", "release_ms", "window_ms"}
    if unknown:
        raise SceneSemanticError(f"{where}: unknown fields {sorted(unknown)}")
    try:
        return GateSettings(
            threshold_db=_as_number(data.get("threshold_db", -40.0), f"{where}.threshold_db"),
            attack_ms=_as_number(data.get("attack_ms", 5.0), f"{where}.attack_ms"),
            release_ms=_as_number(data.get("release_ms", 50.0), f"{where}.release_ms"),
            window_ms=_as_number(data.get("window_ms", 10.0), f"{where}.window_ms"),
        )
    except StageflowError as exc:
        raise SceneSemanticError(f"{where}: {exc}") from None


def _parse_light_state(raw: Any, where: str) -> LightState:
    data = _as_map(raw, where)
    unknown = set(data) - {"on", "brightness", "hue", "saturation"}
    if unknown:
        raise SceneSemanticError(f"{where}: unknown fields {sorted(unknown)}")
    try:
        return LightState(
            on=_as_bool(data.get("on", True), f"{where}.on"),
            brightness_pct=_as_number(data.get("brightness", 100.0), f"{where}.brightness"),
            hue_deg=_as_number(data.get("hue", 0.0), f"{where}.hue"),
            saturation_pct=_as_number(data.get("saturation", 100.0), f"{where}.saturation"),
        )
    except StageflowError as exc:
        raise SceneSemanticError(f"{where}: {exc}") from None


def build_scene(data: Any) -> SceneDocument:
    """Validate a plain mapping (from YAML or JSON) into a SceneDocument."""
    data = _as_map(data, "scene document")
    version = data.get("schema_version")
    if version is None:
        raise SceneVersionError("scene document is missing schema_version")
    if version != SCENE_SCHEMA_VERSION:
        raise SceneVersionError(
            f"scene schema_version {version} is not supported; this engine reads version {SCENE_SCHEMA_VERSION}"
        )
    known = {"schema_version", "name", "input", "gesture_templates", "flows", "light_memories", "cues"}
    unknown = set(data) - known
    if unknown:
        raise SceneSemanticError(f"scene document: unknown top-level fields {sorted(unknown)}")

    name = data.get("name", "untitled")
    if not isinstance(name, str):
        raise SceneSemanticError(f"scene name must be a string, got {name!r}")

    input_raw = _as_map(data.get("input", {}), "input")
    unknown = set(input_raw) - {"frame_width", "frame_height", "emotion_labels", "record_landmarks"}
    if unknown:
        raise SceneSemanticError(f"input: unknown fields {sorted(unknown)}")
    labels_raw = _as_list(input_raw.get("emotion_labels", list(DEFAULT_EMOTION_LABELS)), "input.emotion_labels")
    labels = tuple(_as_str(l, "input.emotion_labels entry") for l in labels_raw)
    record_raw = _as_list(
        input_raw.get("record_landmarks", list(DEFAULT_RECORD_LANDMARKS)), "input.record_landmarks"
    )
    if len(record_raw) != 3:
        raise SceneSemanticError("input.record_landmarks must name exactly three landmark ids")
    frame_w = _as_int(input_raw.get("frame_width", 640), "input.frame_width")
    frame_h = _as_int(input_raw.get("frame_height", 480), "input.frame_height")
    if frame_w <= 0 or frame_h <= 0:
        raise SceneSemanticError(f"input frame dimensions must be positive, got {frame_w}x{frame_h}")
    input_config = InputConfig(
        frame_width=frame_w,
        frame_height=frame_h,
        emotion_labels=labels,
        record_landmarks=tuple(_as_int(v, "input.record_landmarks entry") for v in record_raw),
    )

    templates: list[GestureTemplate] = []
    seen_template_names: set[str] = set()
    for i, raw in enumerate(_as_list(data.get("gesture_templates", []), "gesture_templates")):
        entry = _as_map(raw, f"gesture_templates[{i}]")
        unknown = set(entry) - {"name", "landmarks", "target_angle", "tolerance_deg", "hold_frames"}
        if unknown:
            raise SceneSemanticError(f"gesture_templates[{i}]: unknown fields {sorted(unknown)}")
        tname = _as_str(entry.get("name"), f"gesture_templates[{i}].name")
        if tname in seen_template_names:
            raise SceneSemanticError(f"duplicate gesture template name {tname!r}")
        seen_template_names.add(tname)
        lm = _as_list(entry.get("landmarks"), f"gesture_templates[{i}].landmarks")
        if len(lm) != 3:
            raise SceneSemanticError(f"gesture template {tname!r} must name exactly three landmarks")
        try:
            templates.append(
                GestureTemplate(
                    name=tname,
                    landmark_ids=tuple(_as_int(v, f"gesture_templates[{i}].landmarks") for v in lm),
                    target_angle=_as_number(entry.get("target_angle"), f"gesture_templates[{i}].target_angle"),
                    tolerance=_as_number(entry.get("tolerance_deg", 15.0), f"gesture_templates[{i}].tolerance_deg"),
                    hold_frames=_as_int(entry.get("hold_frames", 3), f"gesture_templates[{i}].hold_frames"),
                )
            )
        except StageflowError as exc:
            raise SceneSemanticError(f"gesture template {tname!r}: {exc}") from None

    memories: dict[int, LightMemory] = {}
    memories_raw = _as_map(data.get("light_memories", {}), "light_memories")
    if len(memories_raw) > MAX_MEMORIES:
        raise SceneSemanticError(f"scene defines {len(memories_raw)} light memories, max is {MAX_MEMORIES}")
    for key, raw in memories_raw.items():
        index = _index_key(key, "light_memories")
        if not 1 <= index <= MAX_MEMORIES:
            raise SceneSemanticError(f"light memory index {index} out of range, max is {MAX_MEMORIES}")
        entry = _as_map(raw, f"light_memories[{index}]")
        unknown = set(entry) - {"label", "states"}
        if unknown:
            raise SceneSemanticError(f"light_memories[{index}]: unknown fields {sorted(unknown)}")
        states_raw = _as_map(entry.get("states", {}), f"light_memories[{index}].states")
        if not states_raw:
            raise SceneSemanticError(f"light memory {index} has an empty state map")
        states = {
            _as_str(lamp, f"light_memories[{index}] lamp id"): _parse_light_state(
                s, f"light_memories[{index}].states[{lamp}]"
            )
            for lamp, s in states_raw.items()
        }
        label = entry.get("label", "")
        if not isinstance(label, str):
            raise SceneSemanticError(f"light_memories[{index}].label must be a string")
        memories[index] = LightMemory(index=index, states=states, label=label)

    cues: dict[int, CueSpec] = {}
    cues_raw = _as_map(data.get("cues", {}), "cues")
    if len(cues_raw) > MAX_SLOTS:
        raise SceneSemanticError(f"scene defines {len(cues_raw)} cues, max is {MAX_SLOTS}")
    for key, raw in cues_raw.items():
        slot = _index_key(key, "cues")
        if not 1 <= slot <= MAX_SLOTS:
            raise SceneSemanticError(f"cue slot {slot} out of range, max is {MAX_SLOTS}")
        entry = _as_map(raw, f"cues[{slot}]")
        unknown = set(entry) - {"file", "device", "gain_db", "gate", "gate_on_load"}
        if unknown:
            raise SceneSemanticError(f"cues[{slot}]: unknown fields {sorted(unknown)}")
        cues[slot] = CueSpec(
            file=_as_str(entry.get("file"), f"cues[{slot}].file"),
            device=_as_str(entry.get("device", "default"), f"cues[{slot}].device"),
            gain_db=_as_number(entry.get("gain_db", 0.0), f"cues[{slot}].gain_db"),
            gate=None if entry.get("gate") is None else _parse_gate(entry["gate"], f"cues[{slot}].gate"),
            gate_on_load=_as_bool(entry.get("gate_on_load", False), f"cues[{slot}].gate_on_load"),
        )

    flows: list[Flow] = []
    seen_flow_ids: set[str] = set()
    for i, raw in enumerate(_as_list(data.get("flows", []), "flows")):
        entry = _as_map(raw, f"flows[{i}]")
        unknown = set(entry) - {"id", "when", "then", "cooldown_ms", "enabled"}
        if unknown:
            raise SceneSemanticError(f"flows[{i}]: unknown fields {sorted(unknown)}")
        flow_id = _as_str(entry.get("id"), f"flows[{i}].id")
        if flow_id in seen_flow_ids:
            raise SceneSemanticError(f"duplicate flow id {flow_id!r}")
        seen_flow_ids.add(flow_id)
        trigger = _parse_trigger(entry.get("when"), flow_id)
        actions_raw = _as_list(entry.get("then"), f"flow {flow_id}: then")
        if not actions_raw:
            raise SceneSemanticError(f"flow {flow_id} has no actions")
        actions = tuple(_parse_action(a, flow_id, i) for i, a in enumerate(actions_raw))
        cooldown = _as_int(entry.get("cooldown_ms", DEFAULT_COOLDOWN_MS), f"flow {flow_id}: cooldown_ms")
        if cooldown < 0:
            raise SceneSemanticError(f"flow {flow_id}: cooldown_ms must be >= 0, got {cooldown}")
        flows.append(
            Flow(
                flow_id=flow_id,
                trigger=trigger,
                actions=actions,
                cooldown_ms=cooldown,
                enabled=_as_bool(entry.get("enabled", True), f"flow {flow_id}: enabled"),
            )
        )

    scene = SceneDocument(
        name=name,
        input=input_config,
        gesture_templates=templates,
        flows=flows,
        light_memories=memories,
        cues=cues,
        schema_version=SCENE_SCHEMA_VERSION,
    )
    _check_references(scene)
    return scene


def _check_references(scene: SceneDocument) -> None:
    """Every referenced memory index, cue slot, gesture and emotion must exist."""
    template_names = {t.name for t in scene.gesture_templates}
    for flow in scene.flows:
        for action in flow.actions:
            if isinstance(action, RecallLightMemory) and action.index not in scene.light_memories:
                raise SceneSemanticError(
                    f"flow {flow.flow_id} references light memory {action.index}, which is not defined"
                )
            if isinstance(action, (PlaySoundCue, StopSoundCue)) and action.slot not in scene.cues:
                raise SceneSemanticError(
                    f"flow {flow.flow_id} references cue slot {action.slot}, which is not defined"
                )
        if isinstance(flow.trigger, GestureIs) and flow.trigger.name not in template_names:
            raise SceneSemanticError(
                f"flow {flow.flow_id} triggers on gesture {flow.trigger.name!r}, which has no template"
            )
        if isinstance(flow.trigger, EmotionIs) and flow.trigger.label not in scene.input.emotion_labels:
            raise SceneSemanticError(
                f"flow {flow.flow_id} triggers on emotion {flow.trigger.label!r}, "
                f"which is not in the configured label set {list(scene.input.emotion_labels)}"
            )


def load_scene_file(path) -> SceneDocument:
    """Read and parse a scene file; errors carry the path."""
    from pathlib import Path

    from .errors import NotFoundError

    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise NotFoundError(f"scene file {p} does not exist") from None
    except OSError as exc:
        raise SceneError(f"scene file {p} is unreadable: {exc}") from None
    try:
        return parse_scene(text)
    except SceneError as exc:
        exc.message = f"{p}: {exc.message}"
        exc.args = (exc.message,)
        raise


def save_scene_file(scene: SceneDocument, path) -> None:
    """Write the canonical scene text atomically (temp file + rename)."""
    import os
    import tempfile
    from pathlib import Path

    p = Path(path)
    text = serialize_scene(scene)
    fd, tmp_name = tempfile.mkstemp(prefix=p.name + ".", suffix=".tmp", dir=str(p.parent))
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(text)
        os.replace(tmp_name, p)
    except OSError as exc:
        try:
            os.unlink(tmp_name)
        except OSError:
            pass
        raise SceneError(f"could not write scene file {p}: {exc}") from None


def parse_scene(text: Union[str, bytes]) -> SceneDocument:
    """Parse scene-file text; syntax errors carry line/column."""
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise SceneSyntaxError(f"scene file is not valid UTF-8: {exc}") from None
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        if mark is not None:
            raise SceneSyntaxError(str(getattr(exc, "problem", exc)), mark.line + 1, mark.column + 1) from None
        raise SceneSyntaxError(str(exc)) from None
    if data is None:
        raise SceneSemanticError("scene file is empty")
    return build_scene(data)


# -- canonical serialization --------------------------------------------------------

_IDENT_KEYS = set(
    """schema_version name input frame_width frame_height emotion_labels record_landmarks
    gesture_templates landmarks target_angle tolerance_deg hold_frames flows id when then
    cooldown_ms enabled light_memories label states brightness hue saturation cues file
    device gain_db gate gate_on_load threshold_db attack_ms release_ms window_ms gesture
    phrase emotion near x y radius person distance_below distance_above threshold pair
    recall_memory play_cue stop_cue emit_osc address args b64""".split()
)


def _fmt_str(value: str) -> str:
    import json

    return json.dumps(value)


def _fmt_float(value: float) -> str:
    s = repr(float(value))
    # PyYAML needs a dot in the mantissa to resolve scientific notation as float
    if "e" in s and "." not in s.split("e")[0]:
        head, tail = s.split("e")
        s = f"{head}.0e{tail}"
    return s


def _fmt_scalar(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return _fmt_float(value)
    if isinstance(value, str):
        return _fmt_str(value)
    raise TypeError(f"cannot serialize scalar {value!r}")


def _fmt_key(key: Any) -> str:
    if isinstance(key, int) and not isinstance(key, bool):
        return str(key)
    if isinstance(key, str) and key in _IDENT_KEYS:
        return key
    return _fmt_str(str(key))


def _fmt_inline_map(items: list[tuple[Any, Any]]) -> str:
    parts = [f"{_fmt_key(k)}: {_fmt_scalar(v)}" for k, v in items]
    return "{" + ", ".join(parts) + "}"


def _fmt_inline_list(values: list) -> str:
    return "[" + ", ".join(_fmt_scalar(v) for v in values) + "]"


def _trigger_fields(trigger: TriggerCondition) -> tuple[str, Any]:
    if isinstance(trigger, GestureIs):
        return "gesture", trigger.name
    if isinstance(trigger, PhraseSpoken):
        return "phrase", trigger.phrase
    if isinstance(trigger, EmotionIs):
        return "emotion", trigger.label
    if isinstance(trigger, PositionNear):
        items = [("x", trigger.x), ("y", trigger.y), ("radius", trigger.radius)]
        if trigger.person_id is not None:
            items.append(("person", trigger.person_id))
        return "near", items
    if isinstance(trigger, DistanceBelow):
        kind = "distance_below"
    elif isinstance(trigger, DistanceAbove):
        kind = "distance_above"
    else:
        raise TypeError(f"unknown trigger {trigger!r}")
    items = [("threshold", trigger.threshold)]
    if trigger.pair is not None:
        items.append(("pair", list(trigger.pair)))
    return kind, items


def _emit_trigger(trigger: TriggerCondition) -> str:
    kind, body = _trigger_fields(trigger)
    if isinstance(body, list):
        parts = []
        for k, v in body:
            parts.append(f"{_fmt_key(k)}: {_fmt_inline_list(v) if isinstance(v, list) else _fmt_scalar(v)}")
        return "{" + f"{kind}: " + "{" + ", ".join(parts) + "}" + "}"
    return "{" + f"{kind}: {_fmt_scalar(body)}" + "}"


def _emit_action(action: Action) -> str:
    if isinstance(action, RecallLightMemory):
        return f"{{recall_memory: {action.index}}}"
    if isinstance(action, PlaySoundCue):
        return f"{{play_cue: {action.slot}}}"
    if isinstance(action, StopSoundCue):
        return f"{{stop_cue: {action.slot}}}"
    if isinstance(action, EmitOsc):
        args = []
        for a in action.args:
            if isinstance(a, bytes):
                import base64

                args.append('{b64: ' + _fmt_str(base64.b64encode(a).decode("ascii")) + "}")
            else:
                args.append(_fmt_scalar(a))
        return "{emit_osc: {address: " + _fmt_str(action.address) + ", args: [" + ", ".join(args) + "]}}"
    raise TypeError(f"unknown action {action!r}")


def serialize_scene(scene: SceneDocument) -> str:
    """Canonical scene-file text; re-parses to an equal document."""
    out: list[str] = []
    out.append(f"schema_version: {scene.schema_version}")
    out.append(f"name: {_fmt_str(scene.name)}")
    out.append("input:")
    out.append(f"  frame_width: {scene.input.frame_width}")
    out.append(f"  frame_height: {scene.input.frame_height}")
    out.append(f"  emotion_labels: {_fmt_inline_list(list(scene.input.emotion_labels))}")
    out.append(f"  record_landmarks: {_fmt_inline_list(list(scene.input.record_landmarks))}")
    out.append("gesture_templates:" if scene.gesture_templates else "gesture_templates: []")
    for t in scene.gesture_templates:
        out.append(f"- name: {_fmt_str(t.name)}")
        out.append(f"  landmarks: {_fmt_inline_list(list(t.landmark_ids))}")
        out.append(f"  target_angle: {_fmt_float(t.target_angle)}")
        out.append(f"  tolerance_deg: {_fmt_float(t.tolerance)}")
        out.append(f"  hold_frames: {t.hold_frames}")
    out.append("flows:" if scene.flows else "flows: []")
    for flow in scene.flows:
        out.append(f"- id: {_fmt_str(flow.flow_id)}")
        out.append(f"  when: {_emit_trigger(flow.trigger)}")
        out.append("  then:")
        for action in flow.actions:
            out.append(f"  - {_emit_action(action)}")
        out.append(f"  cooldown_ms: {flow.cooldown_ms}")
        out.append(f"  enabled: {'true' if flow.enabled else 'false'}")
    out.append("light_memories:" if scene.light_memories else "light_memories: {}")
    for index in sorted(scene.light_memories):
        memory = scene.light_memories[index]
        out.append(f"  {index}:")
        out.append(f"    label: {_fmt_str(memory.label)}")
        out.append("    states:")
        for lamp_id in sorted(memory.states):
            s = memory.states[lamp_id]
            body = _fmt_inline_map(
                [
                    ("on", s.on),
                    ("brightness", s.brightness_pct),
                    ("hue", s.hue_deg),
                    ("saturation", s.saturation_pct),
                ]
            )
            out.append(f"      {_fmt_str(lamp_id)}: {body}")
    out.append("cues:" if scene.cues else "cues: {}")
    for slot in sorted(scene.cues):
        cue = scene.cues[slot]
        out.append(f"  {slot}:")
        out.append(f"    file: {_fmt_str(cue.file)}")
        out.append(f"    device: {_fmt_str(cue.device)}")
        out.append(f"    gain_db: {_fmt_float(cue.gain_db)}")
        if cue.gate is not None:
            g = cue.gate
            body = _fmt_inline_map(
                [
                    ("threshold_db", g.threshold_db),
                    ("attack_ms", g.attack_ms),
                    ("release_ms", g.release_ms),
                    ("window_ms", g.window_ms),
                ]
            )
            out.append(f"    gate: {body}")
        out.append(f"    gate_on_load: {'true' if cue.gate_on_load else 'false'}")
    return "\n".join(out) + "\n"


# -- JSON (control API) form ----------------------------------------------------------


def trigger_to_jsonable(trigger: TriggerCondition) -> dict:
    kind, body = _trigger_fields(trigger)
    if isinstance(body, list):
        return {kind: {k: v for k, v in body}}
    return {kind: body}


def action_to_jsonable(action: Action) -> dict:
    if isinstance(action, RecallLightMemory):
        return {"recall_memory": action.index}
    if isinstance(action, PlaySoundCue):
        return {"play_cue": action.slot}
    if isinstance(action, StopSoundCue):
        return {"stop_cue": action.slot}
    if isinstance(action, EmitOsc):
        import base64

        args = [
            {"b64": base64.b64encode(a).decode("ascii")} if isinstance(a, bytes) else a
            for a in action.args
        ]
        return {"emit_osc": {"address": action.address, "args": args}}
    raise TypeError(f"unknown action {action!r}")


def scene_to_jsonable(scene: SceneDocument) -> dict:
    """Plain-JSON structural form mirroring the scene file layout."""
    trigger_json = trigger_to_jsonable
    action_json = action_to_jsonable

    return {
        "schema_version": scene.schema_version,
        "name": scene.name,
        "input": {
            "frame_width": scene.input.frame_width,
            "frame_height": scene.input.frame_height,
            "emotion_labels": list(scene.input.emotion_labels),
            "record_landmarks": list(scene.input.record_landmarks),
        },
        "gesture_templates": [
            {
                "name": t.name,
                "landmarks": list(t.landmark_ids),
                "target_angle": t.target_angle,
                "tolerance_deg": t.tolerance,
                "hold_frames": t.hold_frames,
            }
            for t in scene.gesture_templates
        ],
        "flows": [
            {
                "id": f.flow_id,
                "when": trigger_json(f.trigger),
                "then": [action_json(a) for a in f.actions],
                "cooldown_ms": f.cooldown_ms,
                "enabled": f.enabled,
            }
            for f in scene.flows
        ],
        "light_memories": {
            str(index): {
                "label": m.label,
                "states": {
                    lamp: {
                        "on": s.on,
                        "brightness": s.brightness_pct,
                        "hue": s.hue_deg,
                        "saturation": s.saturation_pct,
                    }
                    for lamp, s in sorted(m.states.items())
                },
            }
            for index, m in sorted(scene.light_memories.items())
        },
        "cues": {
            str(slot): {
                "file": c.file,
                "device": c.device,
                "gain_db": c.gain_db,
                **(
                    {
                        "gate": {
                            "threshold_db": c.gate.threshold_db,
                            "attack_ms": c.gate.attack_ms,
                            "release_ms": c.gate.release_ms,
                            "window_ms": c.gate.window_ms,
                        }
                    }
                    if c.gate is not None
                    else {}
                ),
                "gate_on_load": c.gate_on_load,
            }
            for slot, c in sorted(scene.cues.items())
        },
    }


def scene_from_jsonable(data: Mapping) -> SceneDocument:
    return build_scene(dict(data))
