"""Scene file parse/serialize tests: the demo scene, canonical form,
boundary documents and semantic error messages."""

import pytest

from stageflow.demo import demo_scene
from stageflow.lights import LightMemory, LightState
from stageflow.scene import (
    CueSpec,
    DistanceAbove,
    DistanceBelow,
    EmitOsc,
    EmotionIs,
    Flow,
    GestureIs,
    InputConfig,
    PhraseSpoken,
    PlaySoundCue,
    PositionNear,
    RecallLightMemory,
    SceneDocument,
    SceneSemanticError,
    SceneSyntaxError,
    SceneVersionError,
    StopSoundCue,
    build_scene,
    parse_scene,
    scene_from_jsonable,
    scene_to_jsonable,
    serialize_scene,
)

WORKED_EXAMPLE = """\
schema_version: 1
name: "raised hand and chair"
gesture_templates:
- name: raised_hand
  landmarks: [12, 14, 16]
  target_angle: 170.0
  tolerance_deg: 15.0
  hold_frames: 3
flows:
- id: f1
  when: {gesture: raised_hand}
  then:
  - {recall_memory: 1}
- id: f2
  when: {near: {x: 50.0, y: 50.0, radius: 5.0}}
  then:
  - {play_cue: 1}
light_memories:
  1:
    label: "lamp A red"
    states:
      lamp-a: {"on": true, brightness: 100.0, hue: 0.0, saturation: 100.0}
cues:
  1:
    file: "chime.wav"
    device: main
"""


def test_worked_example_counts():
    scene = parse_scene(WORKED_EXAMPLE)
    counts = scene.counts()
    assert counts["flows"] == 2
    assert counts["memories"] == 1
    assert counts["cues"] == 1
    assert isinstance(scene.flows[0].trigger, GestureIs)
    assert scene.flows[0].actions == (RecallLightMemory(1),)
    assert isinstance(scene.flows[1].trigger, PositionNear)
    assert scene.flows[1].cooldown_ms == 1000  # default


def test_worked_example_matches_built_in():
    assert parse_scene(WORKED_EXAMPLE) == demo_scene()


def test_empty_scene_is_valid_and_inert():
    scene = parse_scene("schema_version: 1\nname: empty\n")
    assert scene.flows == [] and scene.light_memories == {} and scene.cues == {}


def test_memory_21_is_semantic_error():
    text = WORKED_EXAMPLE.replace("{recall_memory: 1}", "{recall_memory: 21}")
    with pytest.raises(SceneSemanticError, match=r"flow f1 references light memory 21, max is 20"):
        parse_scene(text)


def test_cue_slot_9_is_semantic_error():
    text = WORKED_EXAMPLE.replace("{play_cue: 1}", "{play_cue: 9}")
    with pytest.raises(SceneSemanticError, match=r"flow f2 references cue slot 9, max is 8"):
        parse_scene(text)


def test_undefined_memory_reference():
    text = WORKED_EXAMPLE.replace("{recall_memory: 1}", "{recall_memory: 2}")
    with pytest.raises(SceneSemanticError, match="light memory 2, which is not defined"):
        parse_scene(text)


def test_undefined_gesture_reference():
    text = WORKED_EXAMPLE.replace("{gesture: raised_hand}", "{gesture: wave}")
    with pytest.raises(SceneSemanticError, match="no template"):
        parse_scene(text)


def test_missing_schema_version():
    with pytest.raises(SceneVersionError, match="missing schema_version"):
        parse_scene("name: x\n")


def test_wrong_schema_version_names_both():
    with pytest.raises(SceneVersionError) as exc:
        parse_scene("schema_version: 99\nname: x\n")
    assert "99" in str(exc.value) and "1" in str(exc.value)


def test_syntax_error_carries_line_and_column():
    with pytest.raises(SceneSyntaxError) as exc:
        parse_scene("schema_version: 1\nname: [unclosed\n")
    assert "line" in str(exc.value)


def test_duplicate_flow_id():
    text = WORKED_EXAMPLE.replace("id: f2", "id: f1")
    with pytest.raises(SceneSemanticError, match="duplicate flow id"):
        parse_scene(text)


def test_flow_without_actions():
    text = WORKED_EXAMPLE.replace("  then:\n  - {recall_memory: 1}\n", "  then: []\n")
    with pytest.raises(SceneSemanticError, match="no actions"):
        parse_scene(text)


def test_unknown_trigger_kind():
    text = WORKED_EXAMPLE.replace("{gesture: raised_hand}", "{pose: raised_hand}")
    with pytest.raises(SceneSemanticError, match="unknown trigger kind"):
        parse_scene(text)


def test_emotion_trigger_must_use_configured_label():
    text = """\
schema_version: 1
input:
  emotion_labels: [happy, sad]
flows:
- id: f1
  when: {emotion: jubilant}
  then:
  - {emit_osc: {address: "/x", args: []}}
"""
    with pytest.raises(SceneSemanticError, match="jubilant"):
        parse_scene(text)


def test_bad_osc_address_in_action():
    text = WORKED_EXAMPLE.replace(
        "{recall_memory: 1}", '{emit_osc: {address: "no-slash", args: []}}'
    )
    with pytest.raises(SceneSemanticError, match="OSC address"):
        parse_scene(text)


def test_radius_and_threshold_bounds():
    bad_radius = WORKED_EXAMPLE.replace("radius: 5.0", "radius: 0.0")
    with pytest.raises(SceneSemanticError, match="radius"):
        parse_scene(bad_radius)
    text = WORKED_EXAMPLE.replace(
        "{near: {x: 50.0, y: 50.0, radius: 5.0}}", "{distance_below: {threshold: 150.0}}"
    )
    with pytest.raises(SceneSemanticError, match="threshold"):
        parse_scene(text)


# -- canonical serialization ----------------------------------------------------


def every_trigger_scene() -> SceneDocument:
    """One flow per trigger kind and action kind."""
    red = LightState(True, 100.0, 0.0, 100.0)
    return SceneDocument(
        name="kitchen sink",
        input=InputConfig(emotion_labels=("happy", "sad")),
        gesture_templates=[
            __import__("stageflow.perception", fromlist=["GestureTemplate"]).GestureTemplate(
                "wave", (1, 2, 3), 90.0, 20.0, 2
            )
        ],
        flows=[
            Flow("g", GestureIs("wave"), (RecallLightMemory(1), EmitOsc("/door", (1, "fast", 0.5)))),
            Flow("n", PositionNear(10.0, 20.0, 3.5, person_id=2), (PlaySoundCue(1),), 500),
            Flow("db", DistanceBelow(30.0, (1, 2)), (StopSoundCue(1),), 0, enabled=False),
            Flow("da", DistanceAbove(80.0), (EmitOsc("/far", ()),)),
            Flow("p", PhraseSpoken("open the door"), (PlaySoundCue(1),)),
            Flow("e", EmotionIs("happy"), (RecallLightMemory(1),)),
        ],
        light_memories={1: LightMemory(1, {"lamp-a": red, "lamp-b": red}, "red")},
        cues={1: CueSpec("a.wav", "main", -3.0, None, False)},
    )


def maximal_scene() -> SceneDocument:
    red = LightState(True, 100.0, 0.0, 100.0)
    memories = {i: LightMemory(i, {f"lamp-{i}": red}, f"m{i}") for i in range(1, 21)}
    cues = {i: CueSpec(f"c{i}.wav") for i in range(1, 9)}
    flows = [
        Flow(f"f{i}", PositionNear(float(i), float(i), 1.0), (PlaySoundCue((i % 8) + 1),))
        for i in range(1, 11)
    ]
    return SceneDocument(
        name="maximal", flows=flows, light_memories=memories, cues=cues
    )


@pytest.mark.parametrize("scene_fn", [demo_scene, every_trigger_scene, maximal_scene])
def test_parse_serialize_parse_fixpoint(scene_fn):
    scene = scene_fn()
    text = serialize_scene(scene)
    reparsed = parse_scene(text)
    assert reparsed == scene
    assert serialize_scene(reparsed) == text


def test_structurally_equal_scenes_serialize_identically():
    scene_a = maximal_scene()
    scene_b = maximal_scene()
    # build maps in reversed insertion order: canonical output must not care
    scene_b.light_memories = dict(sorted(scene_b.light_memories.items(), reverse=True))
    scene_b.cues = dict(sorted(scene_b.cues.items(), reverse=True))
    assert serialize_scene(scene_a) == serialize_scene(scene_b)


def test_jsonable_round_trip():
    for scene in (demo_scene(), every_trigger_scene(), maximal_scene()):
        assert scene_from_jsonable(scene_to_jsonable(scene)) == scene


def test_json_keys_may_be_strings():
    data = scene_to_jsonable(demo_scene())
    assert "1" in data["light_memories"]
    scene = build_scene(data)
    assert 1 in scene.light_memories


def test_scene_over_20_memories_rejected():
    data = scene_to_jsonable(maximal_scene())
    data["light_memories"]["21"] = data["light_memories"]["1"]
    with pytest.raises(SceneSemanticError, match="21"):
        build_scene(data)


def test_unquoted_on_key_is_tolerated():
    # YAML 1.1 resolves a bare `on` key to a boolean; the parser maps it back
    text = WORKED_EXAMPLE.replace('{"on": true,', "{on: true,")
    scene = parse_scene(text)
    assert scene.light_memories[1].states["lamp-a"].on is True
