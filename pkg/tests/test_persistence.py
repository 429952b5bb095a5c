"""Scene persistence to disk: atomic writes, path-context errors."""

import pytest

from stageflow.demo import demo_scene
from stageflow.errors import NotFoundError
from stageflow.lights import LightMemory, LightState
from stageflow.scene import (
    CueSpec,
    Flow,
    PositionNear,
    PlaySoundCue,
    SceneDocument,
    SceneVersionError,
    load_scene_file,
    save_scene_file,
    serialize_scene,
)


def maximal_scene():
    red = LightState(True, 100.0, 0.0, 100.0)
    return SceneDocument(
        name="maximal",
        flows=[
            Flow(f"f{i}", PositionNear(float(i), float(i), 1.0), (PlaySoundCue((i % 8) + 1),))
            for i in range(1, 9)
        ],
        light_memories={i: LightMemory(i, {f"l{i}": red}) for i in range(1, 21)},
        cues={i: CueSpec(f"c{i}.wav") for i in range(1, 9)},
    )


def test_save_then_load_structural_identity(tmp_path):
    path = tmp_path / "max.scene"
    scene = maximal_scene()
    save_scene_file(scene, path)
    assert load_scene_file(path) == scene
    assert path.read_text() == serialize_scene(scene)


def test_save_leaves_no_temp_files(tmp_path):
    path = tmp_path / "demo.scene"
    save_scene_file(demo_scene(), path)
    save_scene_file(demo_scene(), path)  # overwrite goes through rename too
    assert [p.name for p in tmp_path.iterdir()] == ["demo.scene"]


def test_save_overwrites_atomically(tmp_path):
    path = tmp_path / "x.scene"
    save_scene_file(demo_scene(), path)
    scene2 = demo_scene()
    scene2.name = "take two"
    save_scene_file(scene2, path)
    assert load_scene_file(path).name == "take two"


def test_load_missing_path_is_not_found(tmp_path):
    with pytest.raises(NotFoundError, match="missing.scene"):
        load_scene_file(tmp_path / "missing.scene")


def test_load_wrong_schema_version_names_both(tmp_path):
    path = tmp_path / "future.scene"
    path.write_text(serialize_scene(demo_scene()).replace("schema_version: 1", "schema_version: 3"))
    with pytest.raises(SceneVersionError) as exc:
        load_scene_file(path)
    message = str(exc.value)
    assert "3" in message and "1" in message and "future.scene" in message


def test_save_scene_command_through_api(rig):
    # mutate the running scene, persist it, reload from disk
    states = {"lamp-a": {"on": True, "brightness": 10.0, "hue": 50.0, "saturation": 20.0}}
    assert rig.http("POST", "/memory/9/save", body={"states": states})[0] == 200
    target = rig.workdir / "persisted.scene"
    status, body = rig.http("POST", "/scene/save", body={"path": str(target)})
    assert status == 200
    assert body["counts"]["memories"] == 2
    loaded = load_scene_file(target)
    assert 9 in loaded.light_memories
    assert loaded.light_memories[9].states["lamp-a"].hue_deg == 50.0
