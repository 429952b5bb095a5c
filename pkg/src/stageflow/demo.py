"""Built-in demo scene and matching scenario.

The classic two-flow setup used throughout the docs and tests: raising a
hand recalls light memory 1 (lamp A turns red), and a performer stepping
onto the chair mark plays sound cue 1.
"""

from __future__ import annotations

from .lights import LightMemory, LightState
from .perception import GestureTemplate
from .scene import (
    CueSpec,
    Flow,
    GestureIs,
    InputConfig,
    PlaySoundCue,
    PositionNear,
    RecallLightMemory,
    SceneDocument,
)

CHAIR_X, CHAIR_Y, CHAIR_RADIUS = 50.0, 50.0, 5.0

RAISED_HAND = GestureTemplate(
    name="raised_hand",
    landmark_ids=(12, 14, 16),  # shoulder, elbow (vertex), wrist
    target_angle=170.0,
    tolerance=15.0,
    hold_frames=3,
)

RED = LightState(on=True, brightness_pct=100.0, hue_deg=0.0, saturation_pct=100.0)


def demo_scene(cue_file: str = "chime.wav") -> SceneDocument:
    return SceneDocument(
        name="raised hand and chair",
        input=InputConfig(),
        gesture_templates=[RAISED_HAND],
        flows=[
            Flow(
                flow_id="f1",
                trigger=GestureIs("raised_hand"),
                actions=(RecallLightMemory(1),),
                cooldown_ms=1000,
            ),
            Flow(
                flow_id="f2",
                trigger=PositionNear(CHAIR_X, CHAIR_Y, CHAIR_RADIUS),
                actions=(PlaySoundCue(1),),
                cooldown_ms=1000,
            ),
        ],
        light_memories={1: LightMemory(index=1, states={"lamp-a": RED}, label="lamp A red")},
        cues={1: CueSpec(file=cue_file, device="main")},
    )


def raised_hand_landmarks(angle_hint: float = 176.0) -> dict[int, tuple[float, float]]:
    """Landmark frame for an almost-straight raised arm (angle near 170 deg)."""
    # shoulder below, elbow in the middle, wrist above and slightly out
    return {12: (0.50, 0.50), 14: (0.50, 0.35), 16: (0.51, 0.20)}


def demo_script_text() -> str:
    """Scenario driving the demo scene: three held-arm frames, then the chair."""
    return """\
schema_version: 1
name: "raised hand then chair"
frame: {width: 640, height: 480}
steps:
- at_ms: 0
  landmarks: [{id: 12, x: 0.50, y: 0.50}, {id: 14, x: 0.50, y: 0.35}, {id: 16, x: 0.51, y: 0.20}]
- at_ms: 40
  landmarks: [{id: 12, x: 0.50, y: 0.50}, {id: 14, x: 0.50, y: 0.35}, {id: 16, x: 0.51, y: 0.20}]
- at_ms: 80
  landmarks: [{id: 12, x: 0.50, y: 0.50}, {id: 14, x: 0.50, y: 0.35}, {id: 16, x: 0.51, y: 0.20}]
- at_ms: 200
  positions: [{id: 1, x_px: 320.0, y_px: 240.0}]
- at_ms: 240
  positions: [{id: 1, x_px: 322.0, y_px: 241.0}]
"""


def chime_wav_bytes(ms: int = 250, sample_rate: int = 16000) -> bytes:
    """A small decaying two-tone chime, generated so the repo ships no binaries."""
    import math
    import tempfile
    from pathlib import Path

    import numpy as np

    from .audio import AudioClip, write_wav

    n = round(ms * sample_rate / 1000)
    t = np.arange(n) / sample_rate
    tone = 0.5 * np.sin(2 * math.pi * 660.0 * t) + 0.3 * np.sin(2 * math.pi * 990.0 * t)
    clip = AudioClip(sample_rate, tone * np.exp(-t * 12.0))
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "chime.wav"
        write_wav(path, clip, "pcm16")
        return path.read_bytes()


def write_demo_assets(directory) -> dict:
    """Write scene, scenario and cue audio into ``directory``; returns paths."""
    from pathlib import Path

    from .scene import serialize_scene

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = {
        "scene": directory / "worked_example.scene",
        "script": directory / "worked_example.scenario",
        "cue": directory / "chime.wav",
    }
    paths["cue"].write_bytes(chime_wav_bytes())
    paths["scene"].write_text(serialize_scene(demo_scene("chime.wav")), encoding="utf-8")
    paths["script"].write_text(demo_script_text(), encoding="utf-8")
    return paths
