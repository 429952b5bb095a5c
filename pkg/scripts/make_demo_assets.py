#!/usr/bin/env python3
"""Regenerate the demo assets: scene, scenario, chime WAV and engine config."""

from pathlib import Path

from stageflow.demo import write_demo_assets

ASSETS = Path(__file__).resolve().parent.parent / "assets"

DEMO_CONFIG = """\
osc:
  bind_port: 9000
control:
  port: 8765
bridge:
  base_url: http://127.0.0.1:8090
  api_key: devkey
  lamps: {lamp-a: 1, lamp-b: 2, lamp-c: 3}
audio:
  sink: files
  out_dir: cue_renders
  command_log: cues.jsonl
logs:
  position_log: positions.jsonl
  action_log: actions.jsonl
clock: wall
"""


def main() -> None:
    paths = write_demo_assets(ASSETS)
    config = ASSETS / "demo_config.yaml"
    config.write_text(DEMO_CONFIG, encoding="utf-8")
    paths["config"] = config
    for name, path in sorted(paths.items()):
        print(f"{name:7s} {path.relative_to(ASSETS.parent)}")


if __name__ == "__main__":
    main()
