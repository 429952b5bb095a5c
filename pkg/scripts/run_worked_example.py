#!/usr/bin/env python3
"""Replay the worked-example scenario end to end and print the transcript.

Spawns a fresh engine wired to the simulated bridge and file audio sink,
drives the raised-hand-then-chair script through it in accelerated mode,
and shows every input and output with their pairing. A desk-scale smoke
test of the whole loop: OSC in, flows, bridge and cue out.
"""

import argparse

from stageflow.demo import chime_wav_bytes, demo_scene, demo_script_text
from stageflow.scene import serialize_scene
from stageflow.sim import SimulationHarness


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--mode", choices=("accelerated", "realtime"), default="accelerated")
    parser.add_argument("--runs", type=int, default=1)
    args = parser.parse_args()

    scene_text = serialize_scene(demo_scene("chime.wav"))
    transcripts = []
    for run in range(args.runs):
        with SimulationHarness(
            scene_text, mode=args.mode, spawn=True, cue_files={"chime.wav": chime_wav_bytes()}
        ) as harness:
            transcript = harness.run(demo_script_text(), fresh=False)
        transcripts.append(transcript.normalized_jsonl())
        print(f"run {run + 1}: {transcript.summary()}")
        for line in transcript.normalized_jsonl().splitlines():
            print(f"  {line}")

    if args.runs > 1:
        identical = all(t == transcripts[0] for t in transcripts[1:])
        print(f"normalized transcripts identical across {args.runs} runs: {identical}")


if __name__ == "__main__":
    main()
