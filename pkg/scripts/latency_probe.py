#!/usr/bin/env python3
"""Measure realtime input-to-output latency over repeated scenario runs.

Each run spawns a fresh engine on loopback, replays the worked example in
realtime mode and collects per-output latency (input send to bridge PUT
arrival / audio sink write). Prints min/median/max across runs; the
release budget is 50 ms per event on loopback.
"""

import argparse
import statistics

from stageflow.demo import chime_wav_bytes, demo_scene, demo_script_text
from stageflow.scene import serialize_scene
from stageflow.sim import SimulationHarness


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--runs", type=int, default=5)
    args = parser.parse_args()

    scene_text = serialize_scene(demo_scene("chime.wav"))
    all_latencies: list[float] = []
    for run in range(args.runs):
        with SimulationHarness(
            scene_text, mode="realtime", spawn=True, cue_files={"chime.wav": chime_wav_bytes()}
        ) as harness:
            transcript = harness.run(demo_script_text(), fresh=False)
        latencies = transcript.latencies()
        all_latencies.extend(latencies)
        shown = ", ".join(f"{l:.1f}" for l in latencies)
        print(f"run {run + 1}: {len(latencies)} outputs, latencies [{shown}] ms")

    if all_latencies:
        print(
            f"\n{len(all_latencies)} outputs over {args.runs} runs: "
            f"min {min(all_latencies):.1f} ms, "
            f"median {statistics.median(all_latencies):.1f} ms, "
            f"max {max(all_latencies):.1f} ms"
        )
        print(f"within 50 ms budget: {max(all_latencies) < 50.0}")


if __name__ == "__main__":
    main()
