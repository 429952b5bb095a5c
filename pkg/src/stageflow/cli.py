"""Command line entry points.

    stageflow run --scene show.scene [--config engine.yaml]
    stageflow validate show.scene
    stageflow simulate --scene show.scene --script walk.scenario [--mode ...]
    stageflow bridge-sim [--port 8090] [--api-key devkey]

Exit codes: 0 success, 1 usage error, 2 domain error (bad scene, engine
failure, unreachable bridge and the like).
"""

from __future__ import annotations

import argparse
import signal
import sys
import threading
from pathlib import Path

from .errors import ConfigError, StageflowError

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DOMAIN = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems exit 1, not argparse's default 2
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _plural(n: int, singular: str, plural: str) -> str:
    return f"{n} {singular if n == 1 else plural}"


def _counts_line(counts: dict) -> str:
    return ", ".join(
        (
            _plural(counts["flows"], "flow", "flows"),
            _plural(counts["memories"], "memory", "memories"),
            _plural(counts["cues"], "cue", "cues"),
        )
    )


def build_parser() -> _Parser:
    parser = _Parser(prog="stageflow", description="Responsive-space interaction engine")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="start the engine with a scene")
    run.add_argument("--scene", required=True, help="scene file (.scene)")
    run.add_argument("--config", default=None, help="engine config (.yaml)")
    run.add_argument("--console-dir", default=None, help="static console build to serve")

    validate = sub.add_parser("validate", help="parse a scene and report diagnostics")
    validate.add_argument("scene", help="scene file (.scene)")

    simulate = sub.add_parser("simulate", help="replay a scenario against a spawned engine")
    simulate.add_argument("--scene", required=True)
    simulate.add_argument("--script", required=True, help="scenario file (.scenario)")
    simulate.add_argument("--mode", choices=("accelerated", "realtime"), default="accelerated")
    simulate.add_argument("--out", default=None, help="write the normalized transcript here")
    simulate.add_argument("--in-process", action="store_true", help="host the engine in this process")

    bridge = sub.add_parser("bridge-sim", help="start the simulated lighting bridge")
    bridge.add_argument("--host", default="127.0.0.1")
    bridge.add_argument("--port", type=int, default=8090)
    bridge.add_argument("--api-key", default="devkey")

    return parser


def _cmd_run(args) -> int:
    from .config import load_settings
    from .engine import Engine
    from .scene import parse_scene
    from .service import ControlService

    settings = load_settings(args.config)
    scene_path = Path(args.scene)
    scene = parse_scene(scene_path.read_text(encoding="utf-8"))
    console_dir = args.console_dir or settings.console_dir

    engine = Engine(scene, settings, scene_dir=str(scene_path.resolve().parent), scene_path=str(scene_path))
    engine.start()
    service = ControlService(engine, settings.control.host, settings.control.port, console_dir=console_dir)
    service.start()

    osc_host, osc_port = engine.osc_address
    ctrl_host, ctrl_port = service.address
    print(f"READY control={ctrl_host}:{ctrl_port} osc={osc_host}:{osc_port}", flush=True)

    stop = threading.Event()

    def _signal(_sig, _frame):
        stop.set()

    signal.signal(signal.SIGINT, _signal)
    signal.signal(signal.SIGTERM, _signal)
    try:
        while not stop.is_set():
            stop.wait(0.2)
    finally:
        service.close()
        engine.stop()
    return EXIT_OK


def _cmd_validate(args) -> int:
    from .scene import parse_scene

    text = Path(args.scene).read_text(encoding="utf-8")
    scene = parse_scene(text)
    print(f"OK: {_counts_line(scene.counts())}")
    templates = scene.counts()["gesture_templates"]
    if templates:
        print(f"    {_plural(templates, 'gesture template', 'gesture templates')}")
    return EXIT_OK


def _cmd_simulate(args) -> int:
    from .sim import SimulationHarness, parse_script

    script = parse_script(Path(args.script).read_text(encoding="utf-8"))
    scene_text = Path(args.scene).read_text(encoding="utf-8")

    # cue files referenced by the scene travel into the harness workdir
    cue_files = {}
    scene_dir = Path(args.scene).resolve().parent
    from .scene import parse_scene

    for spec in parse_scene(scene_text).cues.values():
        src = Path(spec.file)
        if not src.is_absolute():
            src = scene_dir / src
        if src.is_file():
            cue_files[spec.file] = src.read_bytes()

    with SimulationHarness(scene_text, args.mode, spawn=not args.in_process, cue_files=cue_files) as harness:
        transcript = harness.run(script)
    print(transcript.summary())
    if args.out:
        Path(args.out).write_text(transcript.normalized_jsonl(), encoding="utf-8")
        print(f"transcript written to {args.out}")
    return EXIT_OK


def _cmd_bridge_sim(args) -> int:
    from .bridge_sim import SimulatedBridge

    bridge = SimulatedBridge(host=args.host, port=args.port, api_key=args.api_key)
    bridge.start()
    print(f"BRIDGE READY {bridge.base_url} api-key={bridge.api_key}", flush=True)
    stop = threading.Event()

    def _signal(_sig, _frame):
        stop.set()

    signal.signal(signal.SIGINT, _signal)
    signal.signal(signal.SIGTERM, _signal)
    try:
        while not stop.is_set():
            stop.wait(0.2)
    finally:
        bridge.close()
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "run": _cmd_run,
        "validate": _cmd_validate,
        "simulate": _cmd_simulate,
        "bridge-sim": _cmd_bridge_sim,
    }
    try:
        return handlers[args.command](args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (StageflowError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except KeyboardInterrupt:
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
