"""Shared fixtures: an in-process engine rig wired to the simulated bridge."""

import json
import socket
import time
import urllib.request
from dataclasses import dataclass
from pathlib import Path

import pytest

from stageflow.bridge_sim import SimulatedBridge
from stageflow.config import settings_from_dict
from stageflow.demo import write_demo_assets
from stageflow.engine import Engine
from stageflow.osc import encode_packet
from stageflow.scene import parse_scene
from stageflow.service import ControlService


@dataclass
class EngineRig:
    engine: Engine
    service: ControlService
    bridge: SimulatedBridge
    workdir: Path

    @property
    def base_url(self) -> str:
        return self.service.base_url

    def http(self, method: str, path: str, body=None, raw_body: bytes = None, content_type="application/json"):
        data = raw_body if raw_body is not None else (
            json.dumps(body).encode() if body is not None else None
        )
        request = urllib.request.Request(self.base_url + path, data=data, method=method)
        request.add_header("Content-Type", content_type)
        try:
            with urllib.request.urlopen(request, timeout=5.0) as resp:
                return resp.status, json.loads(resp.read().decode())
        except urllib.error.HTTPError as exc:
            return exc.code, json.loads(exc.read().decode())

    def send_osc(self, packet) -> None:
        sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
        try:
            sock.sendto(encode_packet(packet), self.engine.osc_address)
        finally:
            sock.close()

    def wait_packets(self, count: int, timeout_s: float = 5.0) -> None:
        deadline = time.monotonic() + timeout_s
        while time.monotonic() < deadline:
            if self.engine.counters.snapshot()["packets_processed"] >= count:
                return
            time.sleep(0.001)
        raise TimeoutError(f"engine never processed {count} packets")

    def wait_quiescent(self, timeout_s: float = 5.0) -> None:
        deadline = time.monotonic() + timeout_s
        while time.monotonic() < deadline:
            snap = self.engine.counters.snapshot()
            if snap["outputs_completed"] >= snap["outputs_enqueued"]:
                return
            time.sleep(0.001)
        raise TimeoutError("outputs never quiesced")


@pytest.fixture()
def rig(tmp_path):
    assets = write_demo_assets(tmp_path)
    bridge = SimulatedBridge(api_key="rigkey")
    bridge.start()
    settings = settings_from_dict(
        {
            "osc": {"bind_port": 0},
            "control": {"port": 0},
            "bridge": {"base_url": bridge.base_url, "api_key": "rigkey",
                       "lamps": {"lamp-a": 1, "lamp-b": 2, "lamp-c": 3}},
            "audio": {"sink": "files", "out_dir": "cue_out", "command_log": "cues.jsonl"},
            "logs": {"position_log": "positions.jsonl", "action_log": "actions.jsonl"},
        },
        base_dir=str(tmp_path),
    )
    scene = parse_scene(assets["scene"].read_text())
    engine = Engine(scene, settings, scene_dir=str(tmp_path))
    engine.start()
    service = ControlService(engine, "127.0.0.1", 0)
    service.start()
    rig = EngineRig(engine=engine, service=service, bridge=bridge, workdir=tmp_path)
    yield rig
    service.close()
    engine.stop()
    bridge.close()
