"""CLI behaviour: exit codes, validate output, simulate, bridge-sim."""

import json
import subprocess
import sys
import time
import urllib.request

from stageflow.cli import main
from stageflow.demo import write_demo_assets


def run_cli(*argv):
    proc = subprocess.run(
        [sys.executable, "-m", "stageflow.cli", *argv],
        capture_output=True,
        text=True,
        timeout=120,
    )
    return proc.returncode, proc.stdout, proc.stderr


def test_validate_worked_example(tmp_path):
    assets = write_demo_assets(tmp_path)
    code, out, _ = run_cli("validate", str(assets["scene"]))
    assert code == 0
    assert "2 flows, 1 memory, 1 cue" in out


def test_validate_bad_scene_exits_2(tmp_path):
    assets = write_demo_assets(tmp_path)
    text = assets["scene"].read_text().replace("{recall_memory: 1}", "{recall_memory: 21}")
    bad = tmp_path / "bad.scene"
    bad.write_text(text)
    code, out, err = run_cli("validate", str(bad))
    assert code == 2
    assert "21" in err and "20" in err


def test_validate_never_modifies_the_file(tmp_path):
    assets = write_demo_assets(tmp_path)
    before = assets["scene"].read_bytes()
    mtime = assets["scene"].stat().st_mtime_ns
    code, _, _ = run_cli("validate", str(assets["scene"]))
    assert code == 0
    assert assets["scene"].read_bytes() == before
    assert assets["scene"].stat().st_mtime_ns == mtime


def test_unknown_flag_exits_1():
    code, _, err = run_cli("validate", "--bogus")
    assert code == 1
    assert "usage" in err.lower() or "error" in err.lower()


def test_unknown_subcommand_exits_1():
    code, _, _ = run_cli("frobnicate")
    assert code == 1


def test_missing_scene_file_exits_2(tmp_path):
    code, _, err = run_cli("validate", str(tmp_path / "missing.scene"))
    assert code == 2


def test_simulate_inert_script(tmp_path):
    assets = write_demo_assets(tmp_path)
    inert = tmp_path / "inert.scenario"
    inert.write_text("schema_version: 1\nname: quiet\nsteps: []\n")
    code, out, err = run_cli(
        "simulate", "--scene", str(assets["scene"]), "--script", str(inert), "--mode", "accelerated"
    )
    assert code == 0, err
    assert "0 outputs" in out


def test_simulate_worked_example_writes_transcript(tmp_path):
    assets = write_demo_assets(tmp_path)
    out_path = tmp_path / "transcript.jsonl"
    code, out, err = run_cli(
        "simulate",
        "--scene", str(assets["scene"]),
        "--script", str(assets["script"]),
        "--out", str(out_path),
    )
    assert code == 0, err
    assert "5 inputs" in out
    lines = [json.loads(l) for l in out_path.read_text().splitlines()]
    channels = [l["payload"] for l in lines if l["type"] == "output"]
    assert any("body" in p for p in channels)  # a bridge command made it out


def test_main_function_exit_codes(tmp_path, capsys):
    assets = write_demo_assets(tmp_path)
    assert main(["validate", str(assets["scene"])]) == 0
    out = capsys.readouterr().out
    assert "2 flows, 1 memory, 1 cue" in out


def test_bridge_sim_subcommand_serves_api():
    proc = subprocess.Popen(
        [sys.executable, "-m", "stageflow.cli", "bridge-sim", "--port", "0"],
        stdout=subprocess.PIPE,
        text=True,
    )
    try:
        line = proc.stdout.readline()
        assert line.startswith("BRIDGE READY ")
        base_url = line.split()[2]
        with urllib.request.urlopen(f"{base_url}/api/devkey/lights", timeout=5.0) as resp:
            body = json.loads(resp.read())
        assert "1" in body and body["1"]["state"]["reachable"] is True
    finally:
        proc.terminate()
        proc.wait(timeout=5)


def test_run_subcommand_reports_ready_and_serves(tmp_path):
    assets = write_demo_assets(tmp_path)
    config = tmp_path / "engine.yaml"
    config.write_text(
        "osc: {bind_port: 0}\ncontrol: {port: 0}\n"
        "audio: {sink: null, out_dir: o, command_log: c.jsonl}\n"
    )
    proc = subprocess.Popen(
        [sys.executable, "-m", "stageflow.cli", "run", "--scene", str(assets["scene"]),
         "--config", str(config)],
        stdout=subprocess.PIPE,
        stderr=subprocess.STDOUT,
        text=True,
        cwd=str(tmp_path),
    )
    try:
        deadline = time.monotonic() + 15
        line = ""
        while time.monotonic() < deadline:
            line = proc.stdout.readline()
            if line.startswith("READY "):
                break
        assert line.startswith("READY "), line
        control = dict(part.split("=") for part in line.split()[1:])["control"]
        with urllib.request.urlopen(f"http://{control}/status", timeout=5.0) as resp:
            status = json.loads(resp.read())
        assert status["running"] is True
        assert status["counts"]["flows"] == 2
    finally:
        proc.terminate()
        proc.wait(timeout=5)
