"""Protocol-compatible simulated lighting bridge.

Implements the consumer bridge's public v1 REST shape for the subset the
engine uses: listing lights and per-lamp state updates. State is held in
memory only; the simulator exists for tests and demos. An optional
observer callback fires on every accepted state PUT, which is how the
scenario harness timestamps outputs.
"""

from __future__ import annotations

import json
import re
import threading
import time
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Callable, Mapping, Optional

_LIGHT_STATE_RE = re.compile(r"^/api/([^/]+)/lights/(\d+)/state$")
_LIGHT_RE = re.compile(r"^/api/([^/]+)/lights/(\d+)$")
_LIGHTS_RE = re.compile(r"^/api/([^/]+)/lights$")

_STATE_FIELDS = {"on": bool, "bri": int, "hue": int, "sat": int, "transitiontime": int}
_STATE_RANGES = {"bri": (1, 254), "hue": (0, 65535), "sat": (0, 254), "transitiontime": (0, 65535)}


def _error_body(error_type: int, address: str, description: str) -> list:
    return [{"error": {"type": error_type, "address": address, "description": description}}]


@dataclass
class ObservedCommand:
    recv_ms: float
    light_id: int
    body: dict


@dataclass
class SimulatedBridge:
    host: str = "127.0.0.1"
    port: int = 0
    api_key: str = "devkey"
    light_names: Mapping[int, str] = field(default_factory=lambda: {1: "Lamp A", 2: "Lamp B", 3: "Lamp C"})
    observer: Optional[Callable[[ObservedCommand], None]] = None

    def __post_init__(self):
        self._lock = threading.Lock()
        self._lights = {
            lid: {"on": False, "bri": 1, "hue": 0, "sat": 0, "reachable": True}
            for lid in self.light_names
        }
        self.commands: list[ObservedCommand] = []
        self._server: Optional[ThreadingHTTPServer] = None
        self._thread: Optional[threading.Thread] = None

    # -- lifecycle -----------------------------------------------------------

    def start(self) -> None:
        bridge = self

        class Handler(BaseHTTPRequestHandler):
            protocol_version = "HTTP/1.1"

            def log_message(self, *args):  # keep test output clean
                pass

            def _send_json(self, payload, status=200):
                raw = json.dumps(payload).encode("utf-8")
                self.send_response(status)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(raw)))
                self.end_headers()
                self.wfile.write(raw)

            def do_GET(self):
                bridge._handle_get(self)

            def do_PUT(self):
                bridge._handle_put(self)

        self._server = ThreadingHTTPServer((self.host, self.port), Handler)
        self._server.daemon_threads = True
        self.port = self._server.server_address[1]
        self._thread = threading.Thread(
            target=lambda: self._server.serve_forever(poll_interval=0.05), name="bridge-sim", daemon=True
        )
        self._thread.start()

    def close(self) -> None:
        if self._server is not None:
            self._server.shutdown()
            self._server.server_close()
            self._server = None

    def __enter__(self) -> "SimulatedBridge":
        self.start()
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    @property
    def base_url(self) -> str:
        return f"http://{self.host}:{self.port}"

    # -- state access ---------------------------------------------------------

    def light_state(self, light_id: int) -> dict:
        with self._lock:
            return dict(self._lights[light_id])

    def lights_snapshot(self) -> dict:
        with self._lock:
            return {
                str(lid): {
                    "name": self.light_names[lid],
                    "type": "Extended color light",
                    "state": dict(state),
                }
                for lid, state in self._lights.items()
            }

    # -- request handling ------------------------------------------------------

    def _check_key(self, handler, key: str) -> bool:
        if key != self.api_key:
            handler._send_json(_error_body(1, "/", "unauthorized user"))
            return False
        return True

    def _handle_get(self, handler) -> None:
        m = _LIGHTS_RE.match(handler.path)
        if m:
            if self._check_key(handler, m.group(1)):
                handler._send_json(self.lights_snapshot())
            return
        m = _LIGHT_RE.match(handler.path)
        if m:
            if not self._check_key(handler, m.group(1)):
                return
            light_id = int(m.group(2))
            with self._lock:
                known = light_id in self._lights
            if not known:
                handler._send_json(
                    _error_body(3, f"/lights/{light_id}", f"resource, /lights/{light_id}, not available")
                )
                return
            snapshot = self.lights_snapshot()[str(light_id)]
            handler._send_json(snapshot)
            return
        handler._send_json(_error_body(4, handler.path, "method, GET, not available for resource"))

    def _handle_put(self, handler) -> None:
        m = _LIGHT_STATE_RE.match(handler.path)
        if not m:
            handler._send_json(_error_body(4, handler.path, "method, PUT, not available for resource"))
            return
        if not self._check_key(handler, m.group(1)):
            return
        light_id = int(m.group(2))
        length = int(handler.headers.get("Content-Length") or 0)
        raw = handler.rfile.read(length) if length else b""
        try:
            body = json.loads(raw.decode("utf-8")) if raw else {}
        except (UnicodeDecodeError, json.JSONDecodeError):
            handler._send_json(_error_body(2, handler.path, "body contains invalid json"))
            return

        with self._lock:
            if light_id not in self._lights:
                handler._send_json(
                    _error_body(3, f"/lights/{light_id}", f"resource, /lights/{light_id}, not available")
                )
                return
            results = []
            for key, value in body.items():
                expected = _STATE_FIELDS.get(key)
                type_ok = (
                    expected is not None
                    and isinstance(value, expected)
                    and isinstance(value, bool) == (expected is bool)
                )
                if not type_ok:
                    results = _error_body(
                        6, f"/lights/{light_id}/state/{key}", f"parameter, {key}, not available"
                    )
                    break
                lo_hi = _STATE_RANGES.get(key)
                if lo_hi and not lo_hi[0] <= value <= lo_hi[1]:
                    results = _error_body(
                        7,
                        f"/lights/{light_id}/state/{key}",
                        f"invalid value, {value}, for parameter, {key}",
                    )
                    break
            else:
                for key, value in body.items():
                    if key != "transitiontime":
                        self._lights[light_id][key] = value
                results = [
                    {"success": {f"/lights/{light_id}/state/{key}": value}} for key, value in body.items()
                ]
                observed = ObservedCommand(time.monotonic() * 1000.0, light_id, dict(body))
                self.commands.append(observed)

        if results and "success" in results[0] and self.observer is not None:
            self.observer(observed)
        handler._send_json(results)


__all__ = ["SimulatedBridge", "ObservedCommand"]
