"""Operator-facing control plane: REST endpoints plus the /events stream.

Runs on its own port, separate from the OSC sensor plane. Every command is
validated at the HTTP surface (bad indices never reach the engine), then
serialized onto the engine loop. The event stream is newline-delimited
JSON; a consumer that stops reading is dropped after bounded buffering.

Endpoints:
    GET  /status                  engine status and counters
    GET  /scene                   current scene (JSON structural form)
    PUT  /scene                   replace scene (JSON body or scene-file text)
    POST /memory/{i}/save         body: {label?, states?}
    POST /memory/{i}/recall
    POST /cue/{n}/trigger
    POST /cue/{n}/stop
    POST /flow/{id}/enabled       body: {enabled: bool}
    POST /gesture/record          body: {name, landmarks?, tolerance_deg?}
    GET  /events?kinds=a,b        NDJSON monitor stream
    GET  /console/...             static operator console, when configured
"""

from __future__ import annotations

import json
import queue
import re
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Optional
from urllib.parse import parse_qs, urlparse

from .audio import MAX_SLOTS
from .engine import Engine
from .errors import InputError, NotFoundError, RangeError, StageflowError
from .lights import MAX_MEMORIES
from .scene import SceneError, SceneSyntaxError, SceneVersionError

_MEMORY_RE = re.compile(r"^/memory/(-?\d+)/(save|recall)$")
_CUE_RE = re.compile(r"^/cue/(-?\d+)/(trigger|stop)$")
_FLOW_RE = re.compile(r"^/flow/([^/]+)/enabled$")

_MONITOR_KINDS = {"input", "flow_fired", "output", "error"}

_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".mjs": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".map": "application/json",
    ".json": "application/json",
    ".svg": "image/svg+xml",
    ".png": "image/png",
    ".ico": "image/x-icon",
}


def _error_status(exc: Exception) -> int:
    if isinstance(exc, NotFoundError):
        return 404
    if isinstance(exc, (RangeError, InputError, SceneError, SceneSyntaxError, SceneVersionError)):
        return 400
    return 500


class ControlService:
    """HTTP front end bound to one engine."""

    def __init__(self, engine: Engine, host: str = "127.0.0.1", port: int = 0,
                 console_dir: Optional[str] = None):
        self.engine = engine
        self.console_dir = Path(console_dir) if console_dir else None
        service = self

        class Handler(BaseHTTPRequestHandler):
            protocol_version = "HTTP/1.1"

            def log_message(self, *args):
                pass

            def do_GET(self):
                service._dispatch(self, "GET")

            def do_PUT(self):
                service._dispatch(self, "PUT")

            def do_POST(self):
                service._dispatch(self, "POST")

        self._server = ThreadingHTTPServer((host, port), Handler)
        self._server.daemon_threads = True
        self._thread: Optional[threading.Thread] = None
        engine.control_address = self._server.server_address[:2]

    @property
    def address(self) -> tuple[str, int]:
        return self._server.server_address[:2]

    @property
    def base_url(self) -> str:
        host, port = self.address
        return f"http://{host}:{port}"

    def start(self) -> None:
        self._thread = threading.Thread(
            target=lambda: self._server.serve_forever(poll_interval=0.05),
            name="control-http",
            daemon=True,
        )
        self._thread.start()

    def close(self) -> None:
        self._server.shutdown()
        self._server.server_close()

    def __enter__(self) -> "ControlService":
        self.start()
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    # -- plumbing ------------------------------------------------------------

    @staticmethod
    def _send_json(handler, payload, status: int = 200) -> None:
        raw = json.dumps(payload).encode("utf-8")
        handler.send_response(status)
        handler.send_header("Content-Type", "application/json")
        handler.send_header("Content-Length", str(len(raw)))
        handler.send_header("Access-Control-Allow-Origin", "*")
        handler.end_headers()
        handler.wfile.write(raw)

    @staticmethod
    def _send_error(handler, code: str, message: str, status: int) -> None:
        ControlService._send_json(handler, {"error": {"code": code, "message": message}}, status)

    @staticmethod
    def _read_body(handler) -> bytes:
        length = int(handler.headers.get("Content-Length") or 0)
        return handler.rfile.read(length) if length else b""

    @staticmethod
    def _read_json(handler) -> dict:
        raw = ControlService._read_body(handler)
        if not raw:
            return {}
        try:
            body = json.loads(raw.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise InputError(f"request body is not valid JSON: {exc}") from None
        if not isinstance(body, dict):
            raise InputError("request body must be a JSON object")
        return body

    def _submit(self, handler, op: str, payload: Optional[dict] = None) -> None:
        try:
            result = self.engine.submit(op, payload)
        except StageflowError as exc:
            self._send_error(handler, exc.code, exc.message, _error_status(exc))
            return
        except Exception as exc:  # noqa: BLE001
            self._send_error(handler, "internal", str(exc), 500)
            return
        self._send_json(handler, result)

    # -- routing ---------------------------------------------------------------

    def _dispatch(self, handler, method: str) -> None:
        parsed = urlparse(handler.path)
        path = parsed.path
        try:
            if method == "GET" and path == "/status":
                self._submit(handler, "status")
            elif method == "GET" and path == "/scene":
                self._submit(handler, "get_scene")
            elif method == "PUT" and path == "/scene":
                self._put_scene(handler)
            elif method == "POST" and path == "/scene/save":
                body = self._read_json(handler)
                payload = {"path": body["path"]} if "path" in body else {}
                self._submit(handler, "save_scene", payload)
            elif method == "POST" and (m := _MEMORY_RE.match(path)):
                self._memory(handler, int(m.group(1)), m.group(2))
            elif method == "POST" and (m := _CUE_RE.match(path)):
                self._cue(handler, int(m.group(1)), m.group(2))
            elif method == "POST" and (m := _FLOW_RE.match(path)):
                body = self._read_json(handler)
                if not isinstance(body.get("enabled"), bool):
                    raise InputError("body must carry enabled: true|false")
                self._submit(handler, "set_flow_enabled", {"flow_id": m.group(1), "enabled": body["enabled"]})
            elif method == "POST" and path == "/gesture/record":
                body = self._read_json(handler)
                self._submit(handler, "record_gesture", body)
            elif method == "GET" and path == "/events":
                self._stream_events(handler, parsed.query)
            elif method == "GET" and (path == "/" or path.startswith("/console")):
                self._static(handler, path)
            else:
                self._send_error(handler, "no_route", f"{method} {path} is not an endpoint", 404)
        except StageflowError as exc:
            self._send_error(handler, exc.code, exc.message, _error_status(exc))
        except (BrokenPipeError, ConnectionResetError):
            pass
        except Exception as exc:  # noqa: BLE001
            self._send_error(handler, "internal", str(exc), 500)

    def _put_scene(self, handler) -> None:
        content_type = (handler.headers.get("Content-Type") or "application/json").split(";")[0].strip()
        raw = self._read_body(handler)
        if not raw:
            raise InputError("PUT /scene needs a scene document body")
        if content_type in ("application/json",):
            try:
                data = json.loads(raw.decode("utf-8"))
            except (UnicodeDecodeError, json.JSONDecodeError) as exc:
                raise InputError(f"request body is not valid JSON: {exc}") from None
            self._submit(handler, "put_scene", {"data": data})
        else:
            # scene-file text (text/plain or application/x-yaml)
            self._submit(handler, "put_scene", {"text": raw.decode("utf-8", errors="replace")})

    def _memory(self, handler, index: int, verb: str) -> None:
        # validated here so a bad index never reaches the engine
        if not 1 <= index <= MAX_MEMORIES:
            self._send_error(
                handler, "out_of_range", f"light memory index must be in [1, {MAX_MEMORIES}], got {index}", 400
            )
            return
        if verb == "save":
            body = self._read_json(handler)
            payload = {"index": index}
            if "label" in body:
                payload["label"] = body["label"]
            if "states" in body:
                payload["states"] = body["states"]
            self._submit(handler, "save_memory", payload)
        else:
            self._read_body(handler)
            self._submit(handler, "recall_memory", {"index": index})

    def _cue(self, handler, slot: int, verb: str) -> None:
        if not 1 <= slot <= MAX_SLOTS:
            self._send_error(
                handler, "out_of_range", f"cue slot must be in [1, {MAX_SLOTS}], got {slot}", 400
            )
            return
        self._read_body(handler)
        self._submit(handler, "trigger_cue" if verb == "trigger" else "stop_cue", {"slot": slot})

    # -- event stream -------------------------------------------------------------

    def _stream_events(self, handler, query: str) -> None:
        params = parse_qs(query)
        kinds: Optional[set[str]] = None
        raw_kinds = params.get("kinds") or params.get("kind")
        if raw_kinds:
            kinds = {k.strip() for part in raw_kinds for k in part.split(",") if k.strip()}
            unknown = kinds - _MONITOR_KINDS
            if unknown:
                raise InputError(f"unknown event kinds {sorted(unknown)}; valid: {sorted(_MONITOR_KINDS)}")
        sub = self.engine.monitor.subscribe(kinds)
        try:
            handler.send_response(200)
            handler.send_header("Content-Type", "application/x-ndjson")
            handler.send_header("Cache-Control", "no-cache")
            handler.send_header("Access-Control-Allow-Origin", "*")
            handler.send_header("Connection", "close")
            handler.end_headers()
            handler.close_connection = True
            while True:
                try:
                    event = sub.q.get(timeout=0.5)
                except queue.Empty:
                    if sub.dropped:
                        break
                    continue
                if event is None:
                    break
                handler.wfile.write((json.dumps(event, separators=(",", ":")) + "\n").encode("utf-8"))
                handler.wfile.flush()
        except (BrokenPipeError, ConnectionResetError, OSError):
            pass
        finally:
            self.engine.monitor.unsubscribe(sub)

    # -- static console -------------------------------------------------------------

    def _static(self, handler, path: str) -> None:
        if self.console_dir is None:
            self._send_error(
                handler,
                "no_console",
                "no console build configured; set console_dir in the engine config",
                404,
            )
            return
        rel = path[len("/console") :] if path.startswith("/console") else path
        rel = rel.lstrip("/") or "index.html"
        root = self.console_dir.resolve()
        target = (root / rel).resolve()
        if not str(target).startswith(str(root)) or not target.is_file():
            # single-page app: unknown paths fall back to the index
            target = root / "index.html"
            if not target.is_file():
                self._send_error(handler, "not_found", f"no console file {rel}", 404)
                return
        raw = target.read_bytes()
        handler.send_response(200)
        handler.send_header("Content-Type", _CONTENT_TYPES.get(target.suffix, "application/octet-stream"))
        handler.send_header("Content-Length", str(len(raw)))
        handler.end_headers()
        handler.wfile.write(raw)
