"""UDP transport for OSC packets.

One datagram carries exactly one packet; there is no fragmentation or
reassembly. The receive loop runs on its own thread and hands raw bytes to
a callback together with a monotonic receive timestamp; sends may come
from any thread and are serialized on an internal lock.
"""

from __future__ import annotations

import socket
import threading
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

from ..errors import ConfigError
from .codec import encode_packet
from .messages import OscPacket

MIN_DATAGRAM = 512
MAX_DATAGRAM = 65507


@dataclass(frozen=True)
class EndpointConfig:
    bind_host: str = "127.0.0.1"
    bind_port: int = 0
    destinations: tuple[tuple[str, int], ...] = field(default_factory=tuple)
    max_datagram: int = 1472

    def __post_init__(self):
        if not MIN_DATAGRAM <= self.max_datagram <= MAX_DATAGRAM:
            raise ConfigError(
                f"max_datagram must be in [{MIN_DATAGRAM}, {MAX_DATAGRAM}], got {self.max_datagram}"
            )
        object.__setattr__(self, "destinations", tuple(tuple(d) for d in self.destinations))


class OscUdpEndpoint:
    """Bound UDP socket with a background receive loop."""

    def __init__(
        self,
        config: EndpointConfig,
        on_packet: Optional[Callable[[bytes, float], None]] = None,
    ):
        self.config = config
        self._on_packet = on_packet
        self._sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
        self._sock.bind((config.bind_host, config.bind_port))
        self._sock.settimeout(0.2)
        self._send_lock = threading.Lock()
        self._closed = threading.Event()
        self._thread: Optional[threading.Thread] = None

    @property
    def bound_address(self) -> tuple[str, int]:
        return self._sock.getsockname()[:2]

    def start(self) -> None:
        if self._thread is not None:
            return
        self._thread = threading.Thread(target=self._recv_loop, name="osc-recv", daemon=True)
        self._thread.start()

    def _recv_loop(self) -> None:
        while not self._closed.is_set():
            try:
                data, _addr = self._sock.recvfrom(MAX_DATAGRAM + 1)
            except socket.timeout:
                continue
            except OSError:
                break
            if self._on_packet is not None:
                self._on_packet(data, time.monotonic() * 1000.0)

    def send_bytes(self, data: bytes, dest: Optional[tuple[str, int]] = None) -> None:
        if len(data) > self.config.max_datagram:
            raise ValueError(
                f"packet of {len(data)} bytes exceeds max datagram size {self.config.max_datagram}"
            )
        targets = [dest] if dest is not None else list(self.config.destinations)
        with self._send_lock:
            for target in targets:
                self._sock.sendto(data, target)

    def send(self, packet: OscPacket, dest: Optional[tuple[str, int]] = None) -> bytes:
        data = encode_packet(packet)
        self.send_bytes(data, dest)
        return data

    def close(self) -> None:
        self._closed.set()
        if self._thread is not None:
            self._thread.join(timeout=2.0)
            self._thread = None
        self._sock.close()

    def __enter__(self) -> "OscUdpEndpoint":
        self.start()
        return self

    def __exit__(self, *exc) -> None:
        self.close()


__all__ = ["MIN_DATAGRAM", "MAX_DATAGRAM", "EndpointConfig", "OscUdpEndpoint"]
