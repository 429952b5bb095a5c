"""Eight-slot sound cue bank, WAV decode/encode and the noise gate.

Clips are held as float arrays in [-1, 1], shaped (frames, channels). Only
RIFF WAV in 16-bit PCM or 32-bit float is accepted; anything else is
rejected with a named failure so a bad file is diagnosable from the error
alone. Playback goes through a sink abstraction; the file sink renders
each triggered cue to a WAV plus a JSON-lines command log so the whole
suite runs headless. A hardware output would be another sink behind the
same three calls.
"""

from __future__ import annotations

import json
import math
import struct
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .errors import FormatError, InputError, NotFoundError, RangeError

MAX_SLOTS = 8

DEFAULT_GATE_THRESHOLD_DB = -40.0
DEFAULT_GATE_ATTACK_MS = 5.0
DEFAULT_GATE_RELEASE_MS = 50.0
DEFAULT_GATE_WINDOW_MS = 10.0


@dataclass(frozen=True)
class GateSettings:
    threshold_db: float = DEFAULT_GATE_THRESHOLD_DB
    attack_ms: float = DEFAULT_GATE_ATTACK_MS
    release_ms: float = DEFAULT_GATE_RELEASE_MS
    window_ms: float = DEFAULT_GATE_WINDOW_MS

    def __post_init__(self):
        if self.threshold_db >= 0:
            raise InputError(f"gate threshold must be negative dBFS, got {self.threshold_db}")
        if self.attack_ms < 0 or self.release_ms < 0:
            raise InputError("gate attack/release must be >= 0 ms")
        if self.window_ms <= 0:
            raise InputError("gate RMS window must be > 0 ms")


@dataclass
class AudioClip:
    sample_rate: int
    samples: np.ndarray  # (frames, channels), float64 in [-1, 1]

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise InputError(f"sample rate must be positive, got {self.sample_rate}")
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim == 1:
            samples = samples[:, np.newaxis]
        if samples.ndim != 2 or samples.shape[0] == 0 or samples.shape[1] == 0:
            raise InputError("clip must be a non-empty (frames, channels) array")
        if np.max(np.abs(samples)) > 1.0 + 1e-9:
            raise InputError("clip samples must lie in [-1, 1]")
        self.samples = samples

    @property
    def frames(self) -> int:
        return self.samples.shape[0]

    @property
    def channels(self) -> int:
        return self.samples.shape[1]

    @property
    def duration_ms(self) -> float:
        return self.frames / self.sample_rate * 1000.0


@dataclass(frozen=True)
class SoundCue:
    slot: int
    clip: AudioClip
    source: str = ""  # file path or "recorded"
    device_id: str = "default"
    gain_db: float = 0.0
    gate: Optional[GateSettings] = None

    def __post_init__(self):
        if not 1 <= self.slot <= MAX_SLOTS:
            raise RangeError(f"cue slot must be in [1, {MAX_SLOTS}], got {self.slot}")


# -- WAV codec ----------------------------------------------------------------

_FMT_PCM = 1
_FMT_FLOAT = 3


def read_wav(source: Union[str, Path, bytes]) -> AudioClip:
    """Decode a 16-bit PCM or 32-bit float RIFF WAV."""
    if isinstance(source, (str, Path)):
        data = Path(source).read_bytes()
    else:
        data = bytes(source)
    if len(data) < 12 or data[0:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise FormatError("not a RIFF/WAVE file")
    offset = 12
    fmt = None
    payload = None
    while offset + 8 <= len(data):
        chunk_id = data[offset : offset + 4]
        (size,) = struct.unpack_from("<I", data, offset + 4)
        body = data[offset + 8 : offset + 8 + size]
        if len(body) < size:
            raise FormatError(f"truncated {chunk_id!r} chunk")
        if chunk_id == b"fmt ":
            if size < 16:
                raise FormatError("fmt chunk too short")
            fmt = struct.unpack_from("<HHIIHH", body, 0)
        elif chunk_id == b"data":
            payload = body
        offset += 8 + size + (size & 1)  # chunks are word-aligned
    if fmt is None:
        raise FormatError("missing fmt chunk")
    if payload is None:
        raise FormatError("missing data chunk")
    audio_format, channels, sample_rate, _byte_rate, _block_align, bits = fmt
    if channels < 1:
        raise FormatError(f"bad channel count {channels}")
    if audio_format == _FMT_PCM and bits == 16:
        raw = np.frombuffer(payload[: len(payload) - len(payload) % (2 * channels)], dtype="<i2")
        samples = raw.astype(np.float64) / 32768.0
    elif audio_format == _FMT_FLOAT and bits == 32:
        raw = np.frombuffer(payload[: len(payload) - len(payload) % (4 * channels)], dtype="<f4")
        samples = np.clip(raw.astype(np.float64), -1.0, 1.0)
    else:
        raise FormatError(
            f"unsupported WAV encoding: format {audio_format}, {bits} bits "
            "(only 16-bit PCM and 32-bit float are accepted)"
        )
    if samples.size == 0:
        raise FormatError("WAV data chunk holds no samples")
    return AudioClip(sample_rate, samples.reshape(-1, channels))


def write_wav(path: Union[str, Path], clip: AudioClip, sample_format: str = "pcm16") -> None:
    """Encode a clip as 16-bit PCM ("pcm16") or 32-bit float ("float32")."""
    flat = np.clip(clip.samples, -1.0, 1.0).reshape(-1)
    if sample_format == "pcm16":
        payload = (np.round(flat * 32767.0).astype("<i2")).tobytes()
        audio_format, bits = _FMT_PCM, 16
    elif sample_format == "float32":
        payload = flat.astype("<f4").tobytes()
        audio_format, bits = _FMT_FLOAT, 32
    else:
        raise InputError(f"unknown sample format {sample_format!r}")
    channels = clip.channels
    block_align = channels * bits // 8
    fmt = struct.pack(
        "<HHIIHH", audio_format, channels, clip.sample_rate, clip.sample_rate * block_align, block_align, bits
    )
    chunks = b"fmt " + struct.pack("<I", len(fmt)) + fmt + b"data" + struct.pack("<I", len(payload)) + payload
    Path(path).write_bytes(b"RIFF" + struct.pack("<I", 4 + len(chunks)) + b"WAVE" + chunks)


# -- noise gate ----------------------------------------------------------------


def apply_noise_gate(clip: AudioClip, g: GateSettings) -> AudioClip:
    """Attenuate material whose trailing windowed RMS falls below threshold.

    The per-sample gain envelope ramps linearly towards 1 over attack_ms
    while the windowed RMS (in dBFS) sits at or above threshold_db, and
    towards 0 over release_ms while below. The envelope starts closed, so
    silence stays silence and output never exceeds input sample-for-sample.
    """
    x = clip.samples
    n = x.shape[0]
    sr = clip.sample_rate

    power = np.mean(x * x, axis=1)
    w = max(1, round(g.window_ms * sr / 1000.0))
    csum = np.concatenate(([0.0], np.cumsum(power)))
    idx = np.arange(n)
    lo = np.maximum(0, idx - w + 1)
    win_mean = (csum[idx + 1] - csum[lo]) / (idx - lo + 1)
    rms = np.sqrt(np.maximum(win_mean, 0.0))
    open_mask = rms >= 10.0 ** (g.threshold_db / 20.0)

    attack_samples = g.attack_ms * sr / 1000.0
    release_samples = g.release_ms * sr / 1000.0
    step_up = math.inf if attack_samples < 1.0 else 1.0 / attack_samples
    step_down = math.inf if release_samples < 1.0 else 1.0 / release_samples

    env = np.empty(n, dtype=np.float64)
    boundaries = np.flatnonzero(np.diff(open_mask)) + 1
    starts = np.concatenate(([0], boundaries))
    ends = np.concatenate((boundaries, [n]))
    level = 0.0  # gate starts closed
    for s, e in zip(starts, ends):
        length = e - s
        if open_mask[s]:
            if step_up is math.inf:
                env[s:e] = 1.0
            else:
                env[s:e] = np.minimum(1.0, level + step_up * np.arange(1, length + 1))
        else:
            if step_down is math.inf:
                env[s:e] = 0.0
            else:
                env[s:e] = np.maximum(0.0, level - step_down * np.arange(1, length + 1))
        level = env[e - 1]

    return AudioClip(sr, x * env[:, np.newaxis])


# -- cue bank -------------------------------------------------------------------


class ClipSource:
    """File-backed test input for recording; yields frames in order."""

    def __init__(self, clip: AudioClip):
        self.clip = clip
        self._pos = 0

    @property
    def sample_rate(self) -> int:
        return self.clip.sample_rate

    def read(self, frames: int) -> np.ndarray:
        chunk = self.clip.samples[self._pos : self._pos + frames]
        self._pos += len(chunk)
        return chunk


def _check_slot(slot) -> int:
    if not isinstance(slot, int) or isinstance(slot, bool) or not 1 <= slot <= MAX_SLOTS:
        raise RangeError(f"cue slot must be in [1, {MAX_SLOTS}], got {slot}")
    return slot


class CueBank:
    """Up to eight cues, slots 1..8; loading a slot overwrites it."""

    def __init__(self, default_gate: Optional[GateSettings] = None):
        self.default_gate = default_gate
        self._cues: dict[int, SoundCue] = {}

    def __len__(self) -> int:
        return len(self._cues)

    def __contains__(self, slot: int) -> bool:
        return slot in self._cues

    def slots(self) -> list[int]:
        return sorted(self._cues)

    def get(self, slot: int) -> SoundCue:
        _check_slot(slot)
        if slot not in self._cues:
            raise NotFoundError(f"no cue loaded in slot {slot}")
        return self._cues[slot]

    def load_cue(
        self,
        slot: int,
        source: Union[str, Path, bytes, AudioClip],
        device_id: str = "default",
        gain_db: float = 0.0,
        gate: Optional[GateSettings] = None,
        apply_gate: bool = False,
    ) -> SoundCue:
        _check_slot(slot)
        if isinstance(source, AudioClip):
            clip, origin = source, "memory"
        else:
            clip = read_wav(source)
            origin = str(source) if isinstance(source, (str, Path)) else "bytes"
        gate = gate if gate is not None else self.default_gate
        if apply_gate and gate is not None:
            clip = apply_noise_gate(clip, gate)
        cue = SoundCue(slot, clip, origin, device_id, gain_db, gate)
        self._cues[slot] = cue
        return cue

    def record_cue(
        self,
        slot: int,
        source: ClipSource,
        max_ms: float,
        device_id: str = "default",
        gain_db: float = 0.0,
        gate: Optional[GateSettings] = None,
    ) -> SoundCue:
        """Capture up to max_ms from the source, gate it, store it."""
        _check_slot(slot)
        if max_ms <= 0:
            raise InputError(f"recording length must be positive, got {max_ms} ms")
        frames = round(max_ms * source.sample_rate / 1000.0)
        captured = source.read(frames)
        if len(captured) == 0:
            raise InputError("recording captured no samples")
        clip = AudioClip(source.sample_rate, np.array(captured))
        gate = gate if gate is not None else self.default_gate
        if gate is not None:
            clip = apply_noise_gate(clip, gate)
        cue = SoundCue(slot, clip, "recorded", device_id, gain_db, gate)
        self._cues[slot] = cue
        return cue


# -- playback state and sinks ------------------------------------------------------


@dataclass(frozen=True)
class PlaybackCommand:
    action: str  # "play" | "stop"
    slot: int
    device_id: str = "default"
    gain_db: float = 0.0


@dataclass
class SlotState:
    playing: bool = False
    position: int = 0
    started_ms: float = 0.0


class PlaybackStateMachine:
    """Per-slot idle/playing tracking; retrigger restarts from sample 0."""

    def __init__(self):
        self._slots: dict[int, SlotState] = {i: SlotState() for i in range(1, MAX_SLOTS + 1)}

    def state(self, slot: int) -> SlotState:
        _check_slot(slot)
        return self._slots[slot]

    def trigger(self, slot: int, cue: SoundCue, now_ms: float) -> PlaybackCommand:
        _check_slot(slot)
        self._slots[slot] = SlotState(playing=True, position=0, started_ms=now_ms)
        return PlaybackCommand("play", slot, cue.device_id, cue.gain_db)

    def stop(self, slot: int, now_ms: float) -> PlaybackCommand:
        """Idempotent: stopping an idle slot stays idle."""
        _check_slot(slot)
        self._slots[slot] = SlotState(playing=False)
        return PlaybackCommand("stop", slot)

    def snapshot(self) -> dict[int, str]:
        return {slot: ("playing" if st.playing else "idle") for slot, st in self._slots.items()}


class NullAudioSink:
    """Collects commands in memory; used by unit tests."""

    def __init__(self):
        self.events: list[tuple[float, PlaybackCommand]] = []

    def play(self, cue: SoundCue, cmd: PlaybackCommand, t_ms: float) -> None:
        self.events.append((t_ms, cmd))

    def stop(self, cmd: PlaybackCommand, t_ms: float) -> None:
        self.events.append((t_ms, cmd))

    def close(self) -> None:
        pass


class FileAudioSink:
    """Renders triggered cues to WAV files plus a JSON-lines command log."""

    def __init__(self, out_dir: Union[str, Path], log_path: Union[str, Path]):
        self.out_dir = Path(out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.log_path = Path(log_path)
        self._log = open(self.log_path, "a", encoding="utf-8")
        self._lock = threading.Lock()
        self._seq = 0

    def _log_line(self, record: dict) -> None:
        self._log.write(json.dumps(record, separators=(",", ":")) + "\n")
        self._log.flush()

    def play(self, cue: SoundCue, cmd: PlaybackCommand, t_ms: float) -> None:
        with self._lock:
            self._seq += 1
            seq = self._seq
        gain = 10.0 ** (cmd.gain_db / 20.0)
        rendered = AudioClip(cue.clip.sample_rate, np.clip(cue.clip.samples * gain, -1.0, 1.0))
        path = self.out_dir / f"cue{cmd.slot}_{seq:04d}.wav"
        write_wav(path, rendered)
        self._log_line(
            {
                "t_ms": round(t_ms, 3),
                "action": "play",
                "slot": cmd.slot,
                "device": cmd.device_id,
                "gain_db": cmd.gain_db,
                "file": path.name,
                "seq": seq,
            }
        )

    def stop(self, cmd: PlaybackCommand, t_ms: float) -> None:
        self._log_line({"t_ms": round(t_ms, 3), "action": "stop", "slot": cmd.slot})

    def close(self) -> None:
        self._log.close()


def monotonic_ms() -> float:
    return time.monotonic() * 1000.0
