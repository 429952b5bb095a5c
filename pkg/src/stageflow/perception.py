"""Turns raw sensor reports into engine events.

Positions are normalized onto a 0-100 grid with pairwise distances per
frame; gestures are classified from three body landmarks by the angle at
the middle one, debounced over consecutive frames; transcripts are matched
against trigger phrases on word boundaries.

Distances are computed after normalization, so a non-square camera frame
stretches metric distances along its shorter axis. That matches the order
of the upstream tracking pipeline and is documented behaviour.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import IO, Iterable, Mapping

from .errors import DegenerateGeometryError, InputError

Point = tuple[float, float]

#: Below this separation (in landmark units) an angle is undefined.
DEGENERACY_EPS = 1e-6

DEFAULT_GESTURE_TOLERANCE_DEG = 15.0
DEFAULT_HOLD_FRAMES = 3

MAX_NORMALIZED_DISTANCE = 100.0 * math.sqrt(2.0)


@dataclass(frozen=True)
class RawDetection:
    """One person detection in pixel space."""

    person_id: int
    x_px: float
    y_px: float
    frame_w: int
    frame_h: int
    timestamp_ms: float = 0.0

    def __post_init__(self):
        if self.frame_w <= 0 or self.frame_h <= 0:
            raise InputError(f"frame dimensions must be positive, got {self.frame_w}x{self.frame_h}")
        if not 0 <= self.x_px <= self.frame_w or not 0 <= self.y_px <= self.frame_h:
            raise InputError(
                f"detection ({self.x_px}, {self.y_px}) outside frame {self.frame_w}x{self.frame_h}"
            )


@dataclass(frozen=True)
class TrackedPerson:
    person_id: int
    x_norm: float
    y_norm: float

    def __post_init__(self):
        if not 0.0 <= self.x_norm <= 100.0 or not 0.0 <= self.y_norm <= 100.0:
            raise InputError(
                f"normalized coordinates ({self.x_norm}, {self.y_norm}) outside the 0-100 grid"
            )


@dataclass(frozen=True)
class PositionFrame:
    """Normalized positions plus pairwise distances for one video frame."""

    timestamp_ms: float
    persons: tuple[TrackedPerson, ...]
    distances: Mapping[tuple[int, int], float]


@dataclass(frozen=True)
class GestureTemplate:
    """Three landmarks (b is the vertex) and a target angle with tolerance."""

    name: str
    landmark_ids: tuple[int, int, int]
    target_angle: float
    tolerance: float = DEFAULT_GESTURE_TOLERANCE_DEG
    hold_frames: int = DEFAULT_HOLD_FRAMES

    def __post_init__(self):
        if len(set(self.landmark_ids)) != 3:
            raise InputError(f"gesture {self.name!r}: landmark ids must be three distinct values")
        if not 0.0 <= self.target_angle <= 180.0:
            raise InputError(f"gesture {self.name!r}: target angle must be in [0, 180]")
        if not 0.0 < self.tolerance <= 90.0:
            raise InputError(f"gesture {self.name!r}: tolerance must be in (0, 90]")
        if self.hold_frames < 1:
            raise InputError(f"gesture {self.name!r}: hold_frames must be positive")


@dataclass(frozen=True)
class GestureEvent:
    name: str
    timestamp_ms: float
    measured_angle: float


@dataclass(frozen=True)
class SpeechEvent:
    transcript: str
    timestamp_ms: float

    def __post_init__(self):
        if not self.transcript:
            raise InputError("speech transcript must be non-empty")
        object.__setattr__(self, "transcript", self.transcript.lower())


@dataclass(frozen=True)
class EmotionEvent:
    label: str
    timestamp_ms: float


def normalize_position(d: RawDetection) -> TrackedPerson:
    """Map pixel coordinates onto the 0-100 stage grid."""
    # clamp guards the [0, 100] invariant against float rounding at the edges
    return TrackedPerson(
        person_id=d.person_id,
        x_norm=min(100.0, max(0.0, 100.0 * d.x_px / d.frame_w)),
        y_norm=min(100.0, max(0.0, 100.0 * d.y_px / d.frame_h)),
    )


def pairwise_distances(persons: Iterable[TrackedPerson]) -> dict[tuple[int, int], float]:
    """Euclidean distance per unordered person pair, keyed (low_id, high_id)."""
    people = list(persons)
    ids = [p.person_id for p in people]
    if len(set(ids)) != len(ids):
        raise InputError(f"duplicate person ids in frame: {sorted(ids)}")
    out: dict[tuple[int, int], float] = {}
    for i in range(len(people)):
        for j in range(i + 1, len(people)):
            a, b = people[i], people[j]
            key = (min(a.person_id, b.person_id), max(a.person_id, b.person_id))
            out[key] = math.hypot(a.x_norm - b.x_norm, a.y_norm - b.y_norm)
    return out


def build_frame(detections: Iterable[RawDetection], timestamp_ms: float) -> PositionFrame:
    persons = tuple(normalize_position(d) for d in detections)
    return PositionFrame(timestamp_ms, persons, pairwise_distances(persons))


def vertex_angle(a: Point, b: Point, c: Point) -> float:
    """Angle in degrees at vertex ``b`` between rays b->a and b->c."""
    ab = (a[0] - b[0], a[1] - b[1])
    cb = (c[0] - b[0], c[1] - b[1])
    len_ab = math.hypot(*ab)
    len_cb = math.hypot(*cb)
    if len_ab < DEGENERACY_EPS or len_cb < DEGENERACY_EPS:
        raise DegenerateGeometryError("coincident landmarks: angle undefined")
    cos_angle = (ab[0] * cb[0] + ab[1] * cb[1]) / (len_ab * len_cb)
    cos_angle = max(-1.0, min(1.0, cos_angle))
    return math.degrees(math.acos(cos_angle))


class GestureClassifier:
    """Per-template hold counters over a landmark stream.

    A template's counter increments on every frame whose measured angle is
    within tolerance and resets to zero otherwise (or when a landmark is
    missing). The event fires exactly on the frame the counter reaches
    ``hold_frames``; re-arming requires the condition to go false first.
    """

    def __init__(self, templates: Iterable[GestureTemplate] = ()):
        self._templates: list[GestureTemplate] = list(templates)
        self._counters: dict[str, int] = {t.name: 0 for t in self._templates}

    @property
    def templates(self) -> list[GestureTemplate]:
        return list(self._templates)

    def set_templates(self, templates: Iterable[GestureTemplate]) -> None:
        self._templates = list(templates)
        # keep counters for templates that survived, start fresh otherwise
        old = self._counters
        self._counters = {t.name: old.get(t.name, 0) for t in self._templates}

    def reset(self) -> None:
        self._counters = {t.name: 0 for t in self._templates}

    def update(
        self, landmarks: Mapping[int, Point], timestamp_ms: float
    ) -> list[GestureEvent]:
        events: list[GestureEvent] = []
        for template in self._templates:
            ids = template.landmark_ids
            if any(i not in landmarks for i in ids):
                self._counters[template.name] = 0
                continue
            a, b, c = (landmarks[i] for i in ids)
            try:
                angle = vertex_angle(a, b, c)
            except DegenerateGeometryError:
                self._counters[template.name] = 0
                continue
            if abs(angle - template.target_angle) <= template.tolerance:
                self._counters[template.name] += 1
                if self._counters[template.name] == template.hold_frames:
                    events.append(GestureEvent(template.name, timestamp_ms, angle))
            else:
                self._counters[template.name] = 0
        return events


def _words(text: str) -> list[str]:
    return text.lower().split()


def match_phrase(transcript: str, phrase: str) -> bool:
    """Word-boundary-aligned, case- and whitespace-insensitive containment."""
    if not transcript or not phrase:
        raise InputError("transcript and phrase must be non-empty")
    haystack = _words(transcript)
    needle = _words(phrase)
    if not needle:
        return False
    for start in range(len(haystack) - len(needle) + 1):
        if haystack[start : start + len(needle)] == needle:
            return True
    return False


@dataclass
class PositionLog:
    """Append-only JSON-lines sink for position frames.

    One line per frame: {"ts": ..., "persons": [{"id", "x", "y"}...],
    "distances": [{"a", "b", "d"}...]}, floats rounded to three decimals.
    """

    sink: IO[str]
    count: int = 0
    _owns_sink: bool = field(default=False, repr=False)

    @classmethod
    def open(cls, path) -> "PositionLog":
        log = cls(open(path, "a", encoding="utf-8"))
        log._owns_sink = True
        return log

    def append(self, frame: PositionFrame) -> int:
        record = {
            "ts": round(frame.timestamp_ms, 3),
            "persons": [
                {"id": p.person_id, "x": round(p.x_norm, 3), "y": round(p.y_norm, 3)}
                for p in sorted(frame.persons, key=lambda p: p.person_id)
            ],
            "distances": [
                {"a": a, "b": b, "d": round(d, 3)}
                for (a, b), d in sorted(frame.distances.items())
            ],
        }
        self.sink.write(json.dumps(record, separators=(",", ":")) + "\n")
        self.sink.flush()
        self.count += 1
        return self.count

    def close(self) -> None:
        if self._owns_sink:
            self.sink.close()
