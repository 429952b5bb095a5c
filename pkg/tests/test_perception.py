"""Geometry, gesture debounce, phrase matching and position log tests."""

import io
import json
import math
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from stageflow.errors import DegenerateGeometryError, InputError
from stageflow.perception import (
    GestureClassifier,
    GestureTemplate,
    PositionLog,
    RawDetection,
    TrackedPerson,
    build_frame,
    match_phrase,
    normalize_position,
    pairwise_distances,
    vertex_angle,
)


# -- normalization -----------------------------------------------------------


def test_normalize_midpoint():
    p = normalize_position(RawDetection(1, 320, 240, 640, 480))
    assert (p.x_norm, p.y_norm) == (50.0, 50.0)


def test_normalize_origin_and_corner():
    assert normalize_position(RawDetection(1, 0, 0, 640, 480)).x_norm == 0.0
    corner = normalize_position(RawDetection(1, 640, 480, 640, 480))
    assert (corner.x_norm, corner.y_norm) == (100.0, 100.0)


def test_detection_rejects_zero_frame():
    with pytest.raises(InputError):
        RawDetection(1, 0, 0, 0, 480)


def test_detection_rejects_out_of_frame():
    with pytest.raises(InputError):
        RawDetection(1, 700, 0, 640, 480)


@given(
    st.integers(min_value=1, max_value=4000),
    st.integers(min_value=1, max_value=4000),
    st.floats(min_value=0, max_value=1),
    st.floats(min_value=0, max_value=1),
)
def test_normalized_always_in_bounds(w, h, fx, fy):
    p = normalize_position(RawDetection(1, fx * w, fy * h, w, h))
    assert 0.0 <= p.x_norm <= 100.0
    assert 0.0 <= p.y_norm <= 100.0


# -- distances ---------------------------------------------------------------


def test_distance_examples():
    a = TrackedPerson(1, 0, 0)
    b = TrackedPerson(2, 100, 0)
    assert pairwise_distances([a, b]) == {(1, 2): 100.0}
    assert pairwise_distances([a]) == {}
    c = TrackedPerson(2, 30, 40)
    assert pairwise_distances([a, c]) == {(1, 2): 50.0}


def test_distance_rejects_duplicate_ids():
    with pytest.raises(InputError):
        pairwise_distances([TrackedPerson(1, 0, 0), TrackedPerson(1, 1, 1)])


coords = st.floats(min_value=0, max_value=100)


@given(st.lists(st.tuples(coords, coords), min_size=2, max_size=6, unique=True))
def test_distance_count_and_symmetry(points):
    persons = [TrackedPerson(i + 1, x, y) for i, (x, y) in enumerate(points)]
    d = pairwise_distances(persons)
    n = len(persons)
    assert len(d) == n * (n - 1) // 2
    for (a, b), dist in d.items():
        assert a < b
        assert 0.0 <= dist <= 100.0 * math.sqrt(2) + 1e-9


@given(st.tuples(coords, coords), st.tuples(coords, coords), st.tuples(coords, coords))
def test_triangle_inequality(p1, p2, p3):
    persons = [TrackedPerson(1, *p1), TrackedPerson(2, *p2), TrackedPerson(3, *p3)]
    d = pairwise_distances(persons)
    assert d[(1, 3)] <= d[(1, 2)] + d[(2, 3)] + 1e-9


# -- vertex angle ------------------------------------------------------------


def test_angle_examples():
    assert vertex_angle((1, 0), (0, 0), (0, 1)) == pytest.approx(90.0)
    assert vertex_angle((0, 0), (1, 0), (2, 0)) == pytest.approx(180.0)
    with pytest.raises(DegenerateGeometryError):
        vertex_angle((0, 0), (0, 0), (1, 1))


@given(
    st.floats(min_value=-10, max_value=10),
    st.floats(min_value=-10, max_value=10),
    st.floats(min_value=0, max_value=2 * math.pi),
    st.floats(min_value=0.1, max_value=50),
)
def test_angle_rotation_scale_invariance(dx, dy, theta, scale):
    a, b, c = (2.0, 0.5), (0.0, 0.0), (-1.0, 3.0)
    base = vertex_angle(a, b, c)

    def transform(p):
        x = p[0] * math.cos(theta) - p[1] * math.sin(theta)
        y = p[0] * math.sin(theta) + p[1] * math.cos(theta)
        return (scale * x + dx, scale * y + dy)

    moved = vertex_angle(transform(a), transform(b), transform(c))
    assert abs(moved - base) <= 1e-6


# -- gesture classification --------------------------------------------------

RAISED = GestureTemplate("raised", (1, 2, 3), target_angle=170.0, tolerance=15.0, hold_frames=1)


def landmarks_for_angle(angle_deg: float):
    # vertex at origin, one ray along +x, the other rotated by the angle
    rad = math.radians(angle_deg)
    return {1: (1.0, 0.0), 2: (0.0, 0.0), 3: (math.cos(rad), math.sin(rad))}


def test_gesture_within_tolerance_fires():
    clf = GestureClassifier([RAISED])
    events = clf.update(landmarks_for_angle(165.0), timestamp_ms=10)
    assert len(events) == 1
    assert events[0].name == "raised"
    assert events[0].measured_angle == pytest.approx(165.0)


def test_gesture_outside_tolerance_resets():
    clf = GestureClassifier([RAISED])
    assert clf.update(landmarks_for_angle(150.0), 0) == []


def test_hold_frames_traced_by_hand():
    # hand-traced counter automaton: 168 -> 1, 169 -> 2, 171 -> 3 == hold, fire
    template = GestureTemplate("hold3", (1, 2, 3), 170.0, 15.0, hold_frames=3)
    clf = GestureClassifier([template])
    assert clf.update(landmarks_for_angle(168.0), 0) == []
    assert clf.update(landmarks_for_angle(169.0), 33) == []
    events = clf.update(landmarks_for_angle(171.0), 66)
    assert [e.name for e in events] == ["hold3"]
    # held beyond hold_frames: no re-fire until the condition goes false
    assert clf.update(landmarks_for_angle(170.0), 99) == []
    assert clf.update(landmarks_for_angle(90.0), 132) == []
    assert clf.update(landmarks_for_angle(170.0), 165) == []
    assert clf.update(landmarks_for_angle(170.0), 198) == []
    assert len(clf.update(landmarks_for_angle(170.0), 231)) == 1


def test_missing_landmark_resets_counter():
    template = GestureTemplate("hold2", (1, 2, 3), 170.0, 15.0, hold_frames=2)
    clf = GestureClassifier([template])
    assert clf.update(landmarks_for_angle(170.0), 0) == []
    assert clf.update({1: (1.0, 0.0)}, 33) == []  # vertex missing: reset
    assert clf.update(landmarks_for_angle(170.0), 66) == []
    assert len(clf.update(landmarks_for_angle(170.0), 99)) == 1


def test_no_double_fire_without_false_between():
    # property over random angle streams: two events for one template imply
    # an out-of-tolerance (or missing) frame between them
    rng = random.Random(7)
    template = GestureTemplate("g", (1, 2, 3), 90.0, 20.0, hold_frames=2)
    for _ in range(50):
        clf = GestureClassifier([template])
        fired_frames = []
        in_tolerance = []
        for frame in range(40):
            angle = rng.uniform(0, 180)
            in_tolerance.append(abs(angle - 90.0) <= 20.0)
            if clf.update(landmarks_for_angle(angle), frame):
                fired_frames.append(frame)
        for f1, f2 in zip(fired_frames, fired_frames[1:]):
            assert any(not ok for ok in in_tolerance[f1 : f2 + 1])


def test_template_validation():
    with pytest.raises(InputError):
        GestureTemplate("bad", (1, 1, 3), 90.0)
    with pytest.raises(InputError):
        GestureTemplate("bad", (1, 2, 3), 200.0)
    with pytest.raises(InputError):
        GestureTemplate("bad", (1, 2, 3), 90.0, tolerance=91.0)


# -- phrase matching ---------------------------------------------------------


def test_phrase_examples():
    assert match_phrase("Open the door please", "open the door") is True
    assert match_phrase("reopen the doors", "open the door") is False
    assert match_phrase("the  door   opens", "door opens") is True


def test_phrase_whitespace_oracle():
    # oracle: collapse whitespace runs, then check word-aligned containment
    transcript, phrase = "the  door \t  opens", "door opens"
    collapsed = " ".join(transcript.split())
    assert f" {phrase} " in f" {collapsed} "
    assert match_phrase(transcript, phrase)


@given(st.text(alphabet="abc d", min_size=1), st.text(alphabet="abc d", min_size=1))
def test_phrase_case_insensitive(t, p):
    if not t.strip() or not p.strip():
        return
    assert match_phrase(t, p) == match_phrase(t.upper(), p)


# -- position log ------------------------------------------------------------


def make_frame(ts=1000.0):
    detections = [RawDetection(1, 0, 0, 640, 480), RawDetection(2, 320, 240, 640, 480)]
    return build_frame(detections, ts)


def test_log_appends_one_line_per_frame():
    sink = io.StringIO()
    log = PositionLog(sink)
    assert log.append(make_frame()) == 1
    assert log.append(make_frame()) == 2
    lines = sink.getvalue().splitlines()
    assert len(lines) == 2
    assert lines[0] == lines[1]


def test_log_line_parses_back():
    sink = io.StringIO()
    PositionLog(sink).append(make_frame(ts=12.3456))
    record = json.loads(sink.getvalue())
    assert record["ts"] == 12.346
    assert [p["id"] for p in record["persons"]] == [1, 2]
    assert len(record["distances"]) == 1
    d = record["distances"][0]
    assert (d["a"], d["b"]) == (1, 2)
    assert d["d"] == pytest.approx(math.hypot(50, 50), abs=1e-3)
    # floats carry at most three decimals
    for p in record["persons"]:
        assert round(p["x"], 3) == p["x"]
