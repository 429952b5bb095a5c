"""Conditional flow evaluation over the live event stream.

Flows fire on the rising edge of their trigger, gated by a per-flow
cooldown. Position and distance triggers are continuous: their truth
persists across frames, so a performer dwelling inside a zone fires the
flow once, not once per frame. Gesture, phrase and emotion events are
pulses: the condition is considered to have ended with the event itself,
so the next occurrence is a fresh rising edge (still subject to
cooldown).

``evaluate_event`` is pure given (scene, state, event, now); the engine
loop is the only owner of the mutable state set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

from .perception import EmotionEvent, GestureEvent, PositionFrame, SpeechEvent, match_phrase
from .scene import (
    Action,
    DistanceAbove,
    DistanceBelow,
    EmotionIs,
    Flow,
    GestureIs,
    PhraseSpoken,
    PositionNear,
    SceneDocument,
    TriggerCondition,
)

EngineEvent = Union[GestureEvent, PositionFrame, SpeechEvent, EmotionEvent]

_CONTINUOUS_TRIGGERS = (PositionNear, DistanceBelow, DistanceAbove)


@dataclass
class FlowState:
    previously_true: bool = False
    last_fired_ms: Optional[float] = None


class ConditionStateSet:
    """Per-flow edge/cooldown state, keyed by flow id."""

    def __init__(self, scene: Optional[SceneDocument] = None):
        self._states: dict[str, FlowState] = {}
        if scene is not None:
            self.ensure(scene)

    def ensure(self, scene: SceneDocument) -> None:
        for flow in scene.flows:
            self._states.setdefault(flow.flow_id, FlowState())

    def for_flow(self, flow_id: str) -> FlowState:
        return self._states.setdefault(flow_id, FlowState())


def trigger_accepts(trigger: TriggerCondition, event: EngineEvent) -> bool:
    """Whether this trigger kind is evaluated against this event kind."""
    if isinstance(event, GestureEvent):
        return isinstance(trigger, GestureIs)
    if isinstance(event, PositionFrame):
        return isinstance(trigger, _CONTINUOUS_TRIGGERS)
    if isinstance(event, SpeechEvent):
        return isinstance(trigger, PhraseSpoken)
    if isinstance(event, EmotionEvent):
        return isinstance(trigger, EmotionIs)
    return False


def eval_trigger(trigger: TriggerCondition, event: EngineEvent) -> bool:
    if isinstance(trigger, GestureIs):
        return trigger.name == event.name
    if isinstance(trigger, PhraseSpoken):
        return match_phrase(event.transcript, trigger.phrase)
    if isinstance(trigger, EmotionIs):
        return trigger.label == event.label
    if isinstance(trigger, PositionNear):
        for person in event.persons:
            if trigger.person_id is not None and person.person_id != trigger.person_id:
                continue
            if math.hypot(person.x_norm - trigger.x, person.y_norm - trigger.y) <= trigger.radius:
                return True
        return False
    if isinstance(trigger, (DistanceBelow, DistanceAbove)):
        if trigger.pair is not None:
            distance = event.distances.get(trigger.pair)
            candidates = [] if distance is None else [distance]
        else:
            candidates = list(event.distances.values())
        if isinstance(trigger, DistanceBelow):
            return any(d < trigger.threshold for d in candidates)
        return any(d > trigger.threshold for d in candidates)
    raise TypeError(f"unknown trigger {trigger!r}")


def evaluate_event(
    event: EngineEvent,
    scene: SceneDocument,
    states: ConditionStateSet,
    now_ms: float,
) -> list[tuple[str, Action]]:
    """Flows in document order; each firing flow contributes all its actions.

    A flow fires iff its trigger is true for this event, the previous
    matching evaluation was false (rising edge) and its cooldown has
    elapsed. State updates for every flow whose trigger kind matches the
    event kind, whether or not it fires; disabled flows track their
    condition but never contribute actions.
    """
    fired: list[tuple[str, Action]] = []
    continuous = isinstance(event, PositionFrame)
    for flow in scene.flows:
        if not trigger_accepts(flow.trigger, event):
            continue
        state = states.for_flow(flow.flow_id)
        result = eval_trigger(flow.trigger, event)
        rising = result and not state.previously_true
        cooled = (
            state.last_fired_ms is None
            or now_ms - state.last_fired_ms >= flow.cooldown_ms
        )
        if flow.enabled and rising and cooled:
            fired.extend((flow.flow_id, action) for action in flow.actions)
            state.last_fired_ms = now_ms
        state.previously_true = result if continuous else False
    return fired


def flows_matching(scene: SceneDocument, event: EngineEvent) -> list[Flow]:
    return [f for f in scene.flows if trigger_accepts(f.trigger, event)]
