"""stageflow: a rehearsal-room engine that routes gesture, position, speech
and emotion events into light memories, sound cues and generic OSC outputs
through performer-authored conditional flows."""

__version__ = "0.1.0"
