"""Domain error hierarchy shared across the engine.

Every error carries a short machine-readable ``code`` so the control API can
surface failures uniformly without string matching.
"""

from __future__ import annotations


class StageflowError(Exception):
    """Base class for all domain errors."""

    code = "error"

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


class InputError(StageflowError):
    """A value violated a documented input invariant."""

    code = "invalid_input"


class RangeError(StageflowError):
    """An index or slot fell outside its fixed range."""

    code = "out_of_range"


class NotFoundError(StageflowError):
    """A referenced memory, cue or flow does not exist."""

    code = "not_found"


class FormatError(StageflowError):
    """A file or payload could not be decoded."""

    code = "bad_format"


class DegenerateGeometryError(InputError):
    """Points too close together to define an angle."""

    code = "degenerate_geometry"


class ConfigError(StageflowError):
    code = "bad_config"
