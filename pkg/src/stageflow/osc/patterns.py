"""OSC 1.0 address pattern matching.

Dispatch wildcards per the OSC 1.0 spec: '?' matches one character, '*' a
run of characters within one path segment, '[...]' a character class with
'!' negation and '-' ranges, '{a,b}' alternation over literal strings.
No wildcard ever matches '/'.

Patterns compile to anchored regular expressions and are cached, so
matching on the hot path is a single ``re.fullmatch``.
"""

from __future__ import annotations

import re
from functools import lru_cache


class OscPatternError(ValueError):
    """Malformed address pattern (unclosed class or alternation, bad range)."""


def _compile_class(pattern: str, start: int) -> tuple[str, int]:
    """Translate '[...]' starting at ``start`` (on the '['). Returns (regex, next_index)."""
    i = start + 1
    negated = False
    if i < len(pattern) and pattern[i] == "!":
        negated = True
        i += 1
    members: list[str] = []
    saw_any = False
    while i < len(pattern) and pattern[i] != "]":
        ch = pattern[i]
        if ch == "/":
            raise OscPatternError(f"'/' not allowed inside character class in {pattern!r}")
        if i + 2 < len(pattern) and pattern[i + 1] == "-" and pattern[i + 2] != "]":
            lo, hi = ch, pattern[i + 2]
            if lo > hi:
                raise OscPatternError(f"bad range {lo}-{hi} in {pattern!r}")
            members.append(f"{re.escape(lo)}-{re.escape(hi)}")
            i += 3
        else:
            members.append(re.escape(ch))
            i += 1
        saw_any = True
    if i >= len(pattern):
        raise OscPatternError(f"unclosed '[' in {pattern!r}")
    if not saw_any:
        raise OscPatternError(f"empty character class in {pattern!r}")
    body = "".join(members)
    if negated:
        # A negated class must still never match the segment separator.
        return f"[^/{body}]", i + 1
    return f"(?!/)[{body}]", i + 1


def _compile_alternation(pattern: str, start: int) -> tuple[str, int]:
    """Translate '{a,b,...}' starting at ``start`` (on the '{')."""
    i = start + 1
    alternatives: list[str] = []
    current: list[str] = []
    while i < len(pattern):
        ch = pattern[i]
        if ch == "}":
            alternatives.append("".join(current))
            joined = "|".join(re.escape(a) for a in alternatives)
            return f"(?:{joined})", i + 1
        if ch == ",":
            alternatives.append("".join(current))
            current = []
        elif ch == "{":
            raise OscPatternError(f"nested '{{' in {pattern!r}")
        elif ch == "/":
            raise OscPatternError(f"'/' not allowed inside alternation in {pattern!r}")
        else:
            current.append(ch)
        i += 1
    raise OscPatternError(f"unclosed '{{' in {pattern!r}")


@lru_cache(maxsize=1024)
def _compile_pattern(pattern: str) -> re.Pattern:
    out: list[str] = []
    i = 0
    while i < len(pattern):
        ch = pattern[i]
        if ch == "?":
            out.append("[^/]")
            i += 1
        elif ch == "*":
            out.append("[^/]*")
            i += 1
        elif ch == "[":
            piece, i = _compile_class(pattern, i)
            out.append(piece)
        elif ch == "{":
            piece, i = _compile_alternation(pattern, i)
            out.append(piece)
        else:
            out.append(re.escape(ch))
            i += 1
    return re.compile("".join(out))


def match_address(pattern: str, address: str) -> bool:
    """True when ``pattern`` dispatches to ``address``.

    Both arguments must start with '/'. A literal pattern matches only
    itself; wildcards never cross segment boundaries.
    """
    if not pattern.startswith("/"):
        raise OscPatternError(f"pattern must start with '/', got {pattern!r}")
    if not address.startswith("/"):
        raise OscPatternError(f"address must start with '/', got {address!r}")
    return _compile_pattern(pattern).fullmatch(address) is not None


__all__ = ["OscPatternError", "match_address"]
