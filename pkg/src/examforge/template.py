"""Placeholder syntax shared by validation and rendering.

``{{name}}`` or ``{{name:fmt}}`` is a placeholder; ``\\{{`` is a literal
``{{``. Everything else is opaque text.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

from examforge.errors import RenderError

_PLACEHOLDER_RE = re.compile(r"\{\{([A-Za-z_][A-Za-z0-9_]*)(?::([A-Za-z0-9]+))?\}\}")
_FORMAT_RE = re.compile(r"(raw|frac)|(dec|sci)(\d+)")


@dataclass(frozen=True)
class FormatSpec:
    """``kind`` is one of canonical/raw/frac/dec/sci; ``digits`` for dec and sci."""

    kind: str
    digits: int = 0

    @classmethod
    def parse(cls, text: str | None) -> "FormatSpec":
        if text is None:
            return cls("canonical")
        m = _FORMAT_RE.fullmatch(text)
        if m is None:
            raise RenderError(f"unknown format {text!r} (use raw, frac, dec<k> or sci<k>)")
        if m.group(1):
            return cls(m.group(1))
        k = int(m.group(3))
        if not 1 <= k <= 17:
            raise RenderError(f"format {text!r}: digit count must be in 1..17")
        return cls(m.group(2), k)

    def __str__(self) -> str:
        if self.kind in ("dec", "sci"):
            return f"{self.kind}{self.digits}"
        return self.kind


@dataclass(frozen=True)
class Placeholder:
    name: str
    fmt: FormatSpec
    offset: int


Segment = Union[str, Placeholder]


def _line_of(text: str, offset: int) -> int:
    return text.count("\n", 0, offset) + 1


def parse_template(text: str) -> list[Segment]:
    """Split template text into literal strings and placeholders."""
    out: list[Segment] = []
    buf: list[str] = []
    i = 0
    n = len(text)
    while i < n:
        if text.startswith("\\{{", i):
            buf.append("{{")
            i += 3
            continue
        if text.startswith("{{", i):
            m = _PLACEHOLDER_RE.match(text, i)
            if m is None:
                raise RenderError(f"malformed placeholder on line {_line_of(text, i)}")
            try:
                fmt = FormatSpec.parse(m.group(2))
            except RenderError as exc:
                raise RenderError(f"line {_line_of(text, i)}: {exc}") from None
            if buf:
                out.append("".join(buf))
                buf = []
            out.append(Placeholder(m.group(1), fmt, i))
            i = m.end()
            continue
        j = text.find("{{", i + 1)
        k = text.find("\\{{", i + 1)
        stops = [x for x in (j, k) if x != -1]
        end = min(stops) if stops else n
        buf.append(text[i:end])
        i = end
    if buf:
        out.append("".join(buf))
    return out


def placeholders(text: str) -> list[Placeholder]:
    return [s for s in parse_template(text) if isinstance(s, Placeholder)]


def strip_placeholders(text: str) -> str:
    """Template text with every placeholder removed (literal parts only)."""
    return " ".join(s for s in parse_template(text) if isinstance(s, str))
