"""Runtime values and their canonical text forms.

A value is one of four Python types:

* ``fractions.Fraction`` for exact rationals (always normalised by Fraction)
* ``float`` for approximate reals (never NaN or infinite)
* ``bool``
* ``str`` for text

``bool`` is checked before anything numeric because it subclasses ``int``.
"""

from __future__ import annotations

import enum
import math
import re
from fractions import Fraction
from typing import Union

Value = Union[Fraction, float, bool, str]

# decimal ("0.45", "-3", ".5") or simple fraction ("-3/5")
NUMBER_RE = re.compile(r"-?(?:\d+(?:\.\d+)?|\.\d+)|-?\d+/\d+")
_DECIMAL_RE = re.compile(r"(-?)(\d*)(?:\.(\d+))?")


class VType(enum.Enum):
    RATIONAL = "rational"
    REAL = "real"
    BOOL = "bool"
    TEXT = "text"

    @property
    def numeric(self) -> bool:
        return self in (VType.RATIONAL, VType.REAL)


def vtype_of(value: Value) -> VType:
    if isinstance(value, bool):
        return VType.BOOL
    if isinstance(value, Fraction):
        return VType.RATIONAL
    if isinstance(value, float):
        return VType.REAL
    if isinstance(value, str):
        return VType.TEXT
    raise TypeError(f"not an expression value: {value!r}")


def is_number_token(text: str) -> bool:
    return NUMBER_RE.fullmatch(text) is not None


def parse_number(text: str) -> Fraction:
    """Exact rational from decimal or ``p/q`` source text.

    Never goes through binary floating point: ``parse_number("0.45")``
    is exactly ``Fraction(9, 20)``.
    """
    if NUMBER_RE.fullmatch(text) is None:
        raise ValueError(f"not a numeric literal: {text!r}")
    if "/" in text:
        num, den = text.split("/")
        if int(den) == 0:
            raise ValueError(f"zero denominator in {text!r}")
        return Fraction(int(num), int(den))
    sign, whole, frac = _DECIMAL_RE.fullmatch(text).groups()
    frac = frac or ""
    value = Fraction(int((whole or "0") + frac), 10 ** len(frac))
    return -value if sign else value


def canonical(value: Value) -> str:
    """Canonical text used in fingerprints, CSV keys and the variant store.

    Rationals print as ``n`` or ``p/q``; reals as the shortest round-trip
    decimal; booleans as ``true``/``false``; text verbatim.
    """
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, Fraction):
        if value.denominator == 1:
            return str(value.numerator)
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, str):
        return value
    raise TypeError(f"not an expression value: {value!r}")


def canonical_number(text: str) -> str:
    """Canonicalise a numeric token, e.g. ``"0.40"`` -> ``"2/5"``."""
    return canonical(parse_number(text))


def check_real(x: float) -> float:
    if math.isnan(x) or math.isinf(x):
        raise ArithmeticError("real result is not finite")
    return x


def encode(value: Value) -> list:
    """JSON-safe tagged encoding for the variant store."""
    if isinstance(value, bool):
        return ["b", value]
    if isinstance(value, Fraction):
        return ["q", canonical(value)]
    if isinstance(value, float):
        return ["r", repr(value)]
    return ["s", value]


def decode(item: list) -> Value:
    tag, payload = item
    if tag == "b":
        return bool(payload)
    if tag == "q":
        return parse_number(payload)
    if tag == "r":
        return float(payload)
    if tag == "s":
        return str(payload)
    raise ValueError(f"unknown value tag {tag!r}")
