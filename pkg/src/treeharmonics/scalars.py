"""Scalar arithmetic modes.

Scalars are either exact rationals (`fractions.Fraction`, the default and the
only mode used by the certification suite) or IEEE doubles.  All operations in
the package are written generically over the two types; the mode only decides
how scalars are constructed, parsed and serialized.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Literal, Union

from .errors import ValidationError

Mode = Literal["exact", "float"]
Scalar = Union[Fraction, float]

MODES = ("exact", "float")


def check_mode(mode: str) -> Mode:
    if mode not in MODES:
        raise ValidationError(f"unknown arithmetic mode {mode!r}, expected one of {MODES}")
    return mode  # type: ignore[return-value]


def make_scalar(x: int | Fraction | str | float, mode: Mode = "exact") -> Scalar:
    """Build a scalar of the requested mode from a number or a 'p/q' string."""
    if mode == "exact":
        if isinstance(x, float):
            return Fraction(x).limit_denominator(10**12)
        return Fraction(x)
    return float(Fraction(x)) if isinstance(x, str) else float(x)


def zero(mode: Mode = "exact") -> Scalar:
    return Fraction(0) if mode == "exact" else 0.0


def format_scalar(x: Scalar) -> str:
    """Serialize a scalar: exact values as 'p/q' (or 'p'), floats as repr."""
    if isinstance(x, Fraction):
        return str(x)
    return repr(float(x))


def parse_scalar(s: str, mode: Mode = "exact") -> Scalar:
    try:
        value = Fraction(s)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValidationError(f"cannot parse scalar {s!r}") from exc
    return value if mode == "exact" else float(value)


def scalar_mode(x: Scalar) -> Mode:
    return "exact" if isinstance(x, (Fraction, int)) else "float"
