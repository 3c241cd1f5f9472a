"""The value space: fixed-dimension vectors with an L1 base metric.

The base metric is translation invariant, which is the one property the rest
of the package leans on (all boundary and pointwise metrics inherit it).  The
bounded form d/(1+d) caps every comparison below one, and the truncated
product metric weights component k by 2^-k.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .errors import DimensionMismatchError, ValidationError
from .scalars import Mode, Scalar, make_scalar


@dataclass(frozen=True)
class Value:
    """A point of the value space: an immutable vector of scalars."""

    coords: tuple[Scalar, ...]

    @property
    def dim(self) -> int:
        return len(self.coords)

    @staticmethod
    def of(*coords: int | Fraction | float | str, mode: Mode = "exact") -> "Value":
        return Value(tuple(make_scalar(c, mode) for c in coords))

    @staticmethod
    def zero(dim: int, mode: Mode = "exact") -> "Value":
        z = make_scalar(0, mode)
        return Value((z,) * dim)

    def __add__(self, other: "Value") -> "Value":
        _check_dims(self, other)
        return Value(tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __sub__(self, other: "Value") -> "Value":
        _check_dims(self, other)
        return Value(tuple(a - b for a, b in zip(self.coords, other.coords)))

    def __neg__(self) -> "Value":
        return Value(tuple(-a for a in self.coords))

    def scale(self, a: Scalar) -> "Value":
        return Value(tuple(a * c for c in self.coords))


def _check_dims(u: Value, v: Value) -> None:
    if u.dim != v.dim:
        raise DimensionMismatchError(f"dimension mismatch: {u.dim} vs {v.dim}")


@dataclass(frozen=True)
class TupleValue:
    """A truncated point of the countable product of the value space."""

    components: tuple[Value, ...]

    @property
    def width(self) -> int:
        return len(self.components)

    @property
    def dim(self) -> int:
        return self.components[0].dim if self.components else 0

    def __add__(self, other: "TupleValue") -> "TupleValue":
        _check_widths(self, other)
        return TupleValue(tuple(a + b for a, b in zip(self.components, other.components)))


def _check_widths(u: TupleValue, v: TupleValue) -> None:
    if u.width != v.width:
        raise DimensionMismatchError(f"tuple width mismatch: {u.width} vs {v.width}")
    if u.components and v.components:
        _check_dims(u.components[0], v.components[0])


def base_metric(u: Value, v: Value) -> Scalar:
    """L1 distance; translation invariant and exact over rationals."""
    _check_dims(u, v)
    return sum(abs(a - b) for a, b in zip(u.coords, v.coords))


def bounded_metric(u: Value, v: Value) -> Scalar:
    """d/(1+d) for d the base metric: strictly below one, increasing in d."""
    d = base_metric(u, v)
    return d / (1 + d)


def tuple_metric(u: TupleValue, v: TupleValue) -> Scalar:
    """Sum over components k of 2^-k * bounded_metric, k starting at 1."""
    _check_widths(u, v)
    total: Scalar = 0
    weight = Fraction(1, 2)
    for a, b in zip(u.components, v.components):
        total += weight * bounded_metric(a, b)
        weight = weight / 2
    return total


def dense_grid(dim: int, resolution: int, bound: int, mode: Mode = "exact") -> list[Value]:
    """All vectors with coordinates k/2^resolution, |k| <= bound * 2^resolution.

    Lexicographic order over coordinate tuples; deterministic.
    """
    if resolution < 0 or bound < 1:
        raise ValidationError("dense_grid requires resolution >= 0 and bound >= 1")
    if dim < 1:
        raise ValidationError("dense_grid requires dim >= 1")
    step = bound * (1 << resolution)
    axis = [make_scalar(Fraction(k, 1 << resolution), mode) for k in range(-step, step + 1)]
    return [Value(coords) for coords in itertools.product(axis, repeat=dim)]


def centered_grid(dim: int, resolution: int, bound: int, mode: Mode = "exact") -> list[Value]:
    """The dense grid reordered so the zero vector comes first.

    Used by the enumerations that must start at the zero assignment; the
    remaining points keep their lexicographic order.
    """
    points = dense_grid(dim, resolution, bound, mode)
    z = Value.zero(dim, mode)
    return [z] + [p for p in points if p != z]
