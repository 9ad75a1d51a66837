"""Exact-rational helpers shared by every module."""

from __future__ import annotations

import math
from decimal import Decimal
from fractions import Fraction
from numbers import Rational
from typing import Union

RationalLike = Union[int, float, str, Decimal, Fraction]


def to_fraction(value: RationalLike) -> Fraction:
    """Convert ``value`` to a ``Fraction`` without any rounding.

    Decimal strings ("0.618", "1e-3", "3/7") parse to their exact value.
    Binary floats map to the rational they actually store, so
    ``to_fraction(0.1)`` is ``3602879701896397/36028797018963968``.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"non-finite value {value!r}")
        return Fraction(value)
    if isinstance(value, Decimal):
        if not value.is_finite():
            raise ValueError(f"non-finite value {value!r}")
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        try:
            return Fraction(text)
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"cannot parse {value!r} as an exact rational") from exc
    raise TypeError(f"unsupported numeric type {type(value).__name__}")


def fraction_str(x: Fraction) -> str:
    """Canonical text form: ``"p/q"`` or ``"p"`` when integral."""
    return str(x)


def clip(x, lo, hi):
    return lo if x < lo else hi if x > hi else x


def ceil_div(a: int, b: int) -> int:
    return -((-a) // b)
