"""Floating-point building blocks: error-free transforms, double-double
arithmetic and compensated summation.

The double-double helpers are compiled with numba so the orbit kernels can
call them from their inner loops; they work unchanged from plain Python.
A double-double value is carried as a ``(hi, lo)`` pair of floats with
``|lo| <= ulp(hi)/2``.
"""

from __future__ import annotations

import enum
import math
from fractions import Fraction
from typing import Iterable

from numba import njit


class NumericPolicy(enum.IntEnum):
    """How the angle coordinate is accumulated along an orbit."""

    DOUBLE = 0
    COMPENSATED = 1
    DOUBLE_DOUBLE = 2

    @classmethod
    def parse(cls, text: str) -> "NumericPolicy":
        key = text.strip().lower().replace("-", "").replace("_", "")
        table = {
            "double": cls.DOUBLE,
            "compensated": cls.COMPENSATED,
            "compensateddouble": cls.COMPENSATED,
            "doubledouble": cls.DOUBLE_DOUBLE,
            "dd": cls.DOUBLE_DOUBLE,
        }
        if key not in table:
            raise ValueError(f"unknown numeric policy {text!r}")
        return table[key]


_SPLITTER = 134217729.0  # 2**27 + 1


@njit(cache=True)
def two_sum(a, b):
    """Knuth's TwoSum: ``s + e == a + b`` exactly."""
    s = a + b
    bb = s - a
    e = (a - (s - bb)) + (b - bb)
    return s, e


@njit(cache=True)
def quick_two_sum(a, b):
    # requires |a| >= |b|
    s = a + b
    e = b - (s - a)
    return s, e


@njit(cache=True)
def split(a):
    c = _SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


@njit(cache=True)
def two_prod(a, b):
    """Dekker product: ``p + e == a * b`` exactly (barring overflow)."""
    p = a * b
    ahi, alo = split(a)
    bhi, blo = split(b)
    e = ((ahi * bhi - p) + ahi * blo + alo * bhi) + alo * blo
    return p, e


@njit(cache=True)
def dd_add(ahi, alo, bhi, blo):
    s, e = two_sum(ahi, bhi)
    t, f = two_sum(alo, blo)
    e += t
    s, e = quick_two_sum(s, e)
    e += f
    return quick_two_sum(s, e)


@njit(cache=True)
def dd_add_d(ahi, alo, b):
    s, e = two_sum(ahi, b)
    e += alo
    return quick_two_sum(s, e)


@njit(cache=True)
def dd_mul_d(ahi, alo, b):
    p, e = two_prod(ahi, b)
    e += alo * b
    return quick_two_sum(p, e)


@njit(cache=True)
def dd_div_d(ahi, alo, b):
    q1 = ahi / b
    p, e = two_prod(q1, b)
    s, f = two_sum(ahi, -p)
    f -= e
    f += alo
    q2 = (s + f) / b
    return quick_two_sum(q1, q2)


@njit(cache=True)
def dd_cmp_d(hi, lo, c):
    """Sign of ``(hi + lo) - c`` evaluated without rounding."""
    if hi > c:
        return 1
    if hi < c:
        return -1
    if lo > 0.0:
        return 1
    if lo < 0.0:
        return -1
    return 0


def dd_from_fraction(x: Fraction) -> tuple[float, float]:
    hi = float(x)
    lo = float(x - Fraction(hi))
    return hi, lo


def dd_to_fraction(hi: float, lo: float) -> Fraction:
    return Fraction(hi) + Fraction(lo)


class NeumaierSum:
    """Running compensated sum (Neumaier's variant of Kahan summation).

    Terms are absorbed in the order they are given, which is what the orbit
    does when it accumulates angle increments.
    """

    __slots__ = ("_s", "_c")

    def __init__(self, start: float = 0.0):
        self._s = float(start)
        self._c = 0.0

    def add(self, x: float) -> None:
        t = self._s + x
        if abs(self._s) >= abs(x):
            self._c += (self._s - t) + x
        else:
            self._c += (x - t) + self._s
        self._s = t

    @property
    def value(self) -> float:
        return self._s + self._c

    @property
    def parts(self) -> tuple[float, float]:
        return self._s, self._c


def neumaier_sum(values: Iterable[float]) -> float:
    acc = NeumaierSum()
    for v in values:
        acc.add(v)
    return acc.value


def harmonic_segment(start: int, count: int) -> float:
    """Compensated ``sum(1/(start + k) for k in range(count))``."""
    acc = NeumaierSum()
    for k in range(count):
        acc.add(1.0 / (start + k))
    return acc.value


def frac(x: float) -> float:
    return x - math.floor(x)
