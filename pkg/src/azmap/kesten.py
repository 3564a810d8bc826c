"""The zero-twist member: circle rotation with a +/-1 counter.

``x <- (x + alpha) mod 1`` and ``y <- y + sgn(x - 1/2)``, so ``y`` records
the discrepancy between visits to the two halves of the circle.  When alpha
(and the starting point) are exact rationals the rotation is done in
integer arithmetic over a common denominator, which makes periodicity
statements exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np
from numba import njit

from .core import OK, SINGULAR, SINGULAR_RESOLVED, MapParams, SingularPolicy, _az_step
from .errors import DomainError, SingularHit

MAX_CROSSINGS_KEPT = 10_000


def as_rational(alpha) -> Optional[Fraction]:
    """``alpha`` as a Fraction if it was given exactly.

    Fractions, ints and ``"p/q"`` strings qualify, and so do floats whose
    binary value is a short dyadic fraction such as ``0.5``.
    """
    if isinstance(alpha, float):
        q = Fraction(alpha)
        return q if q.denominator <= 2**20 else None
    if isinstance(alpha, Fraction):
        return alpha
    if isinstance(alpha, int) and not isinstance(alpha, bool):
        return Fraction(alpha)
    if isinstance(alpha, str):
        try:
            return Fraction(alpha.strip())
        except ValueError:
            return None
    return None


@dataclass
class DiscrepancySeries:
    alpha: float
    x0: float
    y0: int
    steps: int
    y_values: np.ndarray
    y_min: int
    y_max: int
    zero_crossings: int
    crossing_indices: list = field(default_factory=list)
    decimation: int = 1
    exact: bool = False
    x_final: float = 0.0
    singular_hits: list = field(default_factory=list)

    @property
    def y_range(self) -> int:
        return self.y_max - self.y_min


@njit(cache=True)
def _ek_float(x, y, a, steps, dec, spol, ys, cross, hits):
    ys[0] = y
    rec = 1
    y0 = y
    ymin = y
    ymax = y
    nc = 0
    nh = 0
    for k in range(1, steps + 1):
        nx, _, ny, st = _az_step(x, 0.0, y, a, 0.0, 0.0, 0, True, 1.0, 0, spol, 0, False)
        if st == SINGULAR:
            return k - 1, rec, ymin, ymax, nc, nh, x, y, SINGULAR
        if st == SINGULAR_RESOLVED:
            if nh < hits.shape[0]:
                hits[nh] = k
            nh += 1
        x = nx
        y = ny
        if y < ymin:
            ymin = y
        if y > ymax:
            ymax = y
        if y == y0:
            if nc < cross.shape[0]:
                cross[nc] = k
            nc += 1
        if k % dec == 0:
            ys[rec] = y
            rec += 1
    return steps, rec, ymin, ymax, nc, nh, x, y, OK


@njit(cache=True)
def _ek_exact(p, a, D, y, steps, dec, spol, ys, cross, hits):
    # x = p / D, alpha = a / D, both integers in [0, D)
    ys[0] = y
    rec = 1
    y0 = y
    ymin = y
    ymax = y
    nc = 0
    nh = 0
    half2 = D  # 2 p == D  <=>  x == 1/2
    for k in range(1, steps + 1):
        p = (p + a) % D
        if p == 0 or 2 * p == half2:
            if spol == 0:
                return k - 1, rec, ymin, ymax, nc, nh, p, y, SINGULAR
            s = 1 if spol == 1 else -1
            if nh < hits.shape[0]:
                hits[nh] = k
            nh += 1
        else:
            s = 1 if 2 * p > D else -1
        y += s
        if y < ymin:
            ymin = y
        if y > ymax:
            ymax = y
        if y == y0:
            if nc < cross.shape[0]:
                cross[nc] = k
            nc += 1
        if k % dec == 0:
            ys[rec] = y
            rec += 1
    return steps, rec, ymin, ymax, nc, nh, p, y, OK


def ek_orbit(alpha, x0, y0: int = 0, steps: int = 1000, decimation: int = 1,
             singular_policy=SingularPolicy.HALT) -> DiscrepancySeries:
    """Orbit of the zero-twist map from ``(x0, y0)``.

    Exact integer arithmetic is used when ``alpha`` is an exact rational; the
    start ``x0`` is then taken exactly as given (a float contributes its
    binary value).
    """
    if steps < 0 or decimation < 1:
        raise ValueError("need steps >= 0 and decimation >= 1")
    if int(y0) != y0:
        raise DomainError("y0 must be an integer")
    spol = int(SingularPolicy(singular_policy))
    q = as_rational(alpha)
    cap = steps // decimation + 1
    ys = np.empty(cap, dtype=np.int64)
    cross = np.empty(MAX_CROSSINGS_KEPT, dtype=np.int64)
    hits = np.empty(1024, dtype=np.int64)
    if q is not None:
        if q <= 0:
            raise DomainError("alpha must be positive")
        xq = Fraction(x0) % 1
        D = math.lcm(q.denominator, xq.denominator)
        if D > 2**62:
            raise DomainError("common denominator too large for exact iteration")
        a = (q.numerator * (D // q.denominator)) % D
        p0 = xq.numerator * (D // xq.denominator)
        done, rec, ymin, ymax, nc, nh, pf, yf, st = _ek_exact(
            p0, a, D, int(y0), int(steps), int(decimation), spol, ys, cross, hits)
        a_val, x_final = float(q), float(Fraction(int(pf), D))
    else:
        a_val = float(MapParams(alpha).alpha) if not isinstance(alpha, float) else alpha
        if not a_val > 0:
            raise DomainError("alpha must be positive")
        x = float(x0) % 1.0
        ysf = np.empty(cap)
        done, rec, ymin, ymax, nc, nh, x_final, yf, st = _ek_float(
            x, float(y0), a_val, int(steps), int(decimation), spol, ysf, cross, hits)
        ys = ysf[:rec].astype(np.int64)
    series = DiscrepancySeries(
        alpha=a_val, x0=float(x0), y0=int(y0), steps=int(done), y_values=None,
        y_min=int(ymin), y_max=int(ymax), zero_crossings=int(nc),
        crossing_indices=cross[: min(nc, MAX_CROSSINGS_KEPT)].tolist(), decimation=decimation,
        exact=q is not None, x_final=float(x_final),
        singular_hits=hits[: min(nh, hits.shape[0])].tolist(),
    )
    series.y_values = ys[:rec].copy()
    if st == SINGULAR:
        exc = SingularHit(f"zero-twist orbit hit a discontinuity at step {done + 1}", step=done + 1)
        exc.series = series
        raise exc
    return series


@dataclass
class PeriodScan:
    alpha: float
    grid: int
    period: int
    checked: int
    singular_skipped: int
    failures: list

    @property
    def ok(self) -> bool:
        return not self.failures


def period_scan_detail(alpha, grid: int = 100, period: int = 2) -> PeriodScan:
    """Check that every grid point ``k/grid`` returns to itself after ``period`` steps.

    Points whose orbit meets a discontinuity are skipped and counted.
    """
    if grid < 2:
        raise DomainError("grid must be at least 2")
    q = as_rational(alpha)
    checked = skipped = 0
    failures = []
    for k in range(grid):
        x0 = Fraction(k, grid) if q is not None else k / grid
        try:
            s = ek_orbit(q if q is not None else alpha, x0, 0, period)
        except SingularHit:
            skipped += 1
            continue
        checked += 1
        back = _exact_final(q, x0, period) == x0 if q is not None else s.x_final == x0
        if not (back and s.y_values[-1] == 0):
            failures.append(k)
    return PeriodScan(float(q) if q is not None else float(alpha), grid, period, checked, skipped, failures)


def _exact_final(q: Fraction, x0: Fraction, steps: int) -> Fraction:
    return (x0 + steps * q) % 1


def period_scan(alpha, grid: int = 100) -> bool:
    """True iff every non-singular grid point has period exactly 2 (position and counter)."""
    return period_scan_detail(alpha, grid, 2).ok


@dataclass
class RationalDrift:
    alpha: Fraction
    period: int
    increments: list

    @property
    def constant(self) -> bool:
        return len(set(self.increments)) == 1

    @property
    def drift(self) -> int:
        return self.increments[0]


def rational_drift(alpha, x0) -> RationalDrift:
    """Counter change over one full period from each point of a rational orbit."""
    q = as_rational(alpha)
    if q is None:
        raise DomainError("rational drift needs an exact rational alpha")
    x = Fraction(x0) % 1
    period = q.denominator
    incs = []
    for j in range(period):
        start = (x + j * q) % 1
        s = ek_orbit(q, start, 0, period)
        incs.append(int(s.y_values[-1]))
    return RationalDrift(q, period, incs)
