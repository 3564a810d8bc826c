"""First return of the pinball map to its fundamental domain.

The fundamental domain is the strip ``0 < phi < alpha/(I - 1)`` between
the discontinuity line ``phi = 0`` and its image.  Starting there, an orbit
climbs through ``(0, 1)`` gaining one unit of action per step, crosses
``phi = 1``, descends through ``(1, 2)`` and wraps past 2 straight back
into the strip.  Bookkeeping per excursion:

``up_steps``
    landings in ``(0, 1)`` before the crossing (the ``n + 1`` terms of S1)
``down_steps``
    landings in ``(1, 2)`` after the crossing step (the ``n' + 1`` terms of S2)

The crossing step itself and the final wrap are not counted in either, so
``total_steps = up_steps + down_steps`` and the map is applied
``total_steps + 2`` times.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from numba import njit

from .core import (
    BUDGET,
    DOMAIN,
    OK,
    SINGULAR,
    CylState,
    MapParams,
    SignVariant,
    _increment,
)
from .errors import BudgetExceeded, DomainError, SingularHit
from .numerics import NumericPolicy, dd_add, dd_add_d, dd_cmp_d

# excursion left the expected up/cross/down/wrap pattern
_GEOMETRY = 5


class ReturnClass(enum.IntEnum):
    MINUS = -1
    ZERO = 0
    PLUS = 1


def i_min(alpha: float) -> int:
    """Smallest action accepted by the return-map analysis."""
    return max(3, math.ceil(2 * alpha) + 2)


def fiber_width(params: MapParams, action: float) -> float:
    return params.alpha / (action - 1.0)


def _require_pinball(params):
    if not params.is_pinball:
        raise DomainError("return-map analysis needs the pinball map (z = -1, circle_len = 2)")
    if params.sign_variant != SignVariant.PINBALL_PROOFS:
        raise DomainError("return-map analysis assumes gain on (0, 1)")


def in_fundamental_domain(params: MapParams, s: CylState) -> bool:
    if s.action <= 1:
        raise DomainError(f"fundamental domain undefined for action {s.action!r} <= 1")
    w = fiber_width(params, s.action)
    return (s.angle > 0 or (s.angle == 0 and s.angle_lo > 0)) and (
        s.angle < w or (s.angle == w and s.angle_lo < 0)
    )


def rescale(params: MapParams, s: CylState) -> float:
    """Rescaled angle ``(I - 1) * phi / alpha`` in ``[0, 1]``."""
    if s.action <= 1:
        raise DomainError(f"cannot rescale at action {s.action!r}")
    w = fiber_width(params, s.action)
    if not (0.0 <= s.angle <= w):
        raise DomainError(f"angle {s.angle!r} outside the fundamental domain at action {s.action!r}")
    return (s.action - 1.0) * (s.angle + s.angle_lo) / params.alpha


@njit(cache=True)
def _nadd(s, c, x):
    t = s + x
    if abs(s) >= abs(x):
        c += (s - t) + x
    else:
        c += (x - t) + s
    return t, c


@njit(cache=True)
def _first_return_kernel(hi, lo, I, a_hi, a_lo, npol, budget):
    x_hi = hi
    x_lo = lo
    J = I
    up = 0
    down = 0
    crossed = False
    s1 = 0.0
    c1 = 0.0
    s2 = 0.0
    c2 = 0.0
    ds = 0.0
    cds = 0.0
    d1 = np.nan
    d2 = np.nan
    steps = 0
    while steps < budget:
        inc_hi, inc_lo, ok = _increment(J, a_hi, a_lo, -1.0, -1, True, npol)
        if not ok or J <= 0.0:
            return x_hi, x_lo, J, up, down, s1 + c1, s2 + c2, ds + cds, d1, d2, steps, DOMAIN
        if npol == 0:
            nh, nl = x_hi + inc_hi, 0.0
        elif npol == 1:
            nh, nl = dd_add_d(x_hi, x_lo, inc_hi)
        else:
            nh, nl = dd_add(x_hi, x_lo, inc_hi, inc_lo)
        steps += 1
        if dd_cmp_d(nh, nl, 2.0) >= 0:
            if npol == 0:
                nh = nh - 2.0
            else:
                nh, nl = dd_add_d(nh, nl, -2.0)
            if nh == 0.0 and nl == 0.0:
                return nh, nl, J, up, down, s1 + c1, s2 + c2, ds + cds, d1, d2, steps, SINGULAR
            if not crossed:
                return nh, nl, J, up, down, s1 + c1, s2 + c2, ds + cds, d1, d2, steps, 5
            J += 1.0
            return nh, nl, J, up, down, s1 + c1, s2 + c2, ds + cds, d1, d2, steps, OK
        c = dd_cmp_d(nh, nl, 1.0)
        if c == 0:
            return nh, nl, J, up, down, s1 + c1, s2 + c2, ds + cds, d1, d2, steps, SINGULAR
        if c < 0:
            if crossed:
                return nh, nl, J, up, down, s1 + c1, s2 + c2, ds + cds, d1, d2, steps, 5
            up += 1
            s1, c1 = _nadd(s1, c1, 1.0 / J)
            ds, cds = _nadd(ds, cds, -1.0 / J)
            J += 1.0
        elif not crossed:
            crossed = True
            d1 = (1.0 - x_hi) - x_lo
            d2 = (nh - 1.0) + nl
            J -= 1.0
        else:
            down += 1
            s2, c2 = _nadd(s2, c2, 1.0 / J)
            ds, cds = _nadd(ds, cds, 1.0 / J)
            J -= 1.0
        x_hi = nh
        x_lo = nl
    return x_hi, x_lo, J, up, down, s1 + c1, s2 + c2, ds + cds, d1, d2, steps, BUDGET


@njit(cache=True)
def _batch_kernel(phis, I, a_hi, a_lo, npol, budget, d_out, phi_out, up_out, down_out, status_out):
    for i in range(phis.shape[0]):
        r = _first_return_kernel(phis[i], 0.0, I, a_hi, a_lo, npol, budget)
        d_out[i] = r[2] - I
        phi_out[i] = r[0] + r[1]
        up_out[i] = r[3]
        down_out[i] = r[4]
        status_out[i] = r[11]


@dataclass
class ReturnEvent:
    phi_in: float
    I_in: float
    phi_tilde_in: float
    up_steps: int
    down_steps: int
    n: int
    n_prime: int
    S1: float
    S2: float
    delta_S: float
    delta_S_closed: float
    delta1: float
    delta2: float
    phi_out: float
    I_out: float
    phi_tilde_out: float
    classification: ReturnClass
    total_steps: int
    map_steps: int
    phi_out_lo: float = 0.0

    @property
    def delta_I(self) -> int:
        return int(self.I_out - self.I_in)

    @property
    def state_out(self) -> CylState:
        return CylState(self.phi_out, self.I_out, self.phi_out_lo)

    def crossing_value(self, alpha: float) -> float:
        """``phi + 2*alpha*S1 + alpha/(I + n + 1)``; exceeds 2 exactly on gain returns."""
        return self.phi_in + 2.0 * alpha * self.S1 + alpha / (self.I_in + self.n + 1)


def return_budget(params: MapParams, action: float) -> int:
    return int(4 * params.mu * action + 64)


def _status_error(st, where, steps):
    if st == SINGULAR:
        return SingularHit(f"first return hit a discontinuity line ({where})", step=steps)
    if st == BUDGET:
        return BudgetExceeded(f"no return within the iteration budget ({where})")
    if st == _GEOMETRY:
        return DomainError(f"excursion left the single-wrap regime ({where})")
    return DomainError(f"map undefined along the excursion ({where})")


def first_return(params: MapParams, s: CylState, check_domain: bool = True) -> ReturnEvent:
    """Iterate the pinball map from ``s`` in the fundamental domain until it comes back."""
    _require_pinball(params)
    I = float(s.action)
    if I != math.floor(I):
        raise DomainError("return-map analysis uses integer actions")
    if I < i_min(params.alpha):
        raise DomainError(f"action {I:g} below the analysis floor {i_min(params.alpha)}")
    if check_domain and not in_fundamental_domain(params, s):
        raise DomainError(f"state {s} is not in the fundamental domain")
    budget = return_budget(params, I)
    x_hi, x_lo, J, up, down, S1, S2, dS, d1, d2, steps, st = _first_return_kernel(
        float(s.angle), float(s.angle_lo), I, params.alpha, params.alpha_lo,
        int(params.numeric_policy), budget,
    )
    if st != OK:
        raise _status_error(st, f"phi={s.angle!r}, I={I:g}", steps)
    dI = int(J - I)
    phi_in = s.angle + s.angle_lo
    phi_out = x_hi + x_lo
    return ReturnEvent(
        phi_in=phi_in,
        I_in=I,
        phi_tilde_in=(I - 1.0) * phi_in / params.alpha,
        up_steps=int(up),
        down_steps=int(down),
        n=int(up) - 1,
        n_prime=int(down) - 1,
        S1=S1,
        S2=S2,
        delta_S=dS,
        delta_S_closed=dS + 1.0 / (J - 1.0),
        delta1=d1,
        delta2=d2,
        phi_out=x_hi,
        phi_out_lo=x_lo,
        I_out=J,
        phi_tilde_out=(J - 1.0) * phi_out / params.alpha,
        classification=ReturnClass(int(np.sign(dI))),
        total_steps=int(up + down),
        map_steps=int(steps),
    )


def first_return_batch(params: MapParams, phis, action: float):
    """Classify many seeds on one fiber; returns ``(delta_I, phi_out, up, down)``.

    Seeds are plain doubles; singular or failed excursions raise.
    """
    _require_pinball(params)
    phis = np.ascontiguousarray(phis, dtype=np.float64)
    n = phis.shape[0]
    d = np.empty(n, dtype=np.int64)
    po = np.empty(n)
    up = np.empty(n, dtype=np.int64)
    dn = np.empty(n, dtype=np.int64)
    st = np.empty(n, dtype=np.int64)
    _batch_kernel(phis, float(action), params.alpha, params.alpha_lo, int(params.numeric_policy),
                  return_budget(params, action), d, po, up, dn, st)
    bad = np.nonzero(st != OK)[0]
    if bad.size:
        i = int(bad[0])
        raise _status_error(int(st[i]), f"seed #{i}, phi={phis[i]!r}, I={action:g}", None)
    return d, po, up, dn


# ---------------------------------------------------------------------------
# analytic fiber structure


def crossing_defects(params: MapParams, action: float, phi: float = 0.0):
    """Defects of the climb from ``phi`` across the line ``phi = 1``.

    Returns ``(n, delta1, delta2)`` with ``phi + alpha*S1 = 1 - delta1`` and
    ``phi + alpha*S1 + alpha/(I+n+1) = 1 + delta2``, where S1 has ``n + 1``
    terms.  Accumulated in double-double.
    """
    from .numerics import dd_div_d

    x_hi, x_lo = float(phi), 0.0
    J = float(action)
    k = 0
    while True:
        inc = dd_div_d(params.alpha, params.alpha_lo, J)
        nh, nl = dd_add(x_hi, x_lo, inc[0], inc[1])
        if dd_cmp_d(nh, nl, 1.0) >= 0:
            d1 = (1.0 - x_hi) - x_lo
            d2 = (nh - 1.0) + nl
            return k - 1, d1, d2
        x_hi, x_lo = nh, nl
        J += 1.0
        k += 1


@dataclass
class FiberAnalytics:
    """Exact piecewise description of one fiber of the fundamental domain.

    On the fiber the climb count ``n`` is piecewise constant; ``segments``
    lists the left edges ``b_0 = 0 < b_1 < ...`` where it drops by one.
    """

    I: float
    alpha: float
    width: float
    n0: int
    delta1_0: float
    delta2_0: float
    delta1_00: float
    delta2_00: float
    i_plus: tuple
    i_minus: tuple
    i_zero: list
    segments: list
    i_minus_normalized: bool

    def segment_index(self, phi: float) -> int:
        k = 0
        for j, b in enumerate(self.segments):
            if phi >= b:
                k = j
        return k


def _clip(iv, w):
    lo, hi = max(0.0, iv[0]), min(w, iv[1])
    return (lo, hi) if hi > lo else (lo, lo)


def fiber_analytics(params: MapParams, action: float) -> FiberAnalytics:
    """Positive/negative intervals from the climbs through both fiber ends."""
    _require_pinball(params)
    I = float(action)
    w = fiber_width(params, I)
    n0, d1, d2 = crossing_defects(params, I, 0.0)
    _, e1, e2 = crossing_defects(params, I, w)

    i_plus = (0.0, d1) if d2 > d1 else (d1 - d2, d1)
    if e1 > e2:
        i_minus = (w - e2, w)
        normalized = False
    else:
        printed = (w - (e2 - e1), w - e2)
        i_minus = (min(printed), max(printed))
        normalized = printed[0] > printed[1]
    i_plus = _clip(i_plus, w)
    i_minus = _clip(i_minus, w)

    segments = [0.0]
    b = d1
    k = 1
    while b < w:
        segments.append(b)
        b += params.alpha / (I + n0 + 1 - k)
        k += 1

    cuts = sorted([i_plus, i_minus])
    zero = []
    left = 0.0
    for lo, hi in cuts:
        if lo > left:
            zero.append((left, lo))
        left = max(left, hi)
    if left < w:
        zero.append((left, w))

    return FiberAnalytics(I, params.alpha, w, n0, d1, d2, e1, e2, i_plus, i_minus, zero, segments, normalized)


# ---------------------------------------------------------------------------
# brute-force fiber scan


@dataclass
class IntervalReport:
    I: float
    alpha: float
    mu: float
    width: float
    i_plus: tuple
    i_minus: tuple
    i_zero_components: list
    delta1_0: float
    delta2_0: float
    delta1_00: float
    delta2_00: float
    bruteforce_grid: int
    bruteforce_i_plus: Optional[tuple]
    bruteforce_i_minus: Optional[tuple]
    plus_runs: int
    minus_runs: int
    edge_band: list = field(default_factory=list)
    leftmost_class: int = 0
    i_minus_normalized: bool = False

    @property
    def cell(self) -> float:
        return self.width / self.bruteforce_grid

    def endpoint_errors(self) -> dict:
        """Analytic minus brute-force endpoints, in grid cells."""
        out = {}
        for name, an, bf in (("plus", self.i_plus, self.bruteforce_i_plus),
                             ("minus", self.i_minus, self.bruteforce_i_minus)):
            if bf is None:
                out[name] = (math.inf, math.inf)
            else:
                out[name] = ((an[0] - bf[0]) / self.cell, (an[1] - bf[1]) / self.cell)
        return out

    @property
    def analytic_mismatch(self) -> bool:
        return any(abs(e) > 2 for pair in self.endpoint_errors().values() for e in pair)

    def measure_gap_cells(self) -> float:
        """Brute-force ``|I+| - |I-|`` in grid cells."""
        if self.bruteforce_i_plus is None or self.bruteforce_i_minus is None:
            return math.inf
        mp = self.bruteforce_i_plus[1] - self.bruteforce_i_plus[0]
        mm = self.bruteforce_i_minus[1] - self.bruteforce_i_minus[0]
        return (mp - mm) / self.cell

    @property
    def single_intervals(self) -> bool:
        return self.plus_runs == 1 and self.minus_runs == 1


def _runs(mask):
    idx = np.flatnonzero(mask)
    if idx.size == 0:
        return []
    breaks = np.flatnonzero(np.diff(idx) > 1)
    starts = np.concatenate(([idx[0]], idx[breaks + 1]))
    ends = np.concatenate((idx[breaks], [idx[-1]]))
    return list(zip(starts.tolist(), ends.tolist()))


def edge_band_cells(cls: np.ndarray) -> np.ndarray:
    """Indices of cells whose class differs from both neighbours."""
    if cls.size < 3:
        return np.empty(0, dtype=np.int64)
    inner = (cls[1:-1] != cls[:-2]) & (cls[1:-1] != cls[2:])
    return np.flatnonzero(inner) + 1


def classify_fiber(params: MapParams, I: int, grid: int = 10**5) -> IntervalReport:
    """Brute-force and analytic decomposition of the fiber at action ``I``."""
    _require_pinball(params)
    if I < i_min(params.alpha):
        raise DomainError(f"action {I} below the analysis floor {i_min(params.alpha)}")
    if grid < 1:
        raise ValueError("grid must be positive")
    an = fiber_analytics(params, I)
    w = an.width
    h = w / grid
    phis = (np.arange(grid) + 0.5) * h
    cls, _, _, _ = first_return_batch(params, phis, float(I))

    band = edge_band_cells(cls)
    keep = np.ones(grid, dtype=bool)
    keep[band] = False

    def bf(c):
        runs = _runs((cls == c) & keep)
        if not runs:
            return None, 0
        lo = min(r[0] for r in runs)
        hi = max(r[1] for r in runs)
        return (lo * h, (hi + 1) * h), len(runs)

    bf_plus, plus_runs = bf(1)
    bf_minus, minus_runs = bf(-1)
    return IntervalReport(
        I=float(I), alpha=params.alpha, mu=params.mu, width=w,
        i_plus=an.i_plus, i_minus=an.i_minus, i_zero_components=an.i_zero,
        delta1_0=an.delta1_0, delta2_0=an.delta2_0,
        delta1_00=an.delta1_00, delta2_00=an.delta2_00,
        bruteforce_grid=grid, bruteforce_i_plus=bf_plus, bruteforce_i_minus=bf_minus,
        plus_runs=plus_runs, minus_runs=minus_runs,
        edge_band=band.tolist(), leftmost_class=int(cls[0]),
        i_minus_normalized=an.i_minus_normalized,
    )


def rigidity_check(params: MapParams, I: int, samples: int = 100, report: IntervalReport | None = None):
    """True iff every sampled point of the positive interval climbs the same number of steps."""
    if samples <= 0:
        return True
    an = fiber_analytics(params, I)
    lo, hi = an.i_plus
    if hi <= lo:
        return True
    phis = lo + (np.arange(samples) + 0.5) / samples * (hi - lo)
    d, _, up, _ = first_return_batch(params, phis, float(I))
    return bool(np.all(up == up[0]) and np.all(d == 1))


def symmetric_seed(params: MapParams, I: int, iters: int = 200) -> float:
    """Seed whose crossing of ``phi = 1`` is symmetric (``delta1 == delta2``).

    Found by bisection on the second climb segment, where ``delta2 - delta1``
    increases through zero.
    """
    an = fiber_analytics(params, I)
    if len(an.segments) < 2:
        raise DomainError("fiber has no second climb segment")
    lo = an.segments[1]
    hi = an.segments[2] if len(an.segments) > 2 else an.width

    def gap(phi):
        _, d1, d2 = crossing_defects(params, I, phi)
        return d2 - d1

    lo = math.nextafter(lo, hi)
    hi = math.nextafter(hi, lo)
    if gap(lo) > 0 or gap(hi) < 0:
        raise DomainError("no symmetric crossing on the second segment")
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if gap(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
