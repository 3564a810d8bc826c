"""An explicit orbit of the pinball map whose action grows without bound.

For ``alpha = 1/ln(2m)`` the rescaled return map is, to leading order, the
identity on the gain interval, so the next-order drift decides whether a
seed keeps gaining.  Choosing the seed so that one return reproduces it
after rescaling to the new level gives an orbit that gains one unit of
action on every return.

Floating point can only certify a finite prefix of such an orbit;
:func:`verify_escape` reruns with more precise arithmetic until the
requested number of returns is all gains.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from numba import njit
from scipy.optimize import brentq

from .core import OK, CylState, MapParams
from .errors import DomainError
from .numerics import NumericPolicy
from .returnmap import (
    _first_return_kernel,
    _status_error,
    fiber_analytics,
    first_return,
    i_min,
)

CERTIFIED_RETURNS = 100
_UNIT = {0: 2.0**-53, 1: 2.0**-53, 2: 2.0**-104}


def second_order_drift(N: int) -> float:
    """Next-order shift of the rescaled angle per gain return at ``mu = 2``."""
    if N < 3:
        raise DomainError("drift needs N >= 3")
    return 1.0 / (8.0 * (N - 1)) - 1.0 / (4.0 * N - 2.0)


@dataclass(frozen=True)
class EscapeSeed:
    m: int
    alpha: float
    N0: int
    phi_tilde_0: float
    phi_0: float
    alpha_lo: float = 0.0
    closed_form: bool = True

    @property
    def mu(self) -> int:
        return 2 * self.m

    def params(self, policy=NumericPolicy.DOUBLE_DOUBLE) -> MapParams:
        return MapParams.pinball(f"1/ln({2 * self.m})", numeric_policy=policy)

    def shifted(self, d_phi_tilde: float) -> "EscapeSeed":
        """The same seed moved by ``d_phi_tilde`` in the rescaled angle."""
        t = self.phi_tilde_0 + d_phi_tilde
        return EscapeSeed(self.m, self.alpha, self.N0, t, self.alpha * t / (self.N0 - 1),
                          self.alpha_lo, False)


def _fixed_point_gap(params, N0, t):
    """Measured ``N0 phi'/alpha - t`` after one return from rescaled angle ``t``."""
    phi = params.alpha * t / (N0 - 1)
    ev = first_return(params, CylState(phi, N0))
    if ev.delta_I != 1:
        return math.nan
    return N0 * (ev.phi_out + ev.phi_out_lo) / params.alpha - t


def make_seed(m: int, N0: int) -> EscapeSeed:
    """Seed of the escaping orbit for ``alpha = 1/ln(2m)`` starting at action ``N0``.

    ``m = 1`` uses the closed form ``1/8 + 1/(8 (N0-1)(2 N0-1))``; larger
    ``m`` solve the rescaled fixed-point condition on measured returns over
    the gain interval (``closed_form=False``).
    """
    if int(m) != m or m < 1:
        raise DomainError(f"m must be a positive integer, got {m!r}")
    m = int(m)
    if N0 < 100:
        raise DomainError("N0 must be at least 100")
    params = MapParams.pinball(f"1/ln({2 * m})", numeric_policy=NumericPolicy.DOUBLE_DOUBLE)
    a = params.alpha
    if m == 1:
        t = 0.125 + 1.0 / (8.0 * (N0 - 1) * (2 * N0 - 1))
        return EscapeSeed(1, a, N0, t, a * t / (N0 - 1), params.alpha_lo, True)

    an = fiber_analytics(params, N0)
    lo, hi = (x * (N0 - 1) / a for x in an.i_plus)
    hi = min(hi, 1.0 / params.mu)
    ts = np.linspace(lo, hi, 66)[1:-1]
    gaps = [_fixed_point_gap(params, N0, t) for t in ts]
    for (t0, g0), (t1, g1) in zip(zip(ts, gaps), zip(ts[1:], gaps[1:])):
        if np.isfinite(g0) and np.isfinite(g1) and g0 * g1 <= 0:
            t = brentq(lambda u: _fixed_point_gap(params, N0, u), t0, t1, xtol=1e-15)
            return EscapeSeed(m, a, N0, t, a * t / (N0 - 1), params.alpha_lo, False)
    raise DomainError(f"no rescaled fixed point found on the gain interval for m={m}, N0={N0}")


@dataclass
class GrowthReport:
    seed: EscapeSeed
    returns_requested: int
    returns_completed: int
    plus_count: int
    zero_count: int
    minus_count: int
    longest_monotone_prefix: int
    final_action: float
    numeric_policy: NumericPolicy
    track_index: np.ndarray
    track_action: np.ndarray
    phi_tilde_track: np.ndarray
    crossing_values: np.ndarray
    rounding_bound: float
    precision_warning: bool
    escalations: list = field(default_factory=list)

    @property
    def certificate_ok(self) -> bool:
        """Gain certificate (crossing value above 2) on every checked return."""
        return bool(np.all(self.crossing_values > 2.0))

    @property
    def phi_tilde_range(self) -> tuple:
        if self.phi_tilde_track.size == 0:
            return (self.seed.phi_tilde_0, self.seed.phi_tilde_0)
        return float(self.phi_tilde_track.min()), float(self.phi_tilde_track.max())

    @property
    def all_gains(self) -> bool:
        return self.longest_monotone_prefix == self.returns_requested


@njit(cache=True)
def _escape_kernel(hi, lo, I, a_hi, a_lo, npol, mu, returns, dec, n_cert,
                   dI, tr_idx, tr_I, tr_t, cross):
    J = I
    steps_total = 0
    rec = 0
    for r in range(returns):
        if J < 3.0:
            return r, hi, lo, J, steps_total, rec, 2
        budget = int(4.0 * mu * J + 64.0)
        out = _first_return_kernel(hi, lo, J, a_hi, a_lo, npol, budget)
        st = out[11]
        if st != 0:
            return r, hi, lo, J, steps_total, rec, st
        if r < n_cert:
            cross[r] = (hi + lo) + 2.0 * a_hi * out[5] + a_hi / (J + out[3])
        hi = out[0]
        lo = out[1]
        dI[r] = int(out[2] - J)
        J = out[2]
        steps_total += out[10]
        if (r + 1) % dec == 0:
            tr_idx[rec] = r + 1
            tr_I[rec] = J
            tr_t[rec] = (J - 1.0) * (hi + lo) / a_hi
            rec += 1
    return returns, hi, lo, J, steps_total, rec, 0


def run_escape(seed: EscapeSeed, returns: int, policy=NumericPolicy.DOUBLE_DOUBLE,
               decimation: int = 1) -> GrowthReport:
    """Iterate the first-return map ``returns`` times from the seed."""
    if returns < 0 or decimation < 1:
        raise ValueError("need returns >= 0 and decimation >= 1")
    policy = NumericPolicy(policy)
    params = seed.params(policy)
    dI = np.zeros(returns, dtype=np.int64)
    cap = returns // decimation
    tr_idx = np.zeros(cap, dtype=np.int64)
    tr_I = np.zeros(cap)
    tr_t = np.zeros(cap)
    n_cert = min(CERTIFIED_RETURNS, returns)
    cross = np.zeros(n_cert)
    done, hi, lo, J, steps, rec, st = _escape_kernel(
        float(seed.phi_0), 0.0, float(seed.N0), params.alpha, params.alpha_lo, int(policy),
        float(params.mu), int(returns), int(decimation), n_cert, dI, tr_idx, tr_I, tr_t, cross,
    )
    dI = dI[:done]
    nonplus = np.flatnonzero(dI != 1)
    prefix = int(nonplus[0]) if nonplus.size else int(done)
    bound = _UNIT[int(policy)] * 2.0 * (steps if policy != NumericPolicy.COMPENSATED else 2 * done)
    width = params.alpha / (J - 1.0) if J > 1 else math.inf
    warn = bound > 1e-3 * width
    if warn:
        warnings.warn(f"accumulated angle rounding (~{bound:.2e}) exceeds 1e-3 of the fiber width",
                      RuntimeWarning, stacklevel=2)
    report = GrowthReport(
        seed=seed,
        returns_requested=int(returns),
        returns_completed=int(done),
        plus_count=int(np.count_nonzero(dI == 1)),
        zero_count=int(np.count_nonzero(dI == 0)),
        minus_count=int(np.count_nonzero(dI == -1)),
        longest_monotone_prefix=prefix,
        final_action=float(J),
        numeric_policy=policy,
        track_index=tr_idx[:rec].copy(),
        track_action=tr_I[:rec].copy(),
        phi_tilde_track=tr_t[:rec].copy(),
        crossing_values=cross[: min(n_cert, done)].copy(),
        rounding_bound=float(bound),
        precision_warning=bool(warn),
    )
    if st != OK:
        where = f"return #{done}, I={J:g}"
        exc = _status_error(st, where, None) if st != 2 else DomainError(f"orbit fell below the analysis floor ({where})")
        exc.report = report
        raise exc
    return report


_LADDER = (NumericPolicy.DOUBLE, NumericPolicy.COMPENSATED, NumericPolicy.DOUBLE_DOUBLE)


def verify_escape(seed: EscapeSeed, returns: int, decimation: int = 1) -> GrowthReport:
    """Run with increasing precision until all ``returns`` returns gain action.

    Returns the report of the first policy whose monotone prefix covers the
    horizon (or the most precise one); ``escalations`` lists each attempt as
    ``(policy name, prefix)``.
    """
    tried = []
    report = None
    for pol in _LADDER:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            report = run_escape(seed, returns, pol, decimation)
        tried.append((pol.name, report.longest_monotone_prefix))
        if report.all_gains:
            break
    report.escalations = tried
    return report
