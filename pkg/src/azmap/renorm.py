"""Renormalized first-return dynamics in the rescaled angle.

With ``mu = exp(1/alpha)`` an excursion from the fiber at action ``N``
climbs about ``(mu - 1) N`` steps, and on the rescaled angle
``t = (N - 1) phi / alpha`` the return map is, to leading order, a rotation
whose amount depends only on which piece of the fiber ``t`` lies in.  This
module evaluates those leading-order rotations and measures how far the
true return map is from them.

Two sets of rotation formulas are available for the non-gain/non-loss part
of the fiber: ``"printed"`` (as usually stated) and ``"derived"`` (one
formula per climb segment, rederived and checked against brute force).
The gain and loss formulas are shared.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .core import MapParams
from .errors import DomainError, NonIntegerPrediction
from .returnmap import (
    _require_pinball,
    fiber_analytics,
    first_return_batch,
    i_min,
)

INTEGRALITY_BAND = 1e-6


class MuRegime(enum.Enum):
    LOW = "low"  # 1 < mu < 3
    HIGH = "high"  # mu >= 3


class Case(enum.Enum):
    PLUS = "plus"
    MINUS = "minus"
    ZERO_MIDDLE = "zero_middle"
    ZERO_LEFT = "zero_left"
    ZERO_RIGHT = "zero_right"


@dataclass(frozen=True)
class RenormContext:
    alpha: float
    mu: float
    mu_exact: Optional[Fraction] = None

    @property
    def regime(self) -> MuRegime:
        return MuRegime.LOW if self.mu < 3 else MuRegime.HIGH

    @property
    def strip0(self) -> tuple:
        return (0.0, 1.0 / self.mu)

    @property
    def strip1(self) -> tuple:
        return (1.0 - 1.0 / self.mu, 1.0)

    def chi0(self, t: float) -> int:
        return int(0.0 <= t <= 1.0 / self.mu)

    def chi1(self, t: float) -> int:
        return int(1.0 - 1.0 / self.mu <= t <= 1.0)

    def require_low(self):
        if self.regime is not MuRegime.LOW:
            raise DomainError(f"mu = {self.mu:g} is outside the range (1, 3) the case formulas cover")

    @classmethod
    def from_params(cls, params: MapParams) -> "RenormContext":
        return cls(params.alpha, params.mu, params.mu_exact)


def mu_of_alpha(alpha) -> RenormContext:
    """``mu = exp(1/alpha)`` with its regime; accepts floats or expressions like ``"1/ln(2)"``."""
    if isinstance(alpha, MapParams):
        return RenormContext.from_params(alpha)
    if isinstance(alpha, (int, float)) and not alpha > 0:
        raise DomainError(f"alpha must be positive, got {alpha!r}")
    try:
        p = MapParams(alpha)
    except ValueError as exc:
        raise DomainError(str(exc)) from exc
    return RenormContext.from_params(p)


def _frac_mu_x(mu, x, mu_exact=None):
    if mu_exact is not None and float(x).is_integer():
        q = mu_exact * int(x)
        return float(q - math.floor(q))
    v = mu * x
    return v - math.floor(v)


def h_chi(mu: float, x: float, mu_exact=None) -> int:
    """The jump part of :func:`h_mu`: ``1`` iff ``mu + 2 frac(mu x) - 3 >= 0``."""
    f = _frac_mu_x(mu, x, mu_exact)
    return int(mu + 2.0 * f - 3.0 >= 0.0)


def h_mu(mu: float, x: float, mu_exact=None) -> float:
    """Saw-tooth correction ``chi(mu + 2 frac(mu x) - 3 >= 0) - frac(mu x)``."""
    if not mu > 1:
        raise DomainError("h_mu needs mu > 1")
    f = _frac_mu_x(mu, x, mu_exact)
    return float(int(mu + 2.0 * f - 3.0 >= 0.0)) - f


def _ctx_h(ctx: RenormContext, x):
    return h_mu(ctx.mu, x, ctx.mu_exact)


def _high_shift(mu: float) -> int:
    return math.floor((mu - 1) / 2) if mu >= 3 else 0


def predicted_n_value(ctx: RenormContext, N: int) -> float:
    """The unrounded climb count ``mu (N-1) - N + H(N-1)``.

    For ``mu >= 3`` the count gains ``k = floor((mu-1)/2)`` and the jump
    part of ``H`` is evaluated with the reduced multiplier ``mu - 2k``
    (which lies in ``[1, 3)``); for ``mu < 3`` this is the plain formula.
    """
    k = _high_shift(ctx.mu)
    if ctx.mu_exact is not None:
        q = ctx.mu_exact * (N - 1)
        f = q - math.floor(q)
        chi = int(ctx.mu_exact - 2 * k + 2 * f - 3 >= 0)
        return float(q - N + chi - f + k)
    v = ctx.mu * (N - 1)
    f = v - math.floor(v)
    chi = int(ctx.mu - 2 * k + 2.0 * f - 3.0 >= 0.0)
    return v - N + chi - f + k


def round_prediction(v: float, N: int | None = None) -> int:
    """Nearest integer to ``v``; raises if ``v`` is outside the integrality band."""
    r = round(v)
    if abs(v - r) > INTEGRALITY_BAND:
        raise NonIntegerPrediction(f"predicted climb count {v!r} is not integral (N={N})", value=v)
    return int(r)


def predicted_n(ctx: RenormContext, N: int) -> int:
    """Number of gain steps minus one for a climb from the left part of the fiber at ``N``."""
    if N < i_min(ctx.alpha):
        raise DomainError(f"N = {N} below the analysis floor {i_min(ctx.alpha)}")
    return round_prediction(predicted_n_value(ctx, N), N)


@dataclass(frozen=True)
class CasePrediction:
    case_id: Case
    phi_tilde_next: float
    increment: float


def case_increment(ctx: RenormContext, N: int, case_id: Case, formulas: str = "printed", segment: int = 0) -> float:
    """Rotation added to the rescaled angle by one return, before reduction mod 1.

    ``segment`` (derived formulas only) is how many fewer gain steps the
    point climbs than the left end of the fiber.
    """
    case_id = Case(case_id)
    m = ctx.mu
    if case_id is Case.PLUS:
        return 2.0 / m * (1.0 + _ctx_h(ctx, N - 1)) - 1.0
    if case_id is Case.MINUS:
        return 2.0 / m * (1.0 + _ctx_h(ctx, N - 2)) - 1.0
    if formulas == "derived":
        return 2.0 / m * (1.0 + _ctx_h(ctx, N - 1) - segment)
    if formulas != "printed":
        raise ValueError(f"unknown formula set {formulas!r}")
    if case_id is Case.ZERO_MIDDLE:
        return 2.0 / m * (_ctx_h(ctx, N - 1) - 0.5) - 1.0
    if case_id is Case.ZERO_LEFT:
        return 2.0 / m * (_ctx_h(ctx, N - 1) + 0.5) - 1.0
    return 2.0 / m * (_ctx_h(ctx, N - 2) + 0.5) - 1.0


def predicted_return_cases(ctx: RenormContext, N: int, phi_tilde: float, case_id, formulas: str = "printed",
                           segment: int = 0) -> CasePrediction:
    ctx.require_low()
    if N < i_min(ctx.alpha):
        raise DomainError(f"N = {N} below the analysis floor {i_min(ctx.alpha)}")
    inc = case_increment(ctx, N, case_id, formulas, segment)
    nxt = (phi_tilde + inc) % 1.0
    if nxt >= 1.0:
        nxt = 0.0
    return CasePrediction(Case(case_id), nxt, inc)


def g_mu(ctx: RenormContext, N: int, phi_tilde: float, chi_plus: int, chi_minus: int) -> float:
    """The compact rotation amount ``g`` of the closed-form renormalized map."""
    c0 = ctx.chi0(phi_tilde)
    c1 = ctx.chi1(phi_tilde)
    return _ctx_h(ctx, N - 1 - c1) + 0.5 * (1 + chi_plus + chi_minus) - (c0 + c1)


def g_mu_form(ctx: RenormContext, N: int, phi_tilde: float, chi_plus: int, chi_minus: int) -> float:
    """``phi_tilde + (2/mu) g`` reduced mod 1."""
    ctx.require_low()
    v = (phi_tilde + 2.0 / ctx.mu * g_mu(ctx, N, phi_tilde, chi_plus, chi_minus)) % 1.0
    return 0.0 if v >= 1.0 else v


def s1_asymptotic(ctx: Optional[RenormContext], N: int, n: int) -> float:
    """Three-term expansion of ``sum(1/(N+k) for k in range(n+1))``."""
    if N < 2 or n < 0:
        raise DomainError("need N >= 2 and n >= 0")
    a, b = N + n, N - 1
    return math.log(a / b) + 0.5 * (1.0 / a - 1.0 / b) - (1.0 / (a * a) - 1.0 / (b * b)) / 12.0


def circle_distance(a, b):
    d = np.abs(np.asarray(a) - np.asarray(b)) % 1.0
    return np.minimum(d, 1.0 - d)


# ---------------------------------------------------------------------------
# error scan


@dataclass
class ScanRow:
    I: int
    max_abs_error: float
    case_breakdown: dict
    g_form_max_error: float = float("nan")


@dataclass
class ErrorScan:
    alpha: float
    mu: float
    formulas: str
    grid: int
    rows: list = field(default_factory=list)

    @property
    def slope(self) -> float:
        """Least-squares slope of log(max error) against log(I)."""
        pts = [(r.I, r.max_abs_error) for r in self.rows if r.max_abs_error > 0]
        if len(pts) < 2:
            return float("nan")
        x = np.log([p[0] for p in pts])
        y = np.log([p[1] for p in pts])
        return float(np.polyfit(x, y, 1)[0])

    @property
    def constants(self) -> list:
        """``I * max_error`` per row; roughly constant when the error is O(1/I)."""
        return [r.I * r.max_abs_error for r in self.rows]


def classify_cases(params: MapParams, I: int, phis, delta_I, up):
    """Case label and derived segment index for each seed, from its true return."""
    an = fiber_analytics(params, I)
    seg = an.n0 - (np.asarray(up) - 1)
    labels = []
    for phi, d in zip(phis, delta_I):
        if d > 0:
            labels.append(Case.PLUS)
        elif d < 0:
            labels.append(Case.MINUS)
        elif phi < an.i_plus[0]:
            labels.append(Case.ZERO_LEFT)
        elif phi > an.i_minus[1]:
            labels.append(Case.ZERO_RIGHT)
        else:
            labels.append(Case.ZERO_MIDDLE)
    return labels, seg


def renorm_error_scan(params: MapParams, I_list: Sequence[int], grid: int = 2000,
                      formulas: str = "derived") -> ErrorScan:
    """Compare true rescaled returns with the case predictions over each fiber.

    Seeds are the ``grid`` cell centres of ``[0, 1]`` in the rescaled angle.
    """
    _require_pinball(params)
    ctx = RenormContext.from_params(params)
    ctx.require_low()
    if grid < 1:
        raise ValueError("grid must be positive")
    scan = ErrorScan(params.alpha, ctx.mu, formulas, grid)
    t = (np.arange(grid) + 0.5) / grid
    for I in I_list:
        I = int(I)
        if I < i_min(params.alpha):
            raise DomainError(f"I = {I} below the analysis floor {i_min(params.alpha)}")
        w = params.alpha / (I - 1)
        phis = t * w
        d, phi_out, up, _ = first_return_batch(params, phis, float(I))
        t_out = (I + d - 1) * phi_out / params.alpha
        labels, seg = classify_cases(params, I, phis, d, up)
        pred = np.empty(grid)
        gpred = np.empty(grid)
        for i, c in enumerate(labels):
            pred[i] = (t[i] + case_increment(ctx, I, c, formulas, int(seg[i]))) % 1.0
            gpred[i] = g_mu_form(ctx, I, t[i], int(d[i] > 0), int(d[i] < 0))
        err = circle_distance(pred, t_out)
        breakdown = {}
        for c in Case:
            mask = np.array([lab is c for lab in labels])
            if mask.any():
                breakdown[c.value] = float(err[mask].max())
        scan.rows.append(ScanRow(I, float(err.max()), breakdown,
                                 float(circle_distance(gpred, t_out).max())))
    return scan
