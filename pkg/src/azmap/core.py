"""The alpha-z family of discontinuous twist maps on the cylinder.

One step of the family reads::

    angle'  = (angle + alpha * action**z) mod circle_len
    action' = action +/- 1      (sign by which half-circle angle' lands in)

Special members: ``z = -1`` on the circle of length 2 is the pinball map,
``z = 0`` the Erdos-Kesten skew product, ``z = 1/2`` on length 2 the
switching-potential map.  The saw-tooth Fermi-Ulam map is not of this form
and has its own step.

The arithmetic lives in numba kernels that return status codes; the public
wrappers turn codes into exceptions.  The angle is carried as a ``(hi, lo)``
pair so the compensated and double-double policies can share the kernels
with the plain double one (``lo`` stays 0 there).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np
from numba import njit

from .alpha import Alpha, parse_alpha
from .errors import DomainError, SingularHit
from .numerics import (
    NumericPolicy,
    dd_add,
    dd_add_d,
    dd_cmp_d,
    dd_div_d,
    dd_mul_d,
    two_sum,
)

# kernel status codes
OK = 0
SINGULAR = 1
DOMAIN = 2
SINGULAR_RESOLVED = 3
BUDGET = 4

_BELOW = {1.0: float(np.nextafter(1.0, 0.0)), 2.0: float(np.nextafter(2.0, 0.0))}


class SignVariant(enum.IntEnum):
    # gain when the new angle lies in the upper half (circle_len/2, circle_len)
    AZ_HALF = 0
    # gain when the new angle lies in the lower half (0, circle_len/2)
    PINBALL_PROOFS = 1


class SingularPolicy(enum.IntEnum):
    HALT = 0
    TREAT_AS_PLUS = 1
    TREAT_AS_MINUS = 2


class MapKind(enum.IntEnum):
    AZ = 0
    SAWTOOTH = 1


@dataclass(frozen=True)
class MapParams:
    """Parameters of one member of the family.

    ``alpha`` may be given as a float, an :class:`~azmap.alpha.Alpha` or an
    expression string such as ``"1/ln(2)"``; it is stored as a double-double
    (``alpha`` + ``alpha_lo``) together with the exact multiplier when one
    exists.
    """

    alpha: float
    z: float = -1.0
    circle_len: float = 2.0
    sign_variant: SignVariant = SignVariant.PINBALL_PROOFS
    singular_policy: SingularPolicy = SingularPolicy.HALT
    numeric_policy: NumericPolicy = NumericPolicy.DOUBLE
    kind: MapKind = MapKind.AZ
    alpha_lo: float = 0.0
    mu_exact: Optional[Fraction] = None
    alpha_text: str = ""

    def __post_init__(self):
        a = self.alpha
        if isinstance(a, (str, Alpha)):
            spec = parse_alpha(a)
            object.__setattr__(self, "alpha", spec.hi)
            object.__setattr__(self, "alpha_lo", spec.lo)
            object.__setattr__(self, "mu_exact", spec.mu_exact)
            object.__setattr__(self, "alpha_text", spec.text)
        else:
            object.__setattr__(self, "alpha", float(a))
        if not self.alpha > 0:
            raise DomainError(f"alpha must be positive, got {self.alpha!r}")
        if float(self.circle_len) not in (1.0, 2.0):
            raise DomainError(f"circle_len must be 1 or 2, got {self.circle_len!r}")
        object.__setattr__(self, "circle_len", float(self.circle_len))
        object.__setattr__(self, "z", float(self.z))
        object.__setattr__(self, "sign_variant", SignVariant(self.sign_variant))
        object.__setattr__(self, "singular_policy", SingularPolicy(self.singular_policy))
        object.__setattr__(self, "numeric_policy", NumericPolicy(self.numeric_policy))
        object.__setattr__(self, "kind", MapKind(self.kind))

    @classmethod
    def pinball(cls, alpha, *, printed_sign=False, **kw) -> "MapParams":
        """The ``z = -1`` map on ``[0, 2)``.

        By default the action grows when the new angle lies in ``(0, 1)``;
        ``printed_sign=True`` selects the opposite orientation.
        """
        kw.setdefault("numeric_policy", NumericPolicy.COMPENSATED)
        variant = SignVariant.AZ_HALF if printed_sign else SignVariant.PINBALL_PROOFS
        return cls(alpha, z=-1.0, circle_len=2.0, sign_variant=variant, **kw)

    @classmethod
    def az(cls, alpha, z, circle_len=1.0, **kw) -> "MapParams":
        kw.setdefault("sign_variant", SignVariant.AZ_HALF)
        return cls(alpha, z=z, circle_len=circle_len, **kw)

    @classmethod
    def switching_potential(cls, alpha, **kw) -> "MapParams":
        """Particle in a switching square-wave potential: ``z = 1/2`` on ``[0, 2)``."""
        kw.setdefault("sign_variant", SignVariant.AZ_HALF)
        return cls(alpha, z=0.5, circle_len=2.0, **kw)

    @classmethod
    def sawtooth(cls, **kw) -> "MapParams":
        kw.setdefault("alpha", 1.0)
        return cls(z=1.0, circle_len=1.0, kind=MapKind.SAWTOOTH, sign_variant=SignVariant.AZ_HALF, **kw)

    @property
    def is_pinball(self) -> bool:
        return self.kind == MapKind.AZ and self.z == -1.0 and self.circle_len == 2.0

    @property
    def z_is_int(self) -> bool:
        return float(self.z).is_integer()

    @property
    def requires_positive_action(self) -> bool:
        return self.is_pinball or not self.z_is_int

    @property
    def mu(self) -> float:
        if self.mu_exact is not None:
            return float(self.mu_exact)
        return math.exp(1.0 / self.alpha)

    def with_policy(self, policy) -> "MapParams":
        return replace(self, numeric_policy=NumericPolicy(policy))

    def _kernel_args(self):
        return (
            self.alpha,
            self.alpha_lo,
            self.z,
            int(self.z) if self.z_is_int else 0,
            self.z_is_int,
            self.circle_len,
            int(self.sign_variant),
            int(self.singular_policy),
            int(self.numeric_policy),
            self.requires_positive_action,
        )


@dataclass(frozen=True)
class CylState:
    """A point on the cylinder.

    ``angle_lo`` is the low-order part of the angle under the compensated
    and double-double policies and 0 otherwise.
    """

    angle: float
    action: float
    angle_lo: float = 0.0

    @property
    def angle_exact(self) -> Fraction:
        return Fraction(self.angle) + Fraction(self.angle_lo)


@dataclass
class OrbitTrace:
    params: MapParams
    initial: CylState
    angles: np.ndarray
    actions: np.ndarray
    step_count: int
    decimation: int
    singular_hits: list = field(default_factory=list)
    action_min: float = 0.0
    action_max: float = 0.0
    final: Optional[CylState] = None

    @property
    def states(self) -> list:
        return [CylState(float(a), float(b)) for a, b in zip(self.angles, self.actions)]

    def __len__(self):
        return len(self.angles)


# ---------------------------------------------------------------------------
# kernels


@njit(cache=True)
def _increment(y, a_hi, a_lo, z, zi, z_is_int, npol):
    """alpha * y**z as a (hi, lo) pair; ok=False where undefined."""
    if z_is_int:
        k = zi if zi >= 0 else -zi
        p = 1.0
        for _ in range(k):
            p *= y
        if zi < 0:
            if p == 0.0:
                return 0.0, 0.0, False
            if npol == 2:
                hi, lo = dd_div_d(a_hi, a_lo, p)
                return hi, lo, True
            return a_hi / p, 0.0, True
        if npol == 2:
            hi, lo = dd_mul_d(a_hi, a_lo, p)
            return hi, lo, True
        return a_hi * p, 0.0, True
    if y <= 0.0:
        return 0.0, 0.0, False
    return a_hi * math.exp(z * math.log(y)), 0.0, True


@njit(cache=True)
def _reduce(hi, lo, L, npol):
    """Bring ``hi + lo`` into ``[0, L)``."""
    if npol == 0:
        x = hi
        if x >= L or x < 0.0:
            x = x - L * math.floor(x / L)
            if x >= L:
                x = np.nextafter(L, 0.0)
        return x, 0.0
    if hi >= L or hi < 0.0:
        k = math.floor(hi / L)
        s, e = two_sum(hi, -k * L)
        hi, lo = two_sum(s, e + lo)
    while dd_cmp_d(hi, lo, L) >= 0:
        hi, lo = dd_add_d(hi, lo, -L)
    while dd_cmp_d(hi, lo, 0.0) < 0:
        hi, lo = dd_add_d(hi, lo, L)
    if hi >= L:
        below = np.nextafter(L, 0.0)
        lo = (hi - below) + lo
        hi = below
    return hi, lo


@njit(cache=True)
def _jump(hi, lo, L, variant):
    """Return (sign, singular) for a reduced landing angle."""
    if dd_cmp_d(hi, lo, 0.0) == 0:
        return 0, True
    c = dd_cmp_d(hi, lo, 0.5 * L)
    if c == 0:
        return 0, True
    if variant == 0:
        return (1 if c > 0 else -1), False
    return (1 if c < 0 else -1), False


@njit(cache=True)
def _az_step(hi, lo, y, a_hi, a_lo, z, zi, z_is_int, L, variant, spol, npol, positive):
    if positive and y <= 0.0:
        return hi, lo, y, DOMAIN
    inc_hi, inc_lo, ok = _increment(y, a_hi, a_lo, z, zi, z_is_int, npol)
    if not ok:
        return hi, lo, y, DOMAIN
    if npol == 0:
        nh, nl = hi + inc_hi, 0.0
    elif npol == 1:
        nh, nl = dd_add_d(hi, lo, inc_hi)
    else:
        nh, nl = dd_add(hi, lo, inc_hi, inc_lo)
    nh, nl = _reduce(nh, nl, L, npol)
    s, sing = _jump(nh, nl, L, variant)
    status = OK
    if sing:
        if spol == 0:
            return nh, nl, y, SINGULAR
        s = 1 if spol == 1 else -1
        status = SINGULAR_RESOLVED
    ny = y + s
    if positive and ny <= 0.0:
        return nh, nl, ny, DOMAIN
    return nh, nl, ny, status


@njit(cache=True)
def _az_step_inverse(hi, lo, y, a_hi, a_lo, z, zi, z_is_int, L, variant, spol, npol, positive):
    s, sing = _jump(hi, lo, L, variant)
    status = OK
    if sing:
        if spol == 0:
            return hi, lo, y, SINGULAR
        s = 1 if spol == 1 else -1
        status = SINGULAR_RESOLVED
    py = y - s
    if positive and py <= 0.0:
        return hi, lo, py, DOMAIN
    inc_hi, inc_lo, ok = _increment(py, a_hi, a_lo, z, zi, z_is_int, npol)
    if not ok:
        return hi, lo, py, DOMAIN
    if npol == 0:
        nh, nl = hi - inc_hi, 0.0
    elif npol == 1:
        nh, nl = dd_add_d(hi, lo, -inc_hi)
    else:
        nh, nl = dd_add(hi, lo, -inc_hi, -inc_lo)
    nh, nl = _reduce(nh, nl, L, npol)
    return nh, nl, py, status


@njit(cache=True)
def _sawtooth_step(y, yp):
    y2 = y + yp
    y2 = y2 - math.floor(y2)
    if y2 >= 1.0:
        y2 = np.nextafter(1.0, 0.0)
    if y2 == 0.5:
        return y2, yp, SINGULAR
    s = 1.0 if y2 > 0.5 else -1.0
    return y2, yp + y2 * s, OK


@njit(cache=True)
def _iterate_kernel(hi, lo, y, a_hi, a_lo, z, zi, z_is_int, L, variant, spol, npol, positive,
                    sawtooth, n_steps, dec, out_a, out_y, hits):
    out_a[0] = hi
    out_y[0] = y
    rec = 1
    ymin = y
    ymax = y
    nhits = 0
    for k in range(1, n_steps + 1):
        if sawtooth:
            nh, ny, st = _sawtooth_step(hi, y)
            nl = 0.0
        else:
            nh, nl, ny, st = _az_step(hi, lo, y, a_hi, a_lo, z, zi, z_is_int, L, variant, spol, npol, positive)
        if st == SINGULAR or st == DOMAIN:
            if nhits < hits.shape[0] and st == SINGULAR:
                hits[nhits] = k
                nhits += 1
            return k - 1, rec, ymin, ymax, nhits, st, hi, lo, y
        if st == SINGULAR_RESOLVED:
            if nhits < hits.shape[0]:
                hits[nhits] = k
            nhits += 1
        hi, lo, y = nh, nl, ny
        if y < ymin:
            ymin = y
        if y > ymax:
            ymax = y
        if k % dec == 0:
            out_a[rec] = hi
            out_y[rec] = y
            rec += 1
    return n_steps, rec, ymin, ymax, nhits, OK, hi, lo, y


# ---------------------------------------------------------------------------
# public operations


def _raise_for(status, params, s, step=None):
    if status == SINGULAR:
        raise SingularHit(
            f"iterate landed on a discontinuity line (angle={s.angle!r}, action={s.action!r})",
            step=step, angle=s.angle, action=s.action,
        )
    if status == DOMAIN:
        raise DomainError(f"map undefined at action={s.action!r} for z={params.z!r}")


def step_az(params: MapParams, s: CylState) -> CylState:
    """One step of the alpha-z map (or of the saw-tooth map for ``kind=SAWTOOTH``)."""
    if params.kind == MapKind.SAWTOOTH:
        return step_sawtooth_fu(params, s)
    hi, lo, y, st = _az_step(s.angle, s.angle_lo, float(s.action), *params._kernel_args())
    out = CylState(hi, y, lo)
    _raise_for(st, params, out)
    return out


def _check_pinball(params):
    if not params.is_pinball:
        raise DomainError("pinball step needs z = -1 and circle_len = 2")


def step_pinball(params: MapParams, s: CylState) -> CylState:
    _check_pinball(params)
    return step_az(params, s)


def step_inverse(params: MapParams, s: CylState) -> CylState:
    """The unique preimage of ``s`` under :func:`step_az`."""
    if params.kind == MapKind.SAWTOOTH:
        raise DomainError("no inverse implemented for the saw-tooth map")
    hi, lo, y, st = _az_step_inverse(s.angle, s.angle_lo, float(s.action), *params._kernel_args())
    out = CylState(hi, y, lo)
    _raise_for(st, params, out)
    return out


def step_pinball_inverse(params: MapParams, s: CylState) -> CylState:
    _check_pinball(params)
    return step_inverse(params, s)


def step_sawtooth_fu(params: MapParams, s: CylState) -> CylState:
    """Saw-tooth Fermi-Ulam map; ``angle`` carries y and ``action`` carries y'."""
    if params.circle_len != 1.0:
        raise DomainError("saw-tooth map lives on the unit circle")
    y2, yp2, st = _sawtooth_step(s.angle, float(s.action))
    out = CylState(y2, yp2)
    _raise_for(st, params, out)
    return out


def iterate(params: MapParams, s0: CylState, n_steps: int, decimation: int = 1,
            max_hits: int = 65536) -> OrbitTrace:
    """Apply the map ``n_steps`` times, keeping every ``decimation``-th state.

    A halting singular landing raises :class:`SingularHit` and a domain
    failure raises :class:`DomainError`; both carry the partial trace as
    ``exc.trace``.
    """
    if n_steps < 0 or decimation < 1:
        raise ValueError("need n_steps >= 0 and decimation >= 1")
    cap = n_steps // decimation + 1
    out_a = np.empty(cap)
    out_y = np.empty(cap)
    hits = np.empty(max(1, min(max_hits, n_steps)), dtype=np.int64)
    sawtooth = params.kind == MapKind.SAWTOOTH
    if sawtooth and params.circle_len != 1.0:
        raise DomainError("saw-tooth map lives on the unit circle")
    done, rec, ymin, ymax, nhits, st, hi, lo, y = _iterate_kernel(
        float(s0.angle), float(s0.angle_lo), float(s0.action), *params._kernel_args(),
        sawtooth, int(n_steps), int(decimation), out_a, out_y, hits,
    )
    trace = OrbitTrace(
        params=params,
        initial=s0,
        angles=out_a[:rec].copy(),
        actions=out_y[:rec].copy(),
        step_count=int(done),
        decimation=decimation,
        singular_hits=[int(h) for h in hits[: min(nhits, hits.shape[0])]],
        action_min=float(ymin),
        action_max=float(ymax),
        final=CylState(float(hi), float(y), float(lo)),
    )
    if st != OK:
        try:
            _raise_for(st, params, trace.final, step=done + 1)
        except (SingularHit, DomainError) as exc:
            exc.trace = trace
            raise
    return trace


# ---------------------------------------------------------------------------
# escape census


@njit(cache=True)
def _escape_census_kernel(angles, y0, threshold, n_steps, a_hi, a_lo, z, zi, z_is_int, L, variant,
                          spol, npol, positive, escaped, monotone, exit_step):
    for i in range(angles.shape[0]):
        hi = angles[i]
        lo = 0.0
        y = y0
        mono = True
        escaped[i] = False
        monotone[i] = False
        exit_step[i] = -1
        for k in range(1, n_steps + 1):
            hi, lo, ny, st = _az_step(hi, lo, y, a_hi, a_lo, z, zi, z_is_int, L, variant, spol, npol, positive)
            if st == SINGULAR or st == DOMAIN:
                break
            if ny < y:
                mono = False
            y = ny
            if y > threshold:
                escaped[i] = True
                monotone[i] = mono
                exit_step[i] = k
                break


@dataclass
class EscapeCensus:
    params: MapParams
    action0: float
    threshold: float
    n_steps: int
    angles: np.ndarray
    escaped: np.ndarray
    monotone: np.ndarray
    exit_step: np.ndarray

    @property
    def escape_fraction(self) -> float:
        """Share of seeds whose action climbed past the threshold without a single loss."""
        return float(self.monotone.mean()) if self.angles.size else 0.0

    @property
    def reached_fraction(self) -> float:
        return float(self.escaped.mean()) if self.angles.size else 0.0


def escape_census(params: MapParams, action0: float, n_seeds: int = 1000, n_steps: int = 10**5,
                  threshold: float = 1000.0) -> EscapeCensus:
    """Start ``n_seeds`` orbits on a uniform angle grid at ``action0`` and see which run away.

    Seeds are the cell centres of ``[0, circle_len)``.  Orbits that hit a
    discontinuity or leave the map's domain count as not escaped.
    """
    if n_seeds < 0 or n_steps < 0:
        raise ValueError("need n_seeds >= 0 and n_steps >= 0")
    angles = (np.arange(n_seeds) + 0.5) / max(n_seeds, 1) * params.circle_len
    esc = np.zeros(n_seeds, dtype=np.bool_)
    mono = np.zeros(n_seeds, dtype=np.bool_)
    ex = np.zeros(n_seeds, dtype=np.int64)
    _escape_census_kernel(angles, float(action0), float(threshold), int(n_steps), *params._kernel_args(),
                          esc, mono, ex)
    return EscapeCensus(params, float(action0), float(threshold), int(n_steps), angles, esc, mono, ex)
