"""Discontinuous twist maps of the alpha-z family: iteration, first returns,
renormalized return dynamics, escaping orbits and the zero-twist system."""

__version__ = "0.1.0"

from .alpha import Alpha, parse_alpha
from .core import (
    CylState,
    EscapeCensus,
    MapKind,
    MapParams,
    OrbitTrace,
    SignVariant,
    SingularPolicy,
    escape_census,
    iterate,
    step_az,
    step_inverse,
    step_pinball,
    step_pinball_inverse,
    step_sawtooth_fu,
)
from .errors import AzMapError, BudgetExceeded, DomainError, NonIntegerPrediction, SingularHit, UsageError
from .escape import EscapeSeed, GrowthReport, make_seed, run_escape, second_order_drift, verify_escape
from .kesten import DiscrepancySeries, ek_orbit, period_scan, rational_drift
from .numerics import NumericPolicy
from .renorm import (
    Case,
    CasePrediction,
    RenormContext,
    g_mu_form,
    h_mu,
    mu_of_alpha,
    predicted_n,
    predicted_return_cases,
    renorm_error_scan,
    s1_asymptotic,
)
from .returnmap import (
    IntervalReport,
    ReturnClass,
    ReturnEvent,
    classify_fiber,
    fiber_analytics,
    first_return,
    in_fundamental_domain,
    rescale,
    rigidity_check,
)
