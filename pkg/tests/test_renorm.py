import math
from fractions import Fraction

import numpy as np
import pytest

import oracles
from azmap.core import MapParams
from azmap.errors import DomainError, NonIntegerPrediction
from azmap.renorm import (
    Case,
    MuRegime,
    RenormContext,
    case_increment,
    g_mu,
    g_mu_form,
    h_chi,
    h_mu,
    mu_of_alpha,
    predicted_n,
    predicted_n_value,
    predicted_return_cases,
    round_prediction,
    renorm_error_scan,
    s1_asymptotic,
)
from azmap.returnmap import fiber_analytics, first_return_batch

C2 = mu_of_alpha("1/ln(2)")
C25 = mu_of_alpha("1/ln(2.5)")


def test_mu_of_alpha():
    assert C2.mu == 2 and C2.regime is MuRegime.LOW
    assert mu_of_alpha(1.0).mu == pytest.approx(math.e)
    c3 = mu_of_alpha("1/ln(3)")
    assert c3.mu == 3 and c3.regime is MuRegime.HIGH
    with pytest.raises(DomainError):
        mu_of_alpha(0.0)
    with pytest.raises(DomainError):
        mu_of_alpha(-2.0)


def test_strips_have_width_one_over_mu():
    for c in (C2, C25, mu_of_alpha(0.9)):
        assert c.strip0[1] - c.strip0[0] == pytest.approx(1 / c.mu)
        assert c.strip1[1] - c.strip1[0] == pytest.approx(1 / c.mu)


@pytest.mark.parametrize("mu,x,h", [(2, 7, 0.0), (2.5, 1, 0.5), (1.2, 2, -0.4)])
def test_h_mu_examples(mu, x, h):
    assert h_mu(mu, x) == pytest.approx(h)


def test_h_mu_matches_exact_rational_oracle():
    for mu in (Fraction(3, 2), Fraction(2), Fraction(5, 2), Fraction(11, 10), Fraction(29, 10)):
        for x in range(1, 400):
            ref = oracles.h_mu(mu, x)
            got = h_mu(float(mu), x, mu)
            assert got == pytest.approx(float(ref), abs=1e-15)
            assert -1 < got <= 1
            assert h_chi(float(mu), x, mu) in (0, 1)


def test_predicted_n_examples():
    assert predicted_n(C2, 101) == 99
    assert predicted_n(C2, 1000) == 998
    assert predicted_n(C25, 200) == 298


def test_predicted_n_matches_frozen_climb_counts(frozen):
    for row in frozen["climb_counts"]:
        ctx = mu_of_alpha(f"1/ln({row['mu']})")
        assert predicted_n(ctx, row["N"]) == row["n"]


@pytest.mark.parametrize("alpha", ["1/ln(3)", "1/ln(4)", "1/ln(5)", "1/ln(7)", "1/ln(10)", 0.8, 0.5, 0.7, 0.45])
def test_predicted_n_high_regime(alpha):
    p = MapParams.pinball(alpha)
    ctx = mu_of_alpha(alpha)
    assert ctx.regime is MuRegime.HIGH
    for N in range(100, 1500, 37):
        assert predicted_n(ctx, N) == fiber_analytics(p, N).n0


def test_predicted_n_irrational_low_regime():
    p = MapParams.pinball(1.0)
    ctx = mu_of_alpha(1.0)
    for N in range(50, 3000, 31):
        assert predicted_n(ctx, N) == fiber_analytics(p, N).n0


def test_non_integer_prediction_is_flagged():
    assert round_prediction(99.0000000001) == 99
    with pytest.raises(NonIntegerPrediction) as ei:
        round_prediction(99.4, 101)
    assert ei.value.value == 99.4


def test_case_formula_examples():
    assert case_increment(C2, 101, Case.PLUS) == pytest.approx(0.0)
    z = predicted_return_cases(C2, 101, 0.3, Case.ZERO_MIDDLE)
    assert z.increment == pytest.approx(-1.5)
    assert z.phi_tilde_next == pytest.approx(0.8)
    p = predicted_return_cases(C25, 200, 0.1, Case.PLUS)
    assert p.increment == pytest.approx(0.2)
    assert 0 <= p.phi_tilde_next < 1


def test_case_formulas_refuse_high_regime():
    with pytest.raises(DomainError):
        predicted_return_cases(mu_of_alpha("1/ln(3)"), 101, 0.1, Case.PLUS)


def test_derived_neutral_formulas_agree_with_shared_ones_at_the_ends():
    # the left neutral piece climbs like the gain piece; the right one like the loss piece
    for ctx, N in ((C2, 101), (C25, 200), (C25, 201), (mu_of_alpha(1.0), 300)):
        left = case_increment(ctx, N, Case.ZERO_LEFT, "derived", 0)
        assert (left - case_increment(ctx, N, Case.PLUS)) % 1 == pytest.approx(0, abs=1e-12)


def test_g_form_examples():
    assert g_mu(C2, 101, 0.1, 1, 0) == pytest.approx(0.0)
    assert g_mu_form(C2, 101, 0.1, 1, 0) == pytest.approx(0.1)
    # at mu = 2 the closed strips cover the circle, so "neither strip" needs mu > 2
    assert g_mu(C25, 200, 0.5, 0, 0) == pytest.approx(h_mu(2.5, 199) + 0.5)
    assert g_mu(C25, 200, 0.9, 0, 1) == pytest.approx(h_mu(2.5, 198))


def test_s1_asymptotic_examples():
    exact = float(oracles.harmonic(101, 100))
    assert abs(s1_asymptotic(C2, 101, 99) - exact) <= 1e-8
    for N in (50, 100, 1000):
        assert abs(s1_asymptotic(None, N, 0) - 1 / N) <= 1e-6
    N = 10**6
    assert s1_asymptotic(C2, N, 2 * (N - 1) - N) == pytest.approx(math.log(2), abs=1e-5)


def test_s1_asymptotic_error_decays_like_inverse_cube():
    Ns = [2**k for k in range(4, 11)]
    errs = [abs(s1_asymptotic(None, N, N) - float(oracles.harmonic(N, N + 1))) for N in Ns]
    slope = np.polyfit(np.log(Ns), np.log(errs), 1)[0]
    assert slope <= -2.5


def test_error_scan_single_point():
    p = MapParams.pinball("1/ln(2)")
    s = renorm_error_scan(p, [200], 1)
    assert len(s.rows) == 1
    d, po, _, _ = first_return_batch(p, np.array([0.5 * p.alpha / 199]), 200)
    assert s.rows[0].max_abs_error >= 0
    assert math.isnan(s.slope)


@pytest.mark.parametrize("alpha", ["1/ln(2)", "1/ln(2.5)", "1/ln(1.5)"])
def test_derived_formulas_are_first_order_accurate(alpha):
    s = renorm_error_scan(MapParams.pinball(alpha), [100, 200, 400, 800], 500)
    assert -1.5 <= s.slope <= -0.5
    c = s.constants
    assert max(c) / min(c) <= 1.5


def test_printed_neutral_formulas_miss_by_a_constant():
    s = renorm_error_scan(MapParams.pinball("1/ln(2)"), [200, 400], 500, formulas="printed")
    assert s.rows[-1].case_breakdown["zero_middle"] == pytest.approx(0.5, abs=1e-2)
    assert abs(s.slope) < 0.1


def test_unit_multiplier_second_order_drift_on_gain_interval():
    from azmap.escape import second_order_drift

    p = MapParams.pinball("1/ln(2)")
    scaled = []
    for N in (200, 400, 800, 1600):
        an = fiber_analytics(p, N)
        lo, hi = an.i_plus
        phis = lo + (np.arange(100) + 0.5) / 100 * (hi - lo)
        d, po, _, _ = first_return_batch(p, phis, N)
        assert np.all(d == 1)
        resid = (N - 1) * (po - phis) / p.alpha - second_order_drift(N)
        scaled.append(np.abs(resid).max() * N * N)
    assert max(scaled) < 1e-2
