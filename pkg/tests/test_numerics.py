from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from azmap.numerics import (
    NeumaierSum,
    NumericPolicy,
    dd_add,
    dd_cmp_d,
    dd_div_d,
    dd_from_fraction,
    dd_mul_d,
    dd_to_fraction,
    harmonic_segment,
    neumaier_sum,
    two_prod,
    two_sum,
)

finite = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False, allow_infinity=False)


@given(finite, finite)
def test_two_sum_is_exact(a, b):
    s, e = two_sum(a, b)
    assert Fraction(s) + Fraction(e) == Fraction(a) + Fraction(b)


# products must stay clear of underflow for the error term to be representable
scaled = st.one_of(st.just(0.0), st.floats(min_value=1e-100, max_value=1e6), st.floats(min_value=-1e6, max_value=-1e-100))


@given(scaled, scaled)
def test_two_prod_is_exact(a, b):
    p, e = two_prod(a, b)
    assert Fraction(p) + Fraction(e) == Fraction(a) * Fraction(b)


@settings(max_examples=200)
@given(st.floats(0.01, 100), st.floats(0.01, 100), st.floats(1, 1e4))
def test_double_double_ops_track_exact_values(a, b, d):
    x = dd_from_fraction(Fraction(a) / 3)
    y = dd_from_fraction(Fraction(b) / 7)
    exact = dd_to_fraction(*x) + dd_to_fraction(*y)
    got = dd_to_fraction(*dd_add(*x, *y))
    assert abs(got - exact) <= abs(exact) * Fraction(1, 2**100)
    q = dd_div_d(*x, d)
    assert abs(dd_to_fraction(*q) - dd_to_fraction(*x) / Fraction(d)) <= abs(dd_to_fraction(*q)) * Fraction(1, 2**98)
    m = dd_mul_d(*x, d)
    assert abs(dd_to_fraction(*m) - dd_to_fraction(*x) * Fraction(d)) <= abs(dd_to_fraction(*m)) * Fraction(1, 2**100)


def test_dd_compare_uses_low_part():
    assert dd_cmp_d(1.0, 1e-30, 1.0) == 1
    assert dd_cmp_d(1.0, -1e-30, 1.0) == -1
    assert dd_cmp_d(1.0, 0.0, 1.0) == 0
    assert dd_cmp_d(0.5, 0.7, 1.0) == -1


def test_neumaier_recovers_cancelled_terms():
    assert neumaier_sum([1.0, 1e100, 1.0, -1e100]) == 2.0
    acc = NeumaierSum(1.0)
    acc.add(1e-17)
    acc.add(1e-17)
    assert acc.parts[1] == pytest.approx(2e-17)


def test_harmonic_segment_matches_fraction_sum():
    exact = sum(Fraction(1, 101 + k) for k in range(2000))
    assert abs(harmonic_segment(101, 2000) - float(exact)) <= 2e-16 * float(exact)


@pytest.mark.parametrize("text,pol", [("double", NumericPolicy.DOUBLE), ("Compensated", NumericPolicy.COMPENSATED),
                                      ("compensated-double", NumericPolicy.COMPENSATED), ("dd", NumericPolicy.DOUBLE_DOUBLE),
                                      ("double_double", NumericPolicy.DOUBLE_DOUBLE)])
def test_policy_names(text, pol):
    assert NumericPolicy.parse(text) is pol


def test_unknown_policy():
    with pytest.raises(ValueError):
        NumericPolicy.parse("quad")
