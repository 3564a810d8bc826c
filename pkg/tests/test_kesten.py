from fractions import Fraction

import numpy as np
import pytest

import oracles
from azmap.core import SingularPolicy
from azmap.errors import DomainError, SingularHit
from azmap.kesten import as_rational, ek_orbit, period_scan, period_scan_detail, rational_drift

GOLDEN = (5**0.5 - 1) / 2


@pytest.mark.parametrize("alpha", ["1/2", Fraction(1, 2), 0.5])
def test_half_rotation_period_two(alpha):
    s = ek_orbit(alpha, Fraction(1, 5), 0, 8)
    assert list(s.y_values) == [0, 1] * 4 + [0]
    assert s.exact


def test_unit_rotation_descends_linearly():
    s = ek_orbit(1.0, 0.3, 0, 100)
    assert list(s.y_values) == [-k for k in range(101)]
    s = ek_orbit(1, Fraction(3, 10), 0, 100)
    assert s.y_values[-1] == -100


def test_golden_rotation_statistics():
    s = ek_orbit(GOLDEN, 0.1, 0, 10**6, 100)
    assert s.zero_crossings >= 50
    assert s.y_range <= 1000
    assert s.y_max - s.y_min <= s.steps
    assert len(s.y_values) == 10**4 + 1


def test_exact_path_matches_fraction_oracle():
    for alpha, x0 in ((Fraction(2, 7), Fraction(1, 9)), (Fraction(3, 11), Fraction(1, 3)), (Fraction(5, 13), Fraction(0))):
        try:
            ref = oracles.kesten(alpha, x0, 3, 500)
        except ZeroDivisionError:
            with pytest.raises(SingularHit):
                ek_orbit(alpha, x0, 3, 500)
            continue
        s = ek_orbit(alpha, x0, 3, 500)
        assert list(s.y_values) == ref
        assert s.zero_crossings == sum(1 for y in ref[1:] if y == 3)


def test_float_path_matches_exact_path_on_safe_orbit():
    a = ek_orbit(GOLDEN, 0.1, 0, 5000)
    assert np.all(np.abs(np.diff(a.y_values)) == 1)


def test_singular_landing():
    with pytest.raises(SingularHit):
        ek_orbit("1/4", Fraction(1, 4), 0, 10)
    s = ek_orbit("1/4", Fraction(1, 4), 0, 4, singular_policy=SingularPolicy.TREAT_AS_PLUS)
    assert s.singular_hits == [1, 3]


def test_period_scans():
    assert period_scan("1/2", 100)
    d = period_scan_detail("1/2", 100)
    assert d.checked == 98 and d.singular_skipped == 2
    assert not period_scan("1/3", 100)
    assert period_scan("1/2", 2)  # both points are singular; vacuously true
    with pytest.raises(DomainError):
        period_scan("1/2", 1)


def test_rational_drift_is_constant_along_orbit():
    for alpha, x0 in (("2/5", Fraction(1, 7)), ("3/8", Fraction(1, 17)), ("1/3", Fraction(1, 10))):
        d = rational_drift(alpha, x0)
        assert d.period == Fraction(alpha).denominator
        assert d.constant


def test_rational_detection():
    assert as_rational("3/7") == Fraction(3, 7)
    assert as_rational(0.25) == Fraction(1, 4)
    assert as_rational(0.1) is None
    assert as_rational("1/ln(2)") is None
