from fractions import Fraction

import numpy as np
import pytest

from heavytails.errors import SingularSeriesError
from heavytails.series import (PowerSeries, geometric_series, log_series,
                               series_coeff, series_mul, series_recip)


def test_mul_matches_polynomial_product():
    a = PowerSeries([1, 2, 3], order=8)
    b = PowerSeries([4, 5], order=8)
    c = series_mul(a, b)
    assert [series_coeff(c, k) for k in range(5)] == [4, 13, 22, 15, 0]


def test_recip_of_one_minus_x_is_geometric():
    one_minus_x = PowerSeries([1, -1], order=16, exact=True)
    g = series_recip(one_minus_x)
    assert all(series_coeff(g, k) == 1 for k in range(16))


def test_recip_exact_rationals():
    s = PowerSeries([Fraction(2), Fraction(1, 3)], order=6, exact=True)
    r = series_recip(s)
    prod = series_mul(s, r)
    assert series_coeff(prod, 0) == 1
    assert all(series_coeff(prod, k) == 0 for k in range(1, 6))


def test_recip_rejects_zero_constant_term():
    with pytest.raises(SingularSeriesError):
        series_recip(PowerSeries([0, 1], order=4))


def test_geometric_and_log_series():
    g = geometric_series(Fraction(1, 2), order=10, exact=True)
    assert series_coeff(g, 3) == Fraction(1, 8)
    l = log_series(Fraction(1, 2), order=10, exact=True)
    # -ln(1 - r s) has coefficients r^k / k
    assert series_coeff(l, 0) == 0
    assert series_coeff(l, 4) == Fraction(1, 64)


def test_float_and_exact_backends_agree():
    ax = PowerSeries([Fraction(1), Fraction(-1, 3), Fraction(1, 7)],
                     order=32, exact=True)
    af = PowerSeries([1.0, -1 / 3, 1 / 7], order=32)
    rx, rf = series_recip(ax), series_recip(af)
    for k in range(32):
        assert float(series_coeff(rx, k)) == pytest.approx(
            series_coeff(rf, k), rel=1e-12)


def test_shift_and_arithmetic():
    x = PowerSeries.x(order=6)
    s = (x + PowerSeries.one(order=6)).shift(1)
    assert [series_coeff(s, k) for k in range(4)] == [0, 1, 1, 0]
    d = s - s
    assert all(series_coeff(d, k) == 0 for k in range(6))
