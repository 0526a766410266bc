import numpy as np
import pytest

from heavytails.distributions import (BetaLike, Exponential, Pareto,
                                      PointMass, PowerDensity,
                                      SymmetricUniform, TwoPoint, Uniform,
                                      check_unit_law, parse_distribution)
from heavytails.errors import ParameterError
from heavytails.rng import stream


def test_uniform_cdf_and_moments():
    u = Uniform()
    assert u.cdf(0.0) == 0.0
    assert u.cdf(1.0) == 1.0
    assert u.cdf(0.25) == 0.25
    assert u.mean() == pytest.approx(0.5)
    assert u.var() == pytest.approx(1.0 / 12.0)


def test_power_density_cdf():
    d = PowerDensity(alpha=1.0)  # pdf 2x on [0,1]
    x = np.array([0.0, 0.5, 1.0])
    assert np.allclose(d.cdf(x), x ** 2)


def test_betalike_matches_numerical_integral():
    d = BetaLike(alpha=0.5, beta=1.0)
    xs = np.linspace(0.01, 0.99, 17)
    for x in xs:
        grid = np.linspace(0, x, 20001)
        num = np.trapezoid(d.pdf(grid), grid)
        assert d.cdf(x) == pytest.approx(num, abs=1e-6)


def test_sampling_matches_cdf():
    rng = stream(7, 0)
    for spec in ("uniform", "powdens:alpha=1.5", "betalike:alpha=0.5,beta=2",
                 "exp:rate=2", "pareto:B=1,omega=3"):
        d = parse_distribution(spec)
        xs = d.sample(rng, 20000)
        grid = np.quantile(xs, [0.1, 0.3, 0.5, 0.7, 0.9])
        emp = np.searchsorted(np.sort(xs), grid, side="right") / xs.size
        assert np.allclose(emp, d.cdf(grid), atol=0.02), spec


def test_pareto_integrated_ccdf_closed_form():
    d = Pareto(B=1.0, omega=3.5)
    # integral of (B/x)^(omega-1) from v to infinity
    for v in (1.0, 2.0, 5.0):
        assert d.integrated_ccdf(v) == pytest.approx(
            v ** (2 - 3.5) / (3.5 - 2), rel=1e-12)
    assert Pareto(B=1.0, omega=2.0).integrated_ccdf(1.0) == np.inf


def test_point_mass_cdf_is_left_continuous():
    d = PointMass(0.5)
    assert d.cdf(0.5) == 0.0
    assert d.cdf(0.500001) == 1.0


def test_two_point_and_symmetric_uniform_moments():
    t = TwoPoint(a=0.0, b=1.0, p=0.5)
    assert t.mean() == pytest.approx(0.5)
    s = SymmetricUniform(half=1.0)
    assert s.mean() == pytest.approx(0.0)
    assert s.second_moment() == pytest.approx(1.0 / 3.0)


def test_parse_rejects_bad_input():
    with pytest.raises(ParameterError):
        parse_distribution("nosuchkind")
    with pytest.raises(ParameterError):
        parse_distribution("uniform:bogus=1")
    with pytest.raises(ParameterError):
        parse_distribution("pareto:B=1")  # missing omega


def test_check_unit_law_rejects_wide_support():
    with pytest.raises(ParameterError):
        check_unit_law(Exponential(rate=1.0), "F")
    check_unit_law(Uniform(), "F")  # no raise
