import numpy as np
import pytest

from heavytails.errors import InsufficientDataError, ParameterError
from heavytails.rng import stream
from heavytails.tails import (EmpiricalDistribution, fit_tail_loglog,
                              hill_estimator, is_non_power_law, ks_distance)


def pareto_sample(n, index, seed=0):
    u = stream(seed, 0).random(n)
    return u ** (-1.0 / index)


def test_empirical_cdf():
    emp = EmpiricalDistribution(np.array([1.0, 2.0, 3.0, 4.0]))
    assert emp.cdf(2.5) == 0.5
    assert emp.ccdf(2.5) == 0.5
    assert emp.cdf(0.0) == 0.0
    assert emp.cdf(4.0) == 1.0


def test_ks_distance_on_exact_cdf_is_small():
    xs = pareto_sample(50000, 2.0, seed=1)
    emp = EmpiricalDistribution(xs)
    d = ks_distance(emp, lambda x: 1.0 - np.asarray(x, float) ** -2.0)
    assert d < 0.01


def test_loglog_fit_recovers_index():
    xs = pareto_sample(200000, 2.5, seed=2)
    emp = EmpiricalDistribution(xs)
    fit = fit_tail_loglog(emp, 1.5, np.quantile(xs, 0.9995))
    assert fit.exponent == pytest.approx(-2.5, abs=0.05)
    assert fit.stderr >= 0.0


def test_hill_recovers_index():
    xs = pareto_sample(100000, 1.7, seed=3)
    fit = hill_estimator(EmpiricalDistribution(xs), k_top=2000)
    assert fit.exponent == pytest.approx(1.7, abs=0.1)


def test_hill_needs_enough_points():
    with pytest.raises(ParameterError):
        hill_estimator(EmpiricalDistribution(np.arange(1.0, 6.0)), k_top=4)
    with pytest.raises(InsufficientDataError):
        hill_estimator(EmpiricalDistribution(np.arange(1.0, 6.0)), k_top=10)


def test_lognormal_flagged_as_curved():
    xs = np.exp(stream(4, 0).normal(0.0, 1.0, 200000))
    emp = EmpiricalDistribution(xs)
    assert is_non_power_law(emp, np.quantile(xs, 0.5), np.quantile(xs, 0.9999))


def test_power_law_not_flagged():
    xs = pareto_sample(200000, 2.0, seed=5)
    emp = EmpiricalDistribution(xs)
    assert not is_non_power_law(emp, np.quantile(xs, 0.5),
                                np.quantile(xs, 0.9999))
