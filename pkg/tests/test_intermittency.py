from fractions import Fraction

import numpy as np
import pytest

from heavytails.distributions import parse_distribution
from heavytails.errors import ParameterError
from heavytails.intermittency import (ThresholdModel, crossover, moments,
                                      pmf_bounds, pmf_eta0, pmf_eta1,
                                      pmf_eta1_beta, pmf_series,
                                      pmf_uniform_gf, pmf_uniform_nested,
                                      simulate_episodes, stirling_eta1_beta)


def uniform_model(eta):
    return ThresholdModel(F=parse_distribution("uniform"),
                          G=parse_distribution("uniform"), eta=eta)


def test_moment_table_uniform():
    t = moments(uniform_model(0.5), 4, exact=True)
    assert t.A[0] == 1
    assert t.A[1] == Fraction(1, 2)
    assert t.A[3] == Fraction(1, 4)  # integral of w^3 over [0,1]
    assert t.B[1] == t.A[1] - t.A[2]


def test_series_frozen_rational_values():
    pmf = pmf_series(uniform_model(0.5), 4, exact=True)
    assert pmf.values[0] == Fraction(1, 2)
    assert pmf.values[1] == Fraction(5, 24)
    assert pmf.values[2] == Fraction(11, 96)


def test_series_collapses_at_endpoints():
    for eta, closed in ((0.0, pmf_eta0), (1.0, pmf_eta1)):
        m = uniform_model(eta)
        pmf = pmf_series(m, 10, exact=True)
        for T in range(11):
            assert pmf.values[T] == closed(m, T, exact=True)


def test_eta1_uniform_closed_form():
    m = uniform_model(1.0)
    for T in range(20):
        assert pmf_eta1(m, T, exact=True) == Fraction(1, (T + 1) * (T + 2))


def test_generating_function_matches_series():
    for eta in (0.3, 0.5, 0.9, 1.0):
        s = pmf_series(uniform_model(eta), 32, exact=True)
        g = pmf_uniform_gf(eta, 32, exact=True)
        for T in range(33):
            assert s.values[T] == g.values[T]


def test_nested_sum_matches_series():
    for eta in (0.0, 0.5, 0.8):
        s = pmf_series(uniform_model(eta), 8, exact=True)
        for T in range(9):
            assert s.values[T] == pmf_uniform_nested(eta, T)


def test_nested_sum_caps_horizon():
    with pytest.raises(ParameterError):
        pmf_uniform_nested(0.5, 9)


def test_bounds_sandwich_series():
    for eta in (0.2, 0.5, 0.9):
        m = uniform_model(eta)
        s = pmf_series(m, 20, exact=True)
        for T in range(21):
            lo, hi = pmf_bounds(m, T, exact=True)
            assert lo <= s.values[T] <= hi


def test_beta_family_closed_form_vs_quadrature():
    F = parse_distribution("powdens:alpha=0.5")
    G = parse_distribution("betalike:alpha=0,beta=1")
    m = ThresholdModel(F=F, G=G, eta=1.0)
    t = moments(m, 6)
    # closed-form gamma-ratio values equal the quadrature table
    from heavytails.intermittency import _beta_model_params
    alpha, beta = _beta_model_params(m.F, m.G)
    from math import exp, lgamma
    for n in range(7):
        ref = exp(lgamma(2 + beta) + lgamma(1 + n * (1 + alpha))
                  - lgamma(2 + beta + n * (1 + alpha)))
        assert t.A[n] == pytest.approx(ref, rel=1e-9)


def test_stirling_asymptote_approaches_exact():
    ratio = pmf_eta1_beta(0.5, 0.5, 5000) / stirling_eta1_beta(0.5, 0.5, 5000)
    assert ratio == pytest.approx(1.0, abs=0.01)


def test_simulation_agrees_with_series():
    m = uniform_model(0.7)
    exact = pmf_series(m, 10, exact=True)
    pmf = simulate_episodes(m, 400000, seed=11)
    for T in range(11):
        err = abs(pmf.values[T] - float(exact.values[T]))
        assert err < 4.5 * max(pmf.stderr[T], 1e-9)


def test_simulation_point_threshold():
    m = ThresholdModel(F=parse_distribution("uniform"),
                       G=parse_distribution("point:x0=0.5"), eta=0.0)
    pmf = simulate_episodes(m, 200000, seed=12)
    # survival chance 1/2 per step
    assert pmf.values[3] == pytest.approx(0.5 ** 4, abs=0.005)


def test_crossover_properties():
    s0, s1, tc = crossover(0.5)
    assert -np.log(1 - 0.5 * s0) == pytest.approx(s0, abs=1e-11)
    assert s1 == pytest.approx(2.0)
    assert tc == pytest.approx(1.0 / np.log(s0))
    for eta in np.arange(0.1, 0.995, 0.05):
        s0, _, _ = crossover(float(eta))
        assert eta < 1.0 / s0 <= (1 + eta) / 2 + 1e-12


def test_simulation_reproducible():
    m = uniform_model(0.4)
    a = simulate_episodes(m, 50000, seed=5)
    b = simulate_episodes(m, 50000, seed=5)
    assert np.array_equal(a.counts, b.counts)
