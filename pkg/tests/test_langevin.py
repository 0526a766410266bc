import numpy as np
import pytest

from heavytails.distributions import parse_distribution
from heavytails.errors import NoStationarySolutionError, ParameterError
from heavytails.langevin import (LangevinParams, simulate_langevin,
                                 stationary_second_moment)


def make_params(**kw):
    kw.setdefault("b_law", parse_distribution("twopoint:a=0,b=1,p=0.5"))
    kw.setdefault("f_law", parse_distribution("symunif:half=1"))
    return LangevinParams(**kw)


def test_second_moment_formula():
    assert stationary_second_moment(0.5, 0.25) == pytest.approx(0.5)
    with pytest.raises(NoStationarySolutionError):
        stationary_second_moment(1.0, 0.25)


def test_zero_amplification_reduces_to_noise():
    p = make_params(b_law=parse_distribution("point:x0=0"))
    run = simulate_langevin(p, 100000, seed=1)
    x2 = np.mean(run.samples.samples ** 2)
    assert x2 == pytest.approx(1.0 / 3.0, rel=0.05)


def test_running_second_moment_converges():
    p = make_params()
    run = simulate_langevin(p, 400000, seed=2)
    target = stationary_second_moment(0.5, 1.0 / 3.0)
    assert run.trace[-1][1] == pytest.approx(target, rel=0.05)
    assert run.diverged_at is None


def test_supercritical_runs_away():
    p = make_params(b_law=parse_distribution("point:x0=2"),
                    f_law=parse_distribution("symunif:half=1"))
    run = simulate_langevin(p, 200000, seed=3)
    assert run.diverged_at is not None


def test_rejects_biased_noise():
    with pytest.raises(ParameterError):
        make_params(f_law=parse_distribution("uniform"))


def test_seed_reproducibility():
    p = make_params()
    a = simulate_langevin(p, 50000, seed=9)
    b = simulate_langevin(p, 50000, seed=9)
    assert np.array_equal(a.samples.samples, b.samples.samples)
