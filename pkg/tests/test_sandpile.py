import numpy as np
import pytest

from heavytails.errors import ConfigError
from heavytails.sandpile import (LatticeConfig, Sandpile, fss_fit,
                                 planted_fss_samples, run_avalanches)


def test_config_validation():
    with pytest.raises(ConfigError):
        LatticeConfig(L=2, model="btw")
    with pytest.raises(ConfigError):
        LatticeConfig(L=8, model="nosuch")
    with pytest.raises(ConfigError):
        LatticeConfig(L=8, model="zhang", exact=True)


def test_integer_mode_energy_audit_is_exact():
    _, _, pile = run_avalanches(LatticeConfig(L=16, model="btw", exact=True),
                                5000, seed=1)
    assert pile.energy_residual() == 0


def test_float_modes_conserve_energy():
    for model, exact in (("btw", False), ("zhang", False)):
        _, _, pile = run_avalanches(LatticeConfig(L=16, model=model),
                                    5000, seed=2)
        assert abs(pile.energy_residual()) < 1e-8


def test_avalanche_records_are_consistent():
    recs, dists, _ = run_avalanches(LatticeConfig(L=16, model="btw",
                                                  exact=True), 3000, seed=3)
    for r in recs[:200]:
        assert 1 <= r.a <= r.s
        assert 1 <= r.t <= r.s
    assert dists["s"].count == len(recs)


def test_avalanche_sizes_are_broad():
    _, dists, _ = run_avalanches(LatticeConfig(L=32, model="btw", exact=True),
                                 30000, seed=4)
    s = dists["s"].samples
    assert s.max() / np.median(s) > 100


def test_run_reproducible():
    cfg = LatticeConfig(L=16, model="zhang")
    a = run_avalanches(cfg, 2000, seed=5)[1]["s"].samples
    b = run_avalanches(cfg, 2000, seed=5)[1]["s"].samples
    assert np.array_equal(a, b)


def test_planted_exponent_recovery():
    samples = {L: planted_fss_samples(L, 150000, tau=1.4, sigma=2.2, seed=6)
               for L in (16, 32, 64, 128)}
    fit = fss_fit(samples)
    assert fit.tau == pytest.approx(1.4, abs=0.05)
    assert fit.sigma == pytest.approx(2.2, abs=0.1)
    assert fit.collapse < 0.3


def test_fss_needs_multiple_sizes():
    samples = {16: planted_fss_samples(16, 1000, tau=1.4, sigma=2.0, seed=7)}
    with pytest.raises(Exception):
        fss_fit(samples)
