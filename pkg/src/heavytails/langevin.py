"""Multiplicative-noise linear recursion x(t+1) = b(t) x(t) + f(t).

The amplification draws b(t) are nonnegative, the additive noise f(t)
has zero mean.  When <b^2> < 1 the second moment settles at
<f^2> / (1 - <b^2>); with occasional amplification above 1 the
stationary law grows a power tail whose index we estimate from the
CCDF of |x|.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels, rng as rngmod
from .distributions import Distribution
from .errors import (InsufficientDataError, NonPowerLawError,
                     NoStationarySolutionError, ParameterError)
from .tails import EmpiricalDistribution, fit_tail_loglog, is_non_power_law

__all__ = ["LangevinParams", "LangevinRun", "simulate_langevin",
           "stationary_second_moment", "estimate_tail_beta"]


@dataclass
class LangevinParams:
    b_law: Distribution
    f_law: Distribution
    burn_in: int = 10_000
    stride: int = 10
    x0: float = 0.0

    def __post_init__(self):
        if self.b_law.support[0] < 0.0:
            raise ParameterError("amplification law must have nonnegative support")
        if abs(self.f_law.mean()) > 1e-9:
            raise ParameterError("additive-noise law must have zero mean")
        if self.burn_in < 0 or self.stride < 1:
            raise ParameterError("burn_in >= 0 and stride >= 1 required")


@dataclass
class LangevinRun:
    samples: EmpiricalDistribution
    trace: list = field(default_factory=list)  # (t, running <x^2>)
    diverged_at: int = None
    raw: np.ndarray = None

    @property
    def diverged(self):
        return self.diverged_at is not None


def stationary_second_moment(b2, f2):
    """<x^2> at stationarity: f2 / (1 - b2), defined only for b2 < 1."""
    if f2 < 0.0:
        raise ParameterError("f2 must be >= 0")
    if b2 >= 1.0:
        raise NoStationarySolutionError(
            f"second moment diverges for <b^2> = {b2} >= 1")
    return f2 / (1.0 - b2)


def simulate_langevin(params, n_steps, seed):
    """Run the recursion for n_steps and collect post-burn-in samples.

    Samples are taken every `stride` steps after `burn_in`.  A
    trajectory leaving the numeric range produces a run flagged with
    the diverging step index rather than an exception.
    """
    if n_steps <= params.burn_in:
        raise ParameterError("n_steps must exceed burn_in")
    b = np.asarray(params.b_law.sample(rngmod.stream(seed, 0), n_steps), dtype=float)
    f = np.asarray(params.f_law.sample(rngmod.stream(seed, 1), n_steps), dtype=float)
    x, diverged = kernels.langevin_path(b, f, params.x0)
    end = diverged if diverged >= 0 else n_steps + 1
    idx = np.arange(params.burn_in, min(end, n_steps + 1), params.stride)
    samples = x[idx]
    trace = []
    if samples.size:
        running = np.cumsum(samples * samples) / np.arange(1, samples.size + 1)
        trace = list(zip(idx.tolist(), running.tolist()))
    emp = EmpiricalDistribution(samples) if samples.size else None
    return LangevinRun(samples=emp, trace=trace,
                       diverged_at=(diverged if diverged >= 0 else None),
                       raw=x)


def estimate_tail_beta(run, q_lo=0.95, q_hi=0.9995):
    """Fit the CCDF of |x| on a quantile window; rejects light tails.

    Returns a TailFit whose exponent is beta > 0 in Pr[|x| > X] ~ X^{-beta}.
    """
    if run.samples is None or run.samples.count < 10_000:
        raise InsufficientDataError("need >= 1e4 samples for a tail estimate")
    absx = np.abs(run.samples.samples)
    emp = EmpiricalDistribution(absx)
    xmin = emp.quantile(q_lo)
    xmax = emp.quantile(q_hi)
    if not (xmin > 0 and xmax > xmin * 1.0001):
        raise NonPowerLawError("sample has no resolvable tail window")
    if is_non_power_law(emp, xmin, xmax):
        raise NonPowerLawError(
            "local log-log slope magnitude grows across the window; "
            "not a power tail")
    fit = fit_tail_loglog(emp, xmin, xmax)
    beta = -fit.exponent
    if not (beta > 0 and math.isfinite(beta)):
        raise NonPowerLawError(f"nonpositive tail exponent {beta}")
    fit.exponent = beta
    return fit
