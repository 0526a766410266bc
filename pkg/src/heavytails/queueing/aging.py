"""Age-structured task population: transport with aging, service, inflow.

The density M(a, t) of tasks at age a obeys

    dM/dt + p(a) dM/da + mu(a) M = G_s(a),

with aging speed p > 0, service (removal) rate mu >= 0, and an inflow
G_s supported on [0, T].  The stationary profile follows from the ODE
p M' + mu M = G_s:

    M(a) = pi(a) * integral_0^a G_s / (p pi),   pi(a) = exp(-int_0^a mu/p),

the integration constant being zero because no tasks enter at age 0
except through G_s.  Beyond the inflow cutoff the tail is governed by
mu/p: proportional to k/a gives the power tail a^(-k); proportional to
k a^(q-1) with q > 0 gives the stretched exponential exp(-(k/q) a^q);
q < 0 leaves M non-decaying (an ever-growing backlog).

Evolution uses first-order upwind advection on the same cell-centered
grid, subject to the CFL condition dt * max(p) <= da.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate as _si

from ..errors import ConfigError

__all__ = ["AgingConfig", "aging_stationary", "aging_evolve"]


def _cumtrapz0(y, x):
    return np.concatenate([[0.0], _si.cumulative_trapezoid(y, x)])


@dataclass
class AgingConfig:
    p: callable                # aging speed p(a) > 0
    mu: callable               # service rate mu(a) >= 0
    inflow: callable           # source G_s(a), zero beyond the cutoff
    cutoff: float              # inflow cutoff T
    a_max: float = None
    da: float = None

    def __post_init__(self):
        if self.cutoff <= 0:
            raise ConfigError("inflow cutoff must be positive")
        if self.a_max is None:
            self.a_max = 20.0 * self.cutoff
        if self.da is None:
            self.da = self.cutoff / 200.0
        if self.a_max <= self.cutoff or self.da <= 0:
            raise ConfigError("grid must resolve the inflow cutoff")

    def grid(self):
        n = int(round(self.a_max / self.da))
        return (np.arange(n) + 0.5) * self.da

    def fields(self, a):
        p = np.asarray(self.p(a), dtype=float) * np.ones_like(a)
        mu = np.asarray(self.mu(a), dtype=float) * np.ones_like(a)
        g = np.asarray(self.inflow(a), dtype=float) * np.ones_like(a)
        g = np.where(a <= self.cutoff, g, 0.0)
        if (p <= 0).any():
            raise ConfigError("aging speed must be strictly positive on the grid")
        if (mu < 0).any():
            raise ConfigError("service rate must be nonnegative")
        return p, mu, g


def _classify(a, p, mu, cutoff):
    """Asymptote class of mu/p from its log-log slope beyond the cutoff."""
    tail = a > 2.0 * cutoff
    at = a[tail]
    rt = mu[tail] / p[tail]
    if (rt <= 0).all():
        return {"kind": "explosive", "q": None, "k": 0.0}
    lx, ly = np.log(at), np.log(rt)
    slope = float(np.polyfit(lx, ly, 1)[0])
    q = slope + 1.0
    if abs(q) < 0.05:
        k = float(np.median(rt * at))
        return {"kind": "power", "q": 0.0, "k": k}
    if q > 0:
        k = float(np.median(rt / at ** (q - 1.0)))
        return {"kind": "stretched-exponential", "q": q, "k": k}
    return {"kind": "explosive", "q": q, "k": None}


def aging_stationary(config):
    """Stationary profile by cumulative quadrature, with classification.

    Returns a dict with the grid, M(a), the asymptote class, and the
    relative residual of the inflow/service balance
    int G_s = int M mu (meaningful when M mu is integrable on the grid).
    """
    a = config.grid()
    p, mu, g = config.fields(a)
    # pi(a) = exp(-int_0^a mu/p); with p(0) = 0 the integral may diverge
    # at the origin, which only drives pi -> inf there and forces the
    # integration constant to zero; start the quadrature at the first cell
    expo = _cumtrapz0(mu / p, a)
    # subtract the running max to keep exp() in range; the product
    # pi * int g/(p pi) is invariant under a constant shift of expo
    log_pi = -expo
    inner = g / p * np.exp(expo - expo.max())
    M = np.exp(log_pi + expo.max()) * _cumtrapz0(inner, a)
    # guard against overflow where pi underflows and the bracket saturates
    M = np.where(np.isfinite(M), M, 0.0)
    inflow_total = float(_si.trapezoid(g, a))
    served_total = float(_si.trapezoid(M * mu, a))
    residual = abs(inflow_total - served_total) / inflow_total
    info = _classify(a, p, mu, config.cutoff)
    info.update({"a": a, "M": M, "balance_residual": residual,
                 "inflow": inflow_total, "served": served_total, "C": 0.0})
    if info["kind"] == "explosive":
        info["stationary"] = False
    else:
        info["stationary"] = True
    return info


def aging_evolve(config, dt, t_end, M0=None):
    """First-order upwind evolution of M(a, t) until t_end."""
    a = config.grid()
    p, mu, g = config.fields(a)
    da = config.da
    if dt * float(p.max()) > da * (1.0 + 1e-12):
        raise ConfigError(
            f"CFL violated: dt*max(p)={dt * p.max():.3g} exceeds da={da:.3g}")
    M = np.zeros_like(a) if M0 is None else np.array(M0, dtype=float)
    n_steps = int(math.ceil(t_end / dt))
    c = dt / da * p
    for _ in range(n_steps):
        upwind = np.empty_like(M)
        upwind[0] = M[0]              # inflow boundary: nothing below age 0
        upwind[1:] = M[1:] - M[:-1]
        M = M - c * upwind + dt * (g - mu * M)
        np.maximum(M, 0.0, out=M)
    return a, M
