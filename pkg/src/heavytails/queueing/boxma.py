"""Waiting-time tail evaluators for the M/G/1 and M/M/1 queue.

For an M/G/1 queue whose service tail is regularly varying, the
random-order-of-service waiting tail keeps the service's fat tail with
index 1 - nu; the prefactor carries the constant h(rho, nu), a
one-dimensional integral over (0, 1).  The integrand behaves like
u^(nu-1) near 0, so it is integrable only for nu > 0; the operative
range here is nu in (1, 2), where the service mean exists and the
waiting tail index 1 - nu lands in (-1, 0).  Values of nu outside the
integrable range are rejected.

For the M/M/1 queue: the FCFS waiting tail is a pure exponential of
rate (1 - rho) mu, and the ROS tail picks up the stretched correction
x^(-5/6) exp(-gamma x - delta x^(1/3)).
"""

import math

import numpy as np
from scipy import integrate

from ..errors import NumericError, ParameterError

__all__ = ["boxma_h", "boxma_tail", "ros_mm1_tail", "fcfs_mm1_tail"]


def _check_rho(rho):
    if not 0.0 < rho < 1.0:
        raise ParameterError(f"traffic intensity must lie in (0,1), got {rho}")


def boxma_h(rho, nu):
    """h(rho, nu) = integral_0^1 f(u, rho, nu) du."""
    _check_rho(rho)
    if nu <= 0.0:
        raise ParameterError(
            f"h integrand ~ u^(nu-1) near 0 is non-integrable for nu={nu}; "
            "operative range is nu in (1, 2)")
    r = rho / (1.0 - rho)
    e = 1.0 / (1.0 - rho)

    def f(u):
        return (r * (r * u) ** (nu - 1.0) * (1.0 - u) ** e
                + (1.0 + r) ** nu * (1.0 - u) ** (e - 1.0))

    val, err = integrate.quad(f, 0.0, 1.0, limit=400,
                              points=[0.0, 1.0])
    if not math.isfinite(val) or err > max(1e-8 * abs(val), 1e-10):
        raise NumericError("h quadrature failed", achieved=err)
    return val


def boxma_tail(x, rho, nu, beta=1.0):
    """Shape of Pr(W_ROS > x) for a regularly varying service tail.

    Slowly varying factor fixed to 1; the theorem states a
    proportionality, so only the x-dependence (index 1 - nu) is
    meaningful.
    """
    _check_rho(rho)
    if beta <= 0.0:
        raise ParameterError("mean service time must be positive")
    h = boxma_h(rho, nu)
    c = rho / (1.0 - rho) * h / (beta * math.gamma(2.0 - nu))
    return c * np.asarray(x, dtype=float) ** (1.0 - nu)


def ros_mm1_tail(x, rho):
    """M/M/1 random-order-of-service waiting tail (up to proportionality)."""
    _check_rho(rho)
    sq = math.sqrt(rho)
    c = (2.0 ** (2.0 / 3.0) * 3.0 ** -0.5 * math.pi ** (5.0 / 6.0)
         * rho ** (17.0 / 12.0) * (1.0 + sq) / (1.0 - sq) ** 3
         * math.exp((1.0 + sq) / (1.0 - sq)))
    gamma = (1.0 / sq - 1.0) ** 2
    delta = 3.0 * (math.pi / 2.0) ** (2.0 / 3.0) * rho ** (-1.0 / 6.0)
    x = np.asarray(x, dtype=float)
    return c * x ** (-5.0 / 6.0) * np.exp(-gamma * x - delta * x ** (1.0 / 3.0))


def fcfs_mm1_tail(x, rho, mu):
    """Exact M/M/1 FCFS waiting tail: rho * exp(-(1-rho) mu x) for x >= 0."""
    _check_rho(rho)
    if mu <= 0.0:
        raise ParameterError("service rate must be positive")
    x = np.asarray(x, dtype=float)
    return rho * np.exp(-(1.0 - rho) * mu * np.maximum(x, 0.0))
