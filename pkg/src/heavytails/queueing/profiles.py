"""Heavy-traffic lead-time-profile (LTP) oracles.

At a snapshot with Q tasks present, heavy-traffic theory predicts the
distribution of lead times (absolute deadline minus now) across those
tasks.  Everything is expressed through the integrated CCDF of the
relative-deadline law G,

    H(v) = integral_v^inf (1 - G(x)) dx,

which is finite exactly when G has a finite mean.

Under the earliest-deadline-first rule the profile has a sharp left
frontier: the oldest work sits at lead time F(Q), where F(Q) solves
Q/lambda = H(F(Q)) while that solution stays above the left support
edge l of G (Q <= Q* = lambda H(l)), and otherwise moves linearly,
F(Q) = <D> - Q/lambda.  Above the frontier the profile CDF is
1 - (lambda/Q) H(x); for Q > Q* a uniform belt of density lambda/Q
fills [F(Q), l).

Under FCFS the lead time of a waiting task is its deadline D minus an
age uniform on [0, Q/lambda], so the profile is the convolution of G
with the uniform law on [-Q/lambda, 0].
"""

import math

import numpy as np

from ..distributions import Distribution
from ..errors import InsufficientDataError, NoFrontierError, ParameterError
from ..tails import EmpiricalDistribution, ks_distance

__all__ = ["frontier", "analytic_ltp_edf", "analytic_ltp_fcfs",
           "snapshot_compare"]


def _check(G, lam, Q):
    if Q <= 0 or lam <= 0:
        raise ParameterError("need Q > 0 and lambda > 0")
    if not math.isfinite(G.mean()):
        raise NoFrontierError(
            "deadline law has no finite mean; the heavy-traffic profile "
            "theory does not apply")


def frontier(G, lam, Q):
    """Left edge of the heavy-traffic EDF profile.

    Returns (F_of_Q, Q_star, F_hat) where F_hat is the root of
    Q/lambda = H(F_hat) (clamped at the support edge), Q_star the queue
    length at which the root reaches the support edge, and F_of_Q the
    actual frontier (equal to F_hat for Q <= Q_star, else <D> - Q/lambda).
    """
    _check(G, lam, Q)
    ell = max(G.support[0], 0.0)
    H = G.integrated_ccdf
    q_star = lam * H(ell)
    target = Q / lam
    mean_d = G.mean()
    if Q >= q_star:
        f_q = mean_d - target
        return f_q, q_star, ell
    # bisection on [ell, hi] where H(hi) < target < H(ell)
    lo = ell
    hi = max(ell + 1.0, 2.0 * mean_d)
    while H(hi) > target:
        hi = ell + 2.0 * (hi - ell)
        if hi > 1e12:
            raise NoFrontierError("frontier bracket failed")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if H(mid) > target:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-13 * max(1.0, abs(hi)):
            break
    f_hat = 0.5 * (lo + hi)
    return f_hat, q_star, f_hat


def analytic_ltp_edf(G, lam, Q):
    """Closed-form EDF lead-time-profile CDF as a callable."""
    f_q, q_star, _ = frontier(G, lam, Q)
    ell = max(G.support[0], 0.0)
    H = G.integrated_ccdf
    ratio = lam / Q

    def cdf(x):
        x = np.asarray(x, dtype=float)
        flat = np.atleast_1d(x).astype(float)
        out = np.empty(flat.shape)
        below = flat < f_q
        belt = (~below) & (flat < ell)
        top = flat >= max(ell, f_q)
        out[below] = 0.0
        out[belt] = ratio * (flat[belt] - f_q)
        out[top] = 1.0 - ratio * np.array([H(v) for v in flat[top]])
        out = np.clip(out, 0.0, 1.0)
        return out.reshape(x.shape) if x.shape else float(out[0])

    return cdf


def analytic_ltp_fcfs(G, lam, Q):
    """FCFS profile: G convolved with the uniform law on [-Q/lambda, 0]."""
    _check(G, lam, Q)
    H = G.integrated_ccdf
    width = Q / lam
    ratio = lam / Q

    def cdf(x):
        x = np.asarray(x, dtype=float)
        flat = np.atleast_1d(x)
        out = 1.0 - ratio * np.array([H(v) - H(v + width) for v in flat])
        out = np.clip(out, 0.0, 1.0)
        return out.reshape(x.shape) if x.shape else float(out[0])

    return cdf


def snapshot_compare(snapshots, G, lam, q_window, policy="edf",
                     min_obs=500):
    """KS distance between pooled snapshot lead times and the oracle.

    Pools every snapshot whose queue length falls in q_window and
    evaluates the analytic profile at the window's central Q.
    """
    lo, hi = q_window
    pooled = [leads for (_t, q, leads) in snapshots if lo <= q <= hi]
    if not pooled:
        raise InsufficientDataError("no snapshots in the queue-length window")
    obs = np.concatenate(pooled)
    if obs.size < min_obs:
        raise InsufficientDataError(
            f"only {obs.size} pooled lead times, need {min_obs}")
    q_c = 0.5 * (lo + hi)
    if policy == "edf":
        ref = analytic_ltp_edf(G, lam, q_c)
    elif policy == "fcfs":
        ref = analytic_ltp_fcfs(G, lam, q_c)
    else:
        raise ParameterError(f"no analytic profile for policy {policy!r}")
    emp = EmpiricalDistribution(obs)
    return ks_distance(emp, ref), obs.size
