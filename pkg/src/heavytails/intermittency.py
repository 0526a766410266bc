"""Threshold-of-instability episodes and the laminar-phase length law.

An episode starts by drawing a state x from F and a threshold y from
G; it survives while x < y (a tie stops it).  At every later step the
state alone is redrawn with probability eta (threshold frozen), else
both are redrawn.  The observable is the stopping time T.

The analytic engine rests on the moment integrals
A(n) = int dG(y) F(y)^n and B(n) = A(n) - A(n+1), from which P(T)
follows by generating-function arithmetic.  Several independent
routes to the same numbers (closed forms at eta in {0,1}, a
log-series form for the uniform/uniform pair, a brute-force nested
sum for small T, and exponential sandwich bounds) cross-check one
another in the tests.
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

import numpy as np
from scipy import integrate

from . import kernels, rng as rngmod
from .distributions import (BetaLike, Distribution, PointMass, PowerDensity,
                            Uniform, check_unit_law)
from .errors import NumericError, ParameterError
from .series import PowerSeries

__all__ = [
    "ThresholdModel", "MomentTable", "LaminarPhasePMF",
    "simulate_episodes", "moments",
    "pmf_series", "pmf_eta0", "pmf_eta1",
    "pmf_eta1_beta", "stirling_eta1_beta",
    "pmf_bounds", "pmf_uniform_gf", "pmf_uniform_nested", "crossover",
]


def _as_fraction(x):
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    return Fraction(str(float(x)))


@dataclass
class ThresholdModel:
    F: Distribution      # state law on [0, 1]
    G: Distribution      # threshold law on [0, 1]
    eta: float

    def __post_init__(self):
        check_unit_law(self.F, "state law F")
        check_unit_law(self.G, "threshold law G")
        if not 0.0 <= self.eta <= 1.0:
            raise ParameterError(f"eta must lie in [0,1], got {self.eta}")


@dataclass
class MomentTable:
    A: list
    B: list
    exact: bool = False

    def __post_init__(self):
        tol = 0 if self.exact else 1e-12
        A = self.A
        if abs(A[0] - 1) > tol:
            raise ParameterError("A(0) must equal 1")
        A1 = A[1] if len(A) > 1 else None
        for n in range(1, len(A)):
            if A[n] > A[n - 1] + tol:
                raise ParameterError(f"A must be nonincreasing (n={n})")
            if A[n] > A1 + tol or A[n] < A1 ** n - tol:
                raise ParameterError(f"A(1)^n <= A(n) <= A(1) violated at n={n}")
        for n, b in enumerate(self.B):
            if b < -tol:
                raise ParameterError(f"B({n}) negative")

    @property
    def n_max(self):
        return len(self.B) - 1


@dataclass
class LaminarPhasePMF:
    values: list                       # P(0..T_max)
    provenance: str                    # monte-carlo(n) | series | closed-form
    n_episodes: int = 0
    censored: int = 0
    counts: np.ndarray = None
    stderr: np.ndarray = None
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        tol = 1e-9
        run = 0.0
        for v in self.values:
            if v < -tol or v > 1 + tol:
                raise ParameterError("pmf value outside [0,1]")
            run += float(v)
            if run > 1 + 1e-6:
                raise ParameterError("pmf partial sums exceed 1")

    def __getitem__(self, T):
        return self.values[T]

    def __len__(self):
        return len(self.values)


# ---------------------------------------------------------------------------
# moments


def _beta_model_params(F, G):
    """(alpha, beta) if (F, G) is the neutral-fixed-point family, else None.

    F has density (1+alpha) u^alpha, G has density (1+beta) (1-u)^beta.
    """
    if isinstance(F, Uniform):
        alpha = 0.0
    elif isinstance(F, PowerDensity):
        alpha = F.alpha
    elif isinstance(F, BetaLike) and F.beta == 0.0:
        alpha = F.alpha
    else:
        return None
    if isinstance(G, Uniform):
        beta = 0.0
    elif isinstance(G, BetaLike) and G.alpha == 0.0:
        beta = G.beta
    elif isinstance(G, PowerDensity) and G.alpha == 0.0:
        beta = 0.0
    else:
        return None
    return alpha, beta


def _gamma_ratio(x, beta):
    """Gamma(2+beta) Gamma(x) / Gamma(x + 1 + beta) via log-Gamma."""
    return math.exp(math.lgamma(2.0 + beta) + math.lgamma(x)
                    - math.lgamma(x + 1.0 + beta))


def _gamma_ratio_exact(x, beta):
    # integer arguments only: Gamma(2+b) Gamma(x) / Gamma(x+1+b)
    num = math.factorial(1 + beta) * math.factorial(x - 1)
    den = math.factorial(x + beta)
    return Fraction(num, den)


def moments(model, n_max, exact=False):
    """Moment integrals A(0..n_max+1), B(0..n_max) for the model's (F, G)."""
    if n_max < 0:
        raise ParameterError("n_max must be >= 0")
    F, G = model.F, model.G
    params = _beta_model_params(F, G)
    ns = range(n_max + 2)
    if exact:
        if params is None:
            raise ParameterError("exact moments require the uniform/beta family")
        alpha, beta = params
        if alpha == 0.0 and beta == 0.0:
            A = [Fraction(1, n + 1) for n in ns]
        else:
            if alpha != int(alpha) or beta != int(beta):
                raise ParameterError("exact moments need integer family parameters")
            a, b = int(alpha), int(beta)
            A = [_gamma_ratio_exact(n * (1 + a) + 1, b) for n in ns]
    elif params is not None:
        alpha, beta = params
        A = [_gamma_ratio(n * (1.0 + alpha) + 1.0, beta) for n in ns]
    elif isinstance(G, PointMass):
        w = float(np.asarray(F.cdf(G.x0)))
        A = [w ** n for n in ns]
    else:
        A = []
        for n in ns:
            val, err = integrate.quad(
                lambda y, n=n: float(np.asarray(F.cdf(y))) ** n
                * float(np.asarray(G.pdf(y))),
                0.0, 1.0, epsabs=1e-12, epsrel=1e-12, limit=400)
            if err > 1e-10:
                raise NumericError(f"A({n}) quadrature stalled", achieved=err)
            A.append(val)
        A[0] = 1.0 if abs(A[0] - 1.0) < 1e-9 else A[0]
    B = [A[n] - A[n + 1] for n in range(n_max + 1)]
    return MomentTable(A=A, B=B, exact=exact)


# ---------------------------------------------------------------------------
# simulation


def _w_sampler(model):
    """Sampler for w = F(y), y ~ G: the per-step survival probability."""
    F, G = model.F, model.G

    def sample_w(rng, size):
        y = G.sample(rng, size)
        return np.asarray(F.cdf(y), dtype=float)

    return sample_w


def simulate_episodes(model, n_episodes, t_cap=10_000, seed=0):
    """Monte Carlo laminar-phase histogram with censoring at t_cap."""
    if n_episodes < 1:
        raise ParameterError("need n_episodes >= 1")
    sample_w = _w_sampler(model)
    eta = float(model.eta)
    hist = np.zeros(t_cap + 1, dtype=np.int64)
    if kernels.use_numba():
        rw = rngmod.stream(seed, 0)
        ru = rngmod.stream(seed, 1)
        rc = rngmod.stream(seed, 2)
        state = np.zeros(kernels.STATE_LEN)
        n_done = 0
        while n_done < n_episodes:
            need = n_episodes - n_done
            nbuf = int(min(max(4 * need, 10_000), 8_000_000))
            ws = np.ascontiguousarray(sample_w(rw, nbuf))
            us = ru.random(nbuf)
            cs = rc.random(nbuf)
            state[0] = state[1] = state[2] = 0
            kernels._episodes_numba(ws, us, cs, eta, t_cap, n_episodes,
                                    hist, state)
            n_done = int(state[5])
        censored = int(state[6])
    else:
        rng = rngmod.stream(seed, 0)
        censored = 0
        block = 2_000_000
        left = n_episodes
        while left > 0:
            m = min(block, left)
            censored += kernels._episodes_numpy(sample_w, rng, m, eta,
                                                t_cap, hist)
            left -= m
    n_obs = n_episodes - censored
    p = hist / n_episodes
    se = np.sqrt(np.maximum(p * (1.0 - p), 0.0) / n_episodes)
    return LaminarPhasePMF(values=p.tolist(),
                           provenance=f"monte-carlo({n_episodes})",
                           n_episodes=n_episodes, censored=censored,
                           counts=hist, stderr=se,
                           extras={"censored_mass": censored / n_episodes,
                                   "observed": n_obs})


# ---------------------------------------------------------------------------
# generating-function engine


def pmf_series(model, t_max, exact=False):
    """P(0..t_max) by coefficient extraction from the generating function."""
    table = moments(model, t_max + 1, exact=exact)
    A, B = table.A, table.B
    order = t_max + 1
    eta = _as_fraction(model.eta) if exact else float(model.eta)
    one = Fraction(1) if exact else 1.0
    com = one - eta
    A1, B0 = A[1], B[0]
    rho = eta * B[1] + com * A1 * B0
    zero = Fraction(0) if exact else 0.0
    p_c = [zero] + [eta ** l * A[l + 1] for l in range(1, order)]
    q_c = [zero] + [com ** l * A1 ** (l - 1) for l in range(1, order)]
    r_c = [zero] + [eta ** l * (eta * B[l + 1] + com * A[l + 1] * B0)
                    for l in range(1, order)]
    p = PowerSeries(p_c, order=order, exact=exact)
    q = PowerSeries(q_c, order=order, exact=exact)
    r = PowerSeries(r_c, order=order, exact=exact)
    pq = p * q
    numer = r + rho * pq + (rho * A1) * q + A1 * (q * r)
    P = PowerSeries([B0, rho], order=order, exact=exact) \
        + (numer * (PowerSeries([one], order=order, exact=exact) - pq).recip()).shift(1)
    return LaminarPhasePMF(values=[P.coeff(k) for k in range(t_max + 1)],
                           provenance="series")


def pmf_eta0(model, T, exact=False):
    """Closed form at eta = 0: A(1)^T B(0) (pure exponential decay)."""
    table = moments(model, 1, exact=exact)
    return table.A[1] ** T * table.B[0]


def pmf_eta1(model, T, exact=False):
    """Closed form at eta = 1: B(T)."""
    table = moments(model, T, exact=exact)
    return table.B[T]


def pmf_eta1_beta(alpha, beta, T, exact=False):
    """Frozen-threshold law for the neutral-fixed-point family.

    Difference of Gamma ratios, evaluated through log-Gamma so large T
    cannot overflow.
    """
    if alpha <= -1.0 or beta <= -1.0:
        raise ParameterError("family parameters must exceed -1")
    if exact:
        if alpha != int(alpha) or beta != int(beta):
            raise ParameterError("exact evaluation needs integer parameters")
        a, b = int(alpha), int(beta)
        return (_gamma_ratio_exact(T * (1 + a) + 1, b)
                - _gamma_ratio_exact((T + 1) * (1 + a) + 1, b))
    return (_gamma_ratio(T * (1.0 + alpha) + 1.0, beta)
            - _gamma_ratio((T + 1) * (1.0 + alpha) + 1.0, beta))


def stirling_eta1_beta(alpha, beta, T):
    """Large-T asymptote (1+b) Gamma(2+b) (1+a)^(-1-b) / T^(2+b)."""
    return ((1.0 + beta) * math.gamma(2.0 + beta)
            * (1.0 + alpha) ** (-1.0 - beta) / T ** (2.0 + beta))


def pmf_bounds(model, T, exact=False):
    """Exponential sandwich (lower, upper) around P(T), exact at eta in {0,1}."""
    if T == 0:
        b0 = moments(model, 0, exact=exact).B[0]
        return b0, b0
    table = moments(model, T, exact=exact)
    A, B = table.A, table.B
    eta = _as_fraction(model.eta) if exact else float(model.eta)
    one = Fraction(1) if exact else 1.0
    com = one - eta
    A1, B0 = A[1], B[0]
    mix = eta + com * A1
    lower = eta ** T * B[T] + com * A1 ** T * B0
    upper = (eta ** T * B[T]
             + com * A1 * B0 * mix ** (T - 1)
             + eta * A1 * (mix ** (T - 1) - eta ** (T - 1)))
    return lower, upper


def pmf_uniform_gf(eta, t_max, exact=False):
    """Uniform/uniform law via the log-series form of the generating function.

    Valid for eta in (0, 1]; the eta -> 1 coefficients reproduce
    1/((T+1)(T+2)).
    """
    etaf = float(eta)
    if not 0.0 < etaf <= 1.0:
        raise ParameterError("the log-series form needs eta in (0, 1]")
    order = t_max + 2
    eta = _as_fraction(eta) if exact else etaf
    one = Fraction(1) if exact else 1.0
    # gamma(s) = ln(1 - eta s)/(eta s): coefficients -eta^k/(k+1)
    g = [-(eta ** k) / (k + 1) for k in range(order)]
    gamma = PowerSeries(g, order=order, exact=exact)
    one_s = PowerSeries([one], order=order, exact=exact)
    # (1 + gamma)/s: constant term of 1+gamma vanishes, so shift down
    shifted = PowerSeries([g[k + 1] for k in range(order - 1)],
                          order=order, exact=exact)
    numer = shifted - eta * gamma
    denom = one_s + (one - eta) * gamma
    P = numer * denom.recip()
    return LaminarPhasePMF(values=[P.coeff(k) for k in range(t_max + 1)],
                           provenance="series")


def _compositions(k, m):
    """All (l_1..l_m) with l_i >= 1 summing to k."""
    for cuts in combinations(range(1, k), m - 1):
        prev = 0
        parts = []
        for c in cuts:
            parts.append(c - prev)
            prev = c
        parts.append(k - prev)
        yield parts


def _c_mk(m, k):
    total = Fraction(0)
    for parts in _compositions(k, m):
        num = Fraction(1)
        for l in parts:
            num *= l
        den = Fraction(1)
        s = 0
        for i, l in enumerate(parts):
            den *= (l + 1)
            if i < m - 1:
                s += l
                den *= (k - s)
        total += num / den
    return Fraction(math.factorial(m)) * total


def pmf_uniform_nested(eta, T):
    """Small-T brute-force oracle for the uniform/uniform law (T <= 8).

    Enumerates integer compositions directly; exponential in T, kept only
    as an independent check of the series engine.
    """
    if T > 8:
        raise ParameterError("nested-sum oracle limited to T <= 8")
    eta = _as_fraction(eta)
    com = 1 - eta

    def eta_pow(n):
        # 0^0 = 1 so the eta = 0 marginal stays well-defined
        return Fraction(1) if n == 0 else eta ** n

    total = eta_pow(T) / ((T + 1) * (T + 2))
    for k in range(1, T + 1):
        pref = Fraction(1, (T - k + 1) * (T - k + 2) * k)
        for m in range(1, k + 1):
            total += eta_pow(T - m) * com ** m * _c_mk(m, k) * pref
    return total


def crossover(eta, tol=1e-12):
    """Singularity pair of the uniform/uniform generating function.

    Returns (s0, s1, T_c): s0 is the pole where the denominator
    1 + (1-eta) gamma(s) vanishes, s1 = 1/eta the logarithm's branch
    point, and T_c = 1/ln(s0) the crossover time to exponential decay.
    """
    if not 0.0 < eta < 1.0:
        raise ParameterError("crossover defined for eta in (0, 1)")

    # substitute y = -ln(1 - eta*s); the root equation becomes
    # y*(1 - eta) = 1 - e^{-y}, which stays well conditioned even when
    # s0 is exponentially close to 1/eta (large eta).
    def phi(y):
        return -math.expm1(-y) - y * (1.0 - eta)

    lo = 1e-12
    hi = 2.0 / (1.0 - eta)
    if phi(lo) <= 0.0 or phi(hi) >= 0.0:
        raise NumericError("bisection bracket invalid for crossover root")
    while hi - lo > tol * max(1.0, lo):
        mid = 0.5 * (lo + hi)
        if phi(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    y0 = 0.5 * (lo + hi)
    s0 = -math.expm1(-y0) / eta
    return s0, 1.0 / eta, 1.0 / math.log(s0)
