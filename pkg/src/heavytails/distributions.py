"""Probability laws used by the model modules.

Only the laws the models need are implemented: the unit-interval state
and threshold laws, the positive-support service/deadline laws, and the
small discrete/symmetric laws required by the multiplicative-noise map.
Each law exposes cdf / pdf (where defined) / sample / mean / var and a
closed-form integrated CCDF where the queueing oracles need one.

Laws are constructible from a config string, e.g.::

    uniform                 U[0, 1]
    powdens:alpha=0.5       density (1+a) u^a on [0, 1]
    betalike:alpha=0,beta=1 density ~ u^a (1-u)^b on [0, 1]
    exp:rate=1              exponential
    pareto:B=1,omega=3      CCDF (B/x)^(omega-1) for x >= B
    point:x=0.3             point mass
    twopoint:a=-1,b=1,p=0.5 two-point law (value a w.p. p, else b)
    symunif:half=1          U[-half, half]
    lognormal:mu=0,sigma=1  log-normal
"""

import math

import numpy as np
from scipy import integrate, special

from .errors import ParameterError

__all__ = [
    "Distribution", "Uniform", "PowerDensity", "BetaLike", "Exponential",
    "Pareto", "PointMass", "TwoPoint", "SymmetricUniform", "LogNormal",
    "parse_distribution", "sample", "cdf",
]


class Distribution:
    """Common interface; subclasses are immutable after construction."""

    #: (lower, upper) edges of the support
    support = (-math.inf, math.inf)

    def cdf(self, x):
        raise NotImplementedError

    def pdf(self, x):
        raise NotImplementedError

    def sample(self, rng, size=None):
        raise NotImplementedError

    def mean(self):
        raise NotImplementedError

    def var(self):
        raise NotImplementedError

    def integrated_ccdf(self, v):
        """H(v) = integral_v^inf (1 - CDF).  Finite only when the mean is."""
        m = self.mean()
        if not math.isfinite(m):
            return math.inf
        lo = self.support[0]
        if v <= lo:
            return m - max(v, 0.0) if lo >= 0 else self._icc_quad(v)
        return self._icc_quad(v)

    def _icc_quad(self, v):
        val, _ = integrate.quad(lambda x: 1.0 - self.cdf(x), v, math.inf, limit=200)
        return val

    def second_moment(self):
        return self.var() + self.mean() ** 2

    def spec(self):
        """Round-trip config string."""
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}({self.spec()!r})"


class Uniform(Distribution):
    support = (0.0, 1.0)

    def cdf(self, x):
        return np.clip(x, 0.0, 1.0)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where((x >= 0.0) & (x <= 1.0), 1.0, 0.0)

    def sample(self, rng, size=None):
        return rng.random(size)

    def mean(self):
        return 0.5

    def var(self):
        return 1.0 / 12.0

    def integrated_ccdf(self, v):
        if v <= 0.0:
            return 0.5 - v
        if v >= 1.0:
            return 0.0
        return 0.5 * (1.0 - v) ** 2

    def spec(self):
        return "uniform"


class PowerDensity(Distribution):
    """Density (1+alpha) u^alpha on [0, 1]; alpha > -1.  CDF u^(1+alpha)."""

    support = (0.0, 1.0)

    def __init__(self, alpha):
        if not alpha > -1.0:
            raise ParameterError(f"powdens requires alpha > -1, got {alpha}")
        self.alpha = float(alpha)

    def cdf(self, x):
        x = np.clip(x, 0.0, 1.0)
        return x ** (1.0 + self.alpha)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        inside = (x > 0.0) & (x <= 1.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            d = (1.0 + self.alpha) * np.where(inside, x, 1.0) ** self.alpha
        return np.where(inside, d, 0.0)

    def sample(self, rng, size=None):
        return rng.random(size) ** (1.0 / (1.0 + self.alpha))

    def mean(self):
        return (1.0 + self.alpha) / (2.0 + self.alpha)

    def var(self):
        a = self.alpha
        return (1.0 + a) / (3.0 + a) - self.mean() ** 2

    def spec(self):
        return f"powdens:alpha={self.alpha!r}"


class BetaLike(Distribution):
    """Density ~ u^alpha (1-u)^beta on [0, 1], i.e. Beta(alpha+1, beta+1).

    With alpha = 0 this is the threshold family (1+beta)(1-u)^beta; with
    beta = 0 it degenerates to PowerDensity.
    """

    support = (0.0, 1.0)

    def __init__(self, alpha, beta):
        if not (alpha > -1.0 and beta > -1.0):
            raise ParameterError(f"betalike requires alpha, beta > -1, got {alpha}, {beta}")
        self.alpha = float(alpha)
        self.beta = float(beta)
        self._a = self.alpha + 1.0
        self._b = self.beta + 1.0

    def cdf(self, x):
        x = np.clip(x, 0.0, 1.0)
        return special.betainc(self._a, self._b, x)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        inside = (x > 0.0) & (x < 1.0)
        xs = np.where(inside, x, 0.5)
        d = xs ** self.alpha * (1.0 - xs) ** self.beta / special.beta(self._a, self._b)
        return np.where(inside, d, 0.0)

    def sample(self, rng, size=None):
        if self.beta == 0.0:
            return rng.random(size) ** (1.0 / self._a)
        if self.alpha == 0.0:
            u = rng.random(size)
            return -np.expm1(np.log1p(-u) / self._b)
        return rng.beta(self._a, self._b, size)

    def mean(self):
        return self._a / (self._a + self._b)

    def var(self):
        a, b = self._a, self._b
        return a * b / ((a + b) ** 2 * (a + b + 1.0))

    def spec(self):
        return f"betalike:alpha={self.alpha!r},beta={self.beta!r}"


class Exponential(Distribution):
    support = (0.0, math.inf)

    def __init__(self, rate):
        if not rate > 0.0:
            raise ParameterError(f"exp requires rate > 0, got {rate}")
        self.rate = float(rate)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x > 0.0, -np.expm1(-self.rate * np.maximum(x, 0.0)), 0.0)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x >= 0.0, self.rate * np.exp(-self.rate * np.minimum(x, 7e2 / self.rate)), 0.0)

    def sample(self, rng, size=None):
        return -np.log1p(-rng.random(size)) / self.rate

    def mean(self):
        return 1.0 / self.rate

    def var(self):
        return 1.0 / self.rate ** 2

    def integrated_ccdf(self, v):
        if v <= 0.0:
            return 1.0 / self.rate - v
        return math.exp(-self.rate * v) / self.rate

    def spec(self):
        return f"exp:rate={self.rate!r}"


class Pareto(Distribution):
    """CCDF (B/x)^(omega-1) for x >= B; no moment of order omega-1 or higher."""

    def __init__(self, B, omega):
        if not (B > 0.0 and omega > 1.0):
            raise ParameterError(f"pareto requires B > 0 and omega > 1, got B={B}, omega={omega}")
        self.B = float(B)
        self.omega = float(omega)
        self.support = (self.B, math.inf)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x >= self.B, 1.0 - (self.B / np.maximum(x, self.B)) ** (self.omega - 1.0), 0.0)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        xs = np.maximum(x, self.B)
        d = (self.omega - 1.0) * self.B ** (self.omega - 1.0) * xs ** (-self.omega)
        return np.where(x >= self.B, d, 0.0)

    def sample(self, rng, size=None):
        u = rng.random(size)
        return self.B * (1.0 - u) ** (-1.0 / (self.omega - 1.0))

    def mean(self):
        if self.omega <= 2.0:
            return math.inf
        return (self.omega - 1.0) * self.B / (self.omega - 2.0)

    def var(self):
        if self.omega <= 3.0:
            return math.inf
        w = self.omega - 1.0
        m2 = w * self.B ** 2 / (w - 2.0)
        return m2 - self.mean() ** 2

    def integrated_ccdf(self, v):
        if self.omega <= 2.0:
            return math.inf
        if v <= self.B:
            return self.mean() - v
        return self.B ** (self.omega - 1.0) * v ** (2.0 - self.omega) / (self.omega - 2.0)

    def spec(self):
        return f"pareto:B={self.B!r},omega={self.omega!r}"


class PointMass(Distribution):
    def __init__(self, x0):
        self.x0 = float(x0)
        self.support = (self.x0, self.x0)

    def cdf(self, x):
        # left-continuous convention: Pr[X < x]
        x = np.asarray(x, dtype=float)
        return np.where(x > self.x0, 1.0, 0.0)

    def pdf(self, x):
        raise ParameterError("point mass has no density")

    def sample(self, rng, size=None):
        if size is None:
            return self.x0
        return np.full(size, self.x0)

    def mean(self):
        return self.x0

    def var(self):
        return 0.0

    def integrated_ccdf(self, v):
        return max(self.x0 - v, 0.0)

    def spec(self):
        return f"point:x={self.x0!r}"


class TwoPoint(Distribution):
    """Value a with probability p, else b."""

    def __init__(self, a, b, p=0.5):
        if not 0.0 <= p <= 1.0:
            raise ParameterError(f"twopoint requires p in [0,1], got {p}")
        self.a = float(a)
        self.b = float(b)
        self.p = float(p)
        lo, hi = sorted((self.a, self.b))
        self.support = (lo, hi)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        lo, hi = sorted((self.a, self.b))
        p_lo = self.p if self.a <= self.b else 1.0 - self.p
        return np.where(x > hi, 1.0, np.where(x > lo, p_lo, 0.0))

    def pdf(self, x):
        raise ParameterError("two-point law has no density")

    def sample(self, rng, size=None):
        u = rng.random(size)
        return np.where(u < self.p, self.a, self.b)

    def mean(self):
        return self.p * self.a + (1.0 - self.p) * self.b

    def var(self):
        return self.p * self.a ** 2 + (1.0 - self.p) * self.b ** 2 - self.mean() ** 2

    def spec(self):
        return f"twopoint:a={self.a!r},b={self.b!r},p={self.p!r}"


class SymmetricUniform(Distribution):
    """U[-half, half]; the zero-mean additive-noise workhorse."""

    def __init__(self, half):
        if not half > 0.0:
            raise ParameterError(f"symunif requires half > 0, got {half}")
        self.half = float(half)
        self.support = (-self.half, self.half)

    def cdf(self, x):
        return np.clip((np.asarray(x, dtype=float) + self.half) / (2.0 * self.half), 0.0, 1.0)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(np.abs(x) <= self.half, 0.5 / self.half, 0.0)

    def sample(self, rng, size=None):
        return (2.0 * rng.random(size) - 1.0) * self.half

    def mean(self):
        return 0.0

    def var(self):
        return self.half ** 2 / 3.0

    def spec(self):
        return f"symunif:half={self.half!r}"


class LogNormal(Distribution):
    support = (0.0, math.inf)

    def __init__(self, mu, sigma):
        if not sigma > 0.0:
            raise ParameterError(f"lognormal requires sigma > 0, got {sigma}")
        self.mu = float(mu)
        self.sigma = float(sigma)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        z = (np.log(np.maximum(x, 1e-300)) - self.mu) / self.sigma
        return np.where(x > 0.0, 0.5 * (1.0 + special.erf(z / math.sqrt(2.0))), 0.0)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        xs = np.maximum(x, 1e-300)
        z = (np.log(xs) - self.mu) / self.sigma
        d = np.exp(-0.5 * z * z) / (xs * self.sigma * math.sqrt(2.0 * math.pi))
        return np.where(x > 0.0, d, 0.0)

    def sample(self, rng, size=None):
        return np.exp(self.mu + self.sigma * rng.standard_normal(size))

    def mean(self):
        return math.exp(self.mu + 0.5 * self.sigma ** 2)

    def var(self):
        s2 = self.sigma ** 2
        return (math.exp(s2) - 1.0) * math.exp(2.0 * self.mu + s2)

    def spec(self):
        return f"lognormal:mu={self.mu!r},sigma={self.sigma!r}"


# ---------------------------------------------------------------------------
# config-string grammar

_KINDS = {
    "uniform": (Uniform, ()),
    "powdens": (PowerDensity, ("alpha",)),
    "betalike": (BetaLike, ("alpha", "beta")),
    "exp": (Exponential, ("rate",)),
    "exponential": (Exponential, ("rate",)),
    "pareto": (Pareto, ("B", "omega")),
    "point": (PointMass, ("x0",)),
    "twopoint": (TwoPoint, ("a", "b", "p")),
    "symunif": (SymmetricUniform, ("half",)),
    "lognormal": (LogNormal, ("mu", "sigma")),
}


def parse_distribution(text):
    """Parse a ``kind:key=value,...`` config string into a Distribution."""
    text = text.strip()
    kind, _, args = text.partition(":")
    kind = kind.strip().lower()
    if kind not in _KINDS:
        raise ParameterError(f"unknown distribution kind {kind!r} in {text!r}")
    cls, keys = _KINDS[kind]
    kwargs = {}
    if args.strip():
        for piece in args.split(","):
            key, sep, value = piece.partition("=")
            key = key.strip()
            if not sep or key not in keys:
                raise ParameterError(f"bad parameter {piece!r} for {kind!r} (expected {keys})")
            try:
                kwargs[key] = float(value)
            except ValueError as exc:
                raise ParameterError(f"non-numeric value in {piece!r}") from exc
    # positional order follows the declared key tuple
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ParameterError(f"wrong parameters for {kind!r}: {exc}") from exc


def sample(dist, rng, size=None):
    """Draw from ``dist`` using the given stream."""
    return dist.sample(rng, size)


def cdf(dist, x):
    return dist.cdf(x)


def check_unit_law(dist, name="law"):
    """Validate that dist is a proper CDF on [0, 1] (threshold-model laws)."""
    lo, hi = dist.support
    if lo < -1e-12 or hi > 1.0 + 1e-12:
        raise ParameterError(f"{name} must be supported on [0, 1], got support {dist.support}")
    f0 = float(np.asarray(dist.cdf(0.0)))
    f1 = float(np.asarray(dist.cdf(1.0)))
    if isinstance(dist, PointMass):
        return
    if abs(f0) > 1e-12 or abs(f1 - 1.0) > 1e-12:
        raise ParameterError(f"{name} must satisfy F(0)=0, F(1)=1")
