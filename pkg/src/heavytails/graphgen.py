"""Static random-graph generators with preference-weighted target choice.

Two constructions are provided.  In the group model the population is
partitioned into groups C_1, C_2, ... whose sizes fall off as a power
gamma of the group index; a member of C_i makes i directed choices, and
each choice lands on a vertex of C_j with probability proportional to
j^alpha.  In the rarity-weighted model every vertex carries a trait
omega drawn from a density phi, and choices land on y with probability
proportional to phi(omega(y))^(-alpha): the rarer the trait, the more
attractive the vertex.

Choices are the elementary events (bookkept in d_out/d_in); the
reported undirected graph collapses multi-edges and self-choices are
redrawn.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from . import rng as rngmod
from .distributions import Distribution, Exponential
from .errors import ConfigError, ParameterError
from .tails import EmpiricalDistribution, TailFit, fit_tail_loglog

__all__ = ["DmaConfig", "CameoConfig", "GeneratedGraph",
           "generate_dma_graph", "generate_cameo_graph",
           "omega_star_density", "degree_stats", "group_sizes"]


def group_sizes(n, gamma, c1=None):
    """Sizes |C_i| ~ c1 * n / i^gamma with largest-remainder rounding.

    Sum over i equals n exactly.  Returns an array indexed from group 1.
    """
    i = np.arange(1, n + 1, dtype=float)
    raw = i ** (-gamma)
    if c1 is None:
        c1 = 1.0 / raw.sum()
    quota = c1 * n * raw
    # renormalize so the quotas sum to n exactly (the asymptotic law fixes
    # only the shape; an off-scale c1 cannot change the population size)
    quota *= n / quota.sum()
    sizes = np.floor(quota).astype(np.int64)
    deficit = n - int(sizes.sum())
    if deficit > 0:
        order = np.argsort(-(quota - sizes), kind="stable")
        sizes[order[:deficit]] += 1
    keep = sizes > 0
    sizes = sizes[keep]
    if sizes.size == 0 or sizes[0] <= 0:
        raise ConfigError("group-size law leaves C_1 empty")
    return sizes


@dataclass
class DmaConfig:
    n: int
    gamma: float
    alpha: float
    c1: float = None

    def __post_init__(self):
        if self.n < 1:
            raise ConfigError("need n >= 1 vertices")
        if not self.gamma > 2.0:
            raise ConfigError(f"gamma must exceed 2, got {self.gamma}")
        if not self.alpha < self.gamma - 1.0:
            raise ConfigError(
                f"alpha must be < gamma - 1 for a convergent normalization, "
                f"got alpha={self.alpha}, gamma={self.gamma}")


@dataclass
class CameoConfig:
    n: int
    alpha: float
    phi: Distribution = field(default_factory=lambda: Exponential(1.0))
    out_degree: int = 3

    def __post_init__(self):
        if self.n < 1:
            raise ConfigError("need n >= 1 vertices")
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError(f"alpha must lie in (0,1), got {self.alpha}")
        if self.out_degree < 0:
            raise ConfigError("out_degree must be >= 0")
        lo, hi = self.phi.support
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("error", integrate.IntegrationWarning)
                val, err = integrate.quad(
                    lambda w: float(self.phi.pdf(w)) ** (1.0 - self.alpha),
                    lo, hi, limit=200)
        except Exception as exc:
            raise ConfigError(f"phi^(1-alpha) is not integrable: {exc}") from exc
        if not math.isfinite(val) or val > 1e12 or err > max(1e-6 * val, 1e-9):
            raise ConfigError("phi^(1-alpha) integral did not converge")


@dataclass
class GeneratedGraph:
    n: int
    edges: np.ndarray          # (m, 2) deduplicated undirected pairs
    labels: np.ndarray         # group index (int) or omega value (float)
    d_out: np.ndarray          # directed choices made
    d_in: np.ndarray           # directed choices received
    d: np.ndarray              # simple-graph degree
    n_choices: int = 0

    def __post_init__(self):
        if self.edges.size and (self.edges[:, 0] == self.edges[:, 1]).any():
            raise ParameterError("self-loop in generated graph")


def _make_choices(rng, sources, weights, n):
    """Draw one target per source with prob ~ weights, never the source."""
    cum = np.cumsum(weights)
    total = cum[-1]
    targets = np.searchsorted(cum, rng.random(sources.size) * total, side="right")
    np.clip(targets, 0, n - 1, out=targets)
    # redraw self-choices
    bad = np.flatnonzero(targets == sources)
    while bad.size:
        t = np.searchsorted(cum, rng.random(bad.size) * total, side="right")
        np.clip(t, 0, n - 1, out=t)
        targets[bad] = t
        bad = bad[t == sources[bad]]
    return targets


def _assemble(n, sources, targets, labels):
    if sources.size:
        directed = np.unique(np.stack([sources, targets], axis=1), axis=0)
    else:
        directed = np.empty((0, 2), dtype=np.int64)
    d_out = np.bincount(directed[:, 0], minlength=n)
    d_in = np.bincount(directed[:, 1], minlength=n)
    if directed.size:
        lo = np.minimum(directed[:, 0], directed[:, 1])
        hi = np.maximum(directed[:, 0], directed[:, 1])
        und = np.unique(np.stack([lo, hi], axis=1), axis=0)
        d = np.bincount(und.ravel(), minlength=n)
    else:
        d = np.zeros(n, dtype=np.int64)
    return GeneratedGraph(n=n, edges=directed, labels=labels,
                          d_out=d_out, d_in=d_in, d=d,
                          n_choices=int(sources.size))


def generate_dma_graph(config, seed):
    n = config.n
    sizes = group_sizes(n, config.gamma, config.c1)
    group = np.repeat(np.arange(1, sizes.size + 1), sizes)
    if n == 1:
        return _assemble(1, np.empty(0, np.int64), np.empty(0, np.int64), group)
    # a member of C_i makes i choices; target weight is j^alpha per vertex
    sources = np.repeat(np.arange(n), group)
    weights = group.astype(float) ** config.alpha
    rng = rngmod.stream(seed, 0)
    targets = _make_choices(rng, sources, weights, n)
    return _assemble(n, sources, targets, group)


def generate_cameo_graph(config, seed):
    n = config.n
    rng = rngmod.stream(seed, 0)
    omega = np.asarray(config.phi.sample(rng, n), dtype=float)
    if n == 1:
        return _assemble(1, np.empty(0, np.int64), np.empty(0, np.int64), omega)
    dens = np.asarray(config.phi.pdf(omega), dtype=float)
    if (dens <= 0).any():
        raise ConfigError("phi density vanishes at a sampled trait value")
    # normalization uses the realized trait sample
    weights = dens ** (-config.alpha)
    sources = np.repeat(np.arange(n), config.out_degree)
    targets = _make_choices(rng, sources, weights, n)
    return _assemble(n, sources, targets, omega)


def omega_star_density(phi, alpha, w):
    """Density of the effective attractivity w* = phi(omega)^(-alpha).

    Closed form for an exponential trait law with rate r: support starts
    at w0 = r^(-alpha) and the density is (1/alpha) w0^(1/alpha) w^(-1-1/alpha).
    """
    if not isinstance(phi, Exponential):
        raise ParameterError("closed form implemented for the exponential trait law")
    if not 0.0 < alpha < 1.0:
        raise ParameterError(f"alpha must lie in (0,1), got {alpha}")
    w = np.asarray(w, dtype=float)
    w0 = phi.rate ** (-alpha)
    out = (1.0 / alpha) * w0 ** (1.0 / alpha) * np.maximum(w, w0) ** (-1.0 - 1.0 / alpha)
    return np.where(w >= w0, out, 0.0)


def degree_stats(g, xmin=None, xmax=None):
    """Degree sequences plus a CCDF tail fit of the total degree."""
    if g.n == 0 or not g.edges.size:
        raise ParameterError("degree_stats needs a nonempty graph")
    emp = EmpiricalDistribution(g.d[g.d > 0])
    if xmin is None:
        xmin = max(3.0, emp.quantile(0.5))
    if xmax is None:
        xmax = max(emp.quantile(0.999), xmin * 4.0)
    try:
        fit = fit_tail_loglog(emp, xmin, xmax)
    except Exception:
        fit = TailFit(exponent=float("nan"), stderr=0.0,
                      window=(float(xmin), float(xmax)),
                      method="loglog-regression")
    return {"d_in": g.d_in, "d_out": g.d_out, "d": g.d, "fit": fit}


def mean_indegree_by_group(g, min_members=10):
    """(group index, mean d_in) over groups with enough members."""
    groups = g.labels.astype(np.int64)
    counts = np.bincount(groups)
    sums = np.bincount(groups, weights=g.d_in)
    idx = np.flatnonzero(counts >= min_members)
    idx = idx[idx >= 1]
    return idx, sums[idx] / counts[idx]
