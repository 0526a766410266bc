"""Empirical distributions and tail-index estimation.

Two estimators are provided: a least-squares fit of log CCDF against
log x over a window (the top 3 order statistics are dropped, as the
extreme points are noise-dominated), and the Hill estimator over the
top-k order statistics.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InsufficientDataError, ParameterError

__all__ = [
    "EmpiricalDistribution", "TailFit", "ks_distance",
    "fit_tail_loglog", "fit_loglog_points", "hill_estimator",
    "local_loglog_slopes", "is_non_power_law",
]


class EmpiricalDistribution:
    """Sorted sample container with CDF/CCDF evaluation."""

    def __init__(self, samples):
        s = np.sort(np.asarray(samples, dtype=float).ravel())
        if s.size == 0:
            raise ParameterError("empirical distribution needs at least one sample")
        self.samples = s
        self.count = int(s.size)

    def cdf(self, x):
        return np.searchsorted(self.samples, x, side="right") / self.count

    def ccdf(self, x):
        """Pr[X > x]; nonincreasing, right-continuous at sample points."""
        return 1.0 - self.cdf(x)

    def mean(self):
        return float(self.samples.mean())

    def quantile(self, q):
        return float(np.quantile(self.samples, q))


@dataclass
class TailFit:
    exponent: float
    stderr: float
    window: tuple
    method: str
    n_points: int = 0
    intercept: float = 0.0

    def __post_init__(self):
        if self.stderr < 0.0:
            raise ParameterError("stderr must be >= 0")
        if not self.window[0] < self.window[1]:
            raise ParameterError("fit window must be nonempty")


def ks_distance(emp, cdf):
    """Sup-norm distance between the empirical CDF and a reference CDF."""
    x = emp.samples
    n = emp.count
    ref = np.asarray(cdf(x), dtype=float)
    hi = np.arange(1, n + 1) / n
    lo = np.arange(0, n) / n
    return float(max(np.max(hi - ref), np.max(ref - lo)))


def _least_squares_line(lx, ly):
    n = lx.size
    A = np.vstack([lx, np.ones(n)]).T
    (slope, intercept), res, _, _ = np.linalg.lstsq(A, ly, rcond=None)
    if n > 2:
        ssr = float(res[0]) if res.size else float(np.sum((ly - slope * lx - intercept) ** 2))
        sxx = float(np.sum((lx - lx.mean()) ** 2))
        stderr = np.sqrt(ssr / (n - 2) / sxx) if sxx > 0 else 0.0
    else:
        stderr = 0.0
    return float(slope), float(intercept), float(stderr)


def fit_loglog_points(x, y):
    """Least-squares line through (log x, log y); returns TailFit."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    keep = (x > 0) & (y > 0)
    x, y = x[keep], y[keep]
    if x.size < 2:
        raise InsufficientDataError("need >= 2 positive points for a log-log fit")
    slope, intercept, stderr = _least_squares_line(np.log(x), np.log(y))
    return TailFit(exponent=slope, stderr=stderr,
                   window=(float(x.min()), float(x.max())),
                   method="loglog-regression", n_points=int(x.size),
                   intercept=intercept)


def fit_tail_loglog(emp, xmin, xmax, min_points=30):
    """Fit log CCDF vs log x on samples inside [xmin, xmax].

    The top 3 order statistics of the whole sample are excluded before
    windowing.
    """
    s = emp.samples
    if s.size > 3:
        s_kept = s[:-3]
    else:
        s_kept = s
    inside = s_kept[(s_kept >= xmin) & (s_kept <= xmax) & (s_kept > 0)]
    if inside.size < min_points:
        raise InsufficientDataError(
            f"only {inside.size} samples in window [{xmin}, {xmax}], need {min_points}")
    ccdf = emp.ccdf(inside)
    keep = ccdf > 0
    inside, ccdf = inside[keep], ccdf[keep]
    # thin to at most 2000 points so huge samples do not dominate runtime
    if inside.size > 2000:
        idx = np.unique(np.linspace(0, inside.size - 1, 2000).astype(int))
        inside, ccdf = inside[idx], ccdf[idx]
    slope, intercept, stderr = _least_squares_line(np.log(inside), np.log(ccdf))
    return TailFit(exponent=slope, stderr=stderr, window=(float(xmin), float(xmax)),
                   method="loglog-regression", n_points=int(inside.size),
                   intercept=intercept)


def hill_estimator(emp, k_top):
    """Hill tail-index estimate over the top-k order statistics.

    Returns the index of Pr[X > x] ~ x^{-index} as a positive number.
    """
    if k_top < 10:
        raise ParameterError("hill_estimator requires k_top >= 10")
    s = emp.samples
    if k_top >= s.size:
        raise InsufficientDataError(f"k_top={k_top} >= sample count {s.size}")
    top = s[-k_top:]
    pivot = s[-k_top - 1]
    if pivot <= 0:
        raise ParameterError("hill estimator requires positive samples at the pivot")
    logs = np.log(top / pivot)
    m = float(np.mean(logs))
    if m <= 0:
        raise InsufficientDataError("degenerate top order statistics")
    gamma = 1.0 / m
    stderr = gamma / np.sqrt(k_top)
    return TailFit(exponent=gamma, stderr=float(stderr),
                   window=(float(pivot), float(s[-1])), method="hill",
                   n_points=int(k_top))


def local_loglog_slopes(emp, edges):
    """Local log-log slopes of the CCDF between consecutive window edges.

    A power-law tail has roughly constant local slope; a light tail shows
    slope magnitude growing with x.
    """
    edges = np.asarray(edges, dtype=float)
    cc = emp.ccdf(edges)
    keep = cc > 0
    edges, cc = edges[keep], cc[keep]
    if edges.size < 3:
        raise InsufficientDataError("need >= 3 usable edges for local slopes")
    return np.diff(np.log(cc)) / np.diff(np.log(edges))


def is_non_power_law(emp, xmin, xmax, n_windows=4, growth=1.3):
    """True if local slope magnitude grows with x across the window."""
    edges = np.geomspace(xmin, xmax, n_windows + 1)
    slopes = local_loglog_slopes(emp, edges)
    mags = np.abs(slopes)
    return bool(mags[-1] > growth * mags[0])
