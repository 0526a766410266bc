"""Truncated power-series arithmetic.

A :class:`PowerSeries` holds coefficients c_0 .. c_{N-1} of a formal
series truncated at order N (default 128).  Two coefficient backends are
supported: ``float`` for long series and ``fraction`` (exact rationals)
for oracle tables at modest order.  Mixed-backend arithmetic downgrades
to float.
"""

from fractions import Fraction

import numpy as np

from .errors import ParameterError, SingularSeriesError

DEFAULT_ORDER = 128

__all__ = [
    "PowerSeries", "series_mul", "series_recip", "series_coeff",
    "log_series", "geometric_series", "DEFAULT_ORDER",
]


class PowerSeries:
    def __init__(self, coeffs, order=None, exact=False):
        """coeffs: iterable of leading coefficients (padded with zeros)."""
        coeffs = list(coeffs)
        if order is None:
            order = max(len(coeffs), 1)
        if order < 1:
            raise ParameterError("series order must be >= 1")
        if len(coeffs) > order:
            coeffs = coeffs[:order]
        if exact:
            zero = Fraction(0)
            c = [Fraction(x) for x in coeffs]
        else:
            zero = 0.0
            c = [float(x) for x in coeffs]
        c.extend([zero] * (order - len(c)))
        self.c = c
        self.order = order
        self.exact = bool(exact)

    @classmethod
    def zero(cls, order=DEFAULT_ORDER, exact=False):
        return cls([], order=order, exact=exact)

    @classmethod
    def one(cls, order=DEFAULT_ORDER, exact=False):
        return cls([1], order=order, exact=exact)

    @classmethod
    def x(cls, order=DEFAULT_ORDER, exact=False):
        return cls([0, 1], order=order, exact=exact)

    def coeff(self, k):
        if k < 0:
            raise ParameterError("coefficient index must be >= 0")
        if k >= self.order:
            raise ParameterError(f"order {self.order} series has no coefficient {k}")
        return self.c[k]

    def coeffs_float(self):
        return np.array([float(v) for v in self.c])

    def to_float(self):
        if not self.exact:
            return self
        return PowerSeries(self.c, order=self.order, exact=False)

    def _coerce(self, other):
        if not isinstance(other, PowerSeries):
            other = PowerSeries([other], order=self.order, exact=self.exact)
        order = min(self.order, other.order)
        if self.exact and other.exact:
            return self, other, order, True
        return self.to_float(), other.to_float(), order, False

    def __add__(self, other):
        a, b, order, exact = self._coerce(other)
        return PowerSeries([a.c[k] + b.c[k] for k in range(order)], order=order, exact=exact)

    __radd__ = __add__

    def __neg__(self):
        return PowerSeries([-v for v in self.c], order=self.order, exact=self.exact)

    def __sub__(self, other):
        return self + (-other if isinstance(other, PowerSeries)
                       else PowerSeries([-other], order=self.order, exact=self.exact))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, PowerSeries):
            return PowerSeries([v * other for v in self.c], order=self.order,
                               exact=self.exact and isinstance(other, (int, Fraction)))
        a, b, order, exact = self._coerce(other)
        if not exact:
            # full Cauchy products of float series via FFT-free convolution;
            # numpy convolve is fine at these orders
            out = np.convolve(np.asarray(a.c), np.asarray(b.c))[:order]
            return PowerSeries(out, order=order, exact=False)
        out = [Fraction(0)] * order
        for i, ai in enumerate(a.c):
            if ai == 0:
                continue
            for j in range(order - i):
                bj = b.c[j]
                if bj != 0:
                    out[i + j] += ai * bj
        return PowerSeries(out, order=order, exact=True)

    __rmul__ = __mul__

    def recip(self):
        """Multiplicative inverse; requires c_0 != 0."""
        if self.c[0] == 0:
            raise SingularSeriesError("cannot invert a series with zero constant term")
        inv0 = Fraction(1, 1) / self.c[0] if self.exact else 1.0 / self.c[0]
        out = [inv0] + [Fraction(0) if self.exact else 0.0] * (self.order - 1)
        for k in range(1, self.order):
            s = sum(self.c[j] * out[k - j] for j in range(1, k + 1))
            out[k] = -inv0 * s
        return PowerSeries(out, order=self.order, exact=self.exact)

    def __truediv__(self, other):
        if isinstance(other, PowerSeries):
            return self * other.recip()
        if self.exact and isinstance(other, (int, Fraction)):
            return self * Fraction(1, 1) / other if isinstance(other, Fraction) else self * Fraction(1, other)
        return self * (1.0 / other)

    def shift(self, n=1):
        """Multiply by s^n."""
        if n < 0:
            raise ParameterError("shift must be >= 0")
        zero = Fraction(0) if self.exact else 0.0
        return PowerSeries([zero] * n + self.c, order=self.order, exact=self.exact)

    def __eq__(self, other):
        if not isinstance(other, PowerSeries):
            return NotImplemented
        n = min(self.order, other.order)
        return all(self.c[k] == other.c[k] for k in range(n))

    def __repr__(self):
        head = ", ".join(str(v) for v in self.c[:6])
        tail = ", ..." if self.order > 6 else ""
        return f"PowerSeries([{head}{tail}], order={self.order}, exact={self.exact})"


def series_mul(a, b):
    return a * b


def series_recip(a):
    return a.recip()


def series_coeff(a, k):
    return a.coeff(k)


def geometric_series(r, order=DEFAULT_ORDER, exact=False):
    """1 / (1 - r s) as a series: coefficients r^k."""
    if exact:
        r = Fraction(r)
        c, cur = [], Fraction(1)
    else:
        r = float(r)
        c, cur = [], 1.0
    for _ in range(order):
        c.append(cur)
        cur = cur * r
    return PowerSeries(c, order=order, exact=exact)


def log_series(r, order=DEFAULT_ORDER, exact=False):
    """-ln(1 - r s) = sum_{k>=1} r^k s^k / k."""
    if exact:
        r = Fraction(r)
        c = [Fraction(0)]
        cur = r
        for k in range(1, order):
            c.append(cur / k)
            cur = cur * r
    else:
        r = float(r)
        c = [0.0]
        cur = r
        for k in range(1, order):
            c.append(cur / k)
            cur = cur * r
    return PowerSeries(c, order=order, exact=exact)
