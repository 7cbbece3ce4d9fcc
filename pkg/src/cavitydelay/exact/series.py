r"""Truncated power-series (Taylor-jet) arithmetic in arbitrary precision.

The exact marginal densities take high-order derivatives of products like
``I0(sqrt(g^2 - 1)/tau) exp(-g/tau)``. Finite differences are hopeless there
(the derivative order reaches the channel count and the two factors cancel
to many digits), so all differentiation is series-mode: every factor is
expanded as a truncated Taylor series around the evaluation point and the
n-th derivative is read off as ``n! * coefficient_n``.

Coefficients are mpmath numbers; the cancellation inherent in the products
(amplification up to ``(2 gbar^2)^order``) is absorbed by working at
elevated precision and *checked*: series products track the largest term
that contributed to each retained coefficient, giving a running condition
estimate. :class:`PrecisionLossError` fires when the estimated surviving
digits drop below a safety floor.

Bessel I0 composition: for an inner series with zero constant term the even
series ``I0(w) = sum (w^2/4)^m / (m!)^2`` is summed directly; otherwise the
derivative array of ``F(u) = I0(sqrt(u))`` at the constant term u0 is built
from the ODE ``u F'' + F' - F/4 = 0`` (seeds I0, I1) and composed, which
reproduces the recentered even-series coefficients exactly.
"""
from __future__ import annotations

import mpmath as mp

__all__ = [
    "PrecisionLossError",
    "PowerSeriesScalar",
    "besseli0_sqrt_derivs",
    "sqrt_besseli1_derivs",
]

MAX_ORDER = 32


class PrecisionLossError(ArithmeticError):
    """Cancellation exhausted the working precision; raise dps and retry."""


class PowerSeriesScalar:
    """Truncated Taylor series of one scalar variable around a point.

    Supports ring arithmetic, composition with exp and with analytic
    functions given their derivative arrays, and exact derivative
    extraction. ``cond`` carries the largest log10 term-to-result
    amplification seen while building the series.
    """

    __slots__ = ("coeffs", "order", "cond")

    def __init__(self, coeffs, order=None, cond=0.0):
        coeffs = [mp.mpf(c) if not isinstance(c, mp.mpf) else c for c in coeffs]
        if order is None:
            order = len(coeffs) - 1
        if order > MAX_ORDER:
            raise ValueError(f"order {order} exceeds MAX_ORDER={MAX_ORDER}")
        self.order = order
        self.coeffs = coeffs[:order + 1] + [mp.mpf(0)] * (order + 1 - len(coeffs))
        self.cond = float(cond)

    @classmethod
    def variable(cls, center, order):
        """The series of x itself around ``center`` (delta coordinate)."""
        return cls([mp.mpf(center), mp.mpf(1)] + [mp.mpf(0)] * (order - 1), order)

    @classmethod
    def constant(cls, value, order):
        return cls([mp.mpf(value)] + [mp.mpf(0)] * order, order)

    def __add__(self, other):
        other = self._coerce(other)
        return PowerSeriesScalar(
            [a + b for a, b in zip(self.coeffs, other.coeffs)], self.order,
            max(self.cond, other.cond))

    __radd__ = __add__

    def __neg__(self):
        return PowerSeriesScalar([-a for a in self.coeffs], self.order, self.cond)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, PowerSeriesScalar):
            c = mp.mpf(other)
            return PowerSeriesScalar([a * c for a in self.coeffs], self.order, self.cond)
        n = self.order
        out = [mp.mpf(0)] * (n + 1)
        peak = [mp.mpf(0)] * (n + 1)
        for i, a in enumerate(self.coeffs):
            if i > n or a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                if i + j > n:
                    break
                term = a * b
                out[i + j] += term
                t = abs(term)
                if t > peak[i + j]:
                    peak[i + j] = t
        cond = max(self.cond, other.cond)
        for k in range(n + 1):
            if peak[k] > 0 and out[k] != 0:
                amp = peak[k] / abs(out[k])
                if amp > 1:
                    cond = max(cond, float(mp.log10(amp)))
        return PowerSeriesScalar(out, n, cond)

    __rmul__ = __mul__

    def _coerce(self, other):
        if isinstance(other, PowerSeriesScalar):
            if other.order != self.order:
                raise ValueError("order mismatch")
            return other
        return PowerSeriesScalar.constant(other, self.order)

    def derivative(self, n: int):
        """n-th derivative at the expansion point: n! * coeffs[n]."""
        if not (0 <= n <= self.order):
            raise ValueError("derivative order outside retained range")
        self.check_precision()
        return mp.factorial(n) * self.coeffs[n]

    def check_precision(self, floor_digits: float = 8.0):
        if self.cond > mp.mp.dps - floor_digits:
            raise PrecisionLossError(
                f"condition estimate 1e{self.cond:.0f} vs dps={mp.mp.dps}; "
                "raise the working precision")

    # -- compositions -------------------------------------------------------

    def compose_derivs(self, derivs):
        """sum_m derivs[m]/m! * (self - self[0])^m for an outer analytic map.

        ``derivs[m]`` is the m-th derivative of the outer function at the
        inner constant term. Exact at each retained order.
        """
        n = self.order
        inner = PowerSeriesScalar([mp.mpf(0)] + self.coeffs[1:], n, self.cond)
        acc = PowerSeriesScalar.constant(derivs[0], n)
        power = PowerSeriesScalar.constant(1, n)
        fact = mp.mpf(1)
        for m in range(1, min(len(derivs), n + 1)):
            fact *= m
            power = power * inner
            acc = acc + power * (mp.mpf(derivs[m]) / fact)
        acc.cond = max(acc.cond, self.cond)
        return acc

    def compose_exp(self):
        """exp(self), via exp(c0) * exp(self - c0)."""
        n = self.order
        scale = mp.e ** self.coeffs[0]
        derivs = [mp.mpf(1)] * (n + 1)
        out = self.compose_derivs(derivs)
        return out * scale

    def compose_besseli0(self):
        """I0(self). Even series when centered at zero, ODE-derivative array else."""
        n = self.order
        c0 = self.coeffs[0]
        if c0 == 0:
            # I0(w) = f(w^2) with f(u) = sum_m u^m / (4^m (m!)^2),
            # so f^(m)(0) = m! / (4^m (m!)^2) = 1 / (4^m m!).
            sq = self * self
            f_derivs = [mp.mpf(1) / (mp.mpf(4) ** m * mp.factorial(m))
                        for m in range(n + 1)]
            return sq.compose_derivs(f_derivs)
        derivs = besseli0_sqrt_derivs(c0, n)
        return self.compose_derivs(derivs)


def besseli0_sqrt_derivs(u0, order):
    """[d^m/du^m I0(sqrt(u))]_{u=u0} for m = 0..order, u0 > 0.

    From ``u F'' + F' - F/4 = 0``:
    ``F^(m+2) = (F^(m)/4 - (m+1) F^(m+1)) / u0``.
    """
    u0 = mp.mpf(u0)
    if u0 <= 0:
        raise ValueError("u0 must be positive")
    x = mp.sqrt(u0)
    out = [mp.besseli(0, x), mp.besseli(1, x) / (2 * x)]
    for m in range(order - 1):
        out.append((out[m] / 4 - (m + 1) * out[m + 1]) / u0)
    return out[:order + 1]


def sqrt_besseli1_derivs(u0, order):
    """[d^m/du^m sqrt(u) I1(sqrt(u))]_{u=u0}; equals 2(u F^(m+1) + m F^(m))."""
    f = besseli0_sqrt_derivs(u0, order + 1)
    u0 = mp.mpf(u0)
    return [2 * (u0 * f[m + 1] + m * f[m]) for m in range(order + 1)]
