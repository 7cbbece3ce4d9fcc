r"""Tail coefficients, crossover cutoffs and large-deviation exponents.

Weak-coupling marginal tails in the rescaled variable t (partial/proper):

* small t (partial):  ``ctilde_N t^{-beta N/2 - 3/2} exp(-1/t)``
* universal window:   ``b_N t^{-3/2}``
* far tail:           ``(a_N / gbar^3) (gbar^2 / t)^{2 + beta N/2}``

with ``b_N = Gamma(1/2 + beta N/2) / (pi Gamma(1 + beta N/2))``,
``a_N = 2^{1+beta N} Gamma(1/2 + beta N/2) / (sqrt(pi) Gamma(1+beta N/2)^2)``,
``ctilde_N = 1/(sqrt(pi) Gamma(1 + beta N/2))``, and for the proper times in
the unitary class the small-t coefficient ``c_N = 2^{2(N-1)}/(sqrt(pi) N (2N-1)!)``.

Crossovers (unitary-class asymptotics): ``t_low = 1/(2 N gbar)``,
``ttilde_low = 1/(N gbar)``, ``t_up = 4 e gbar / N``; the Wigner-time
power-law window is cut off at ``tau_* ~ 1/(g N^2)`` (a scale, up to an
O(1) constant).

Wigner-time large deviations: at weak coupling
``P(tau) ~ tau^{-beta N^2/2 - 3/2} exp(-beta N g / (2 tau))``; at perfect
coupling the power changes to ``3 beta N^2/4 + N(1 - beta/2)/2 + 3/2`` with
rate ``beta N / 2``. The far tail decays with power ``2 + beta N/2``
everywhere. In the rescaled variable the weak-coupling left tail carries
the computable prefactor ``C_N`` built from Gamma-determinant ratios and
the Barnes G-function: ``P(t) ~= C_N t^{-N^2-3/2} exp(-N/t)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath as mp
import numpy as np

from ..rmt import check_beta

__all__ = [
    "TailCoefficients",
    "Cutoffs",
    "LargeDeviationExponents",
    "LeftTailForm",
    "tail_coefficients",
    "cutoffs",
    "wigner_crossover",
    "large_dev_exponents",
    "left_tail_prefactor_unitary",
    "selberg_cauchy_norm",
    "z0_closed",
]


@dataclass(frozen=True)
class TailCoefficients:
    a: float
    b: float
    c_tilde: float
    c: float | None  # proper-time small-t coefficient, unitary class only


@dataclass(frozen=True)
class Cutoffs:
    t_low: float
    t_tilde_low: float
    t_up: float


@dataclass(frozen=True)
class LargeDeviationExponents:
    left_power: float
    left_rate: float
    far_power: float


@dataclass(frozen=True)
class LeftTailForm:
    coefficient: float
    power: float
    rate: float


def tail_coefficients(beta, n: int) -> TailCoefficients:
    beta = check_beta(beta, matrix=False)
    half = beta * n / 2.0
    b = math.gamma(0.5 + half) / (math.pi * math.gamma(1.0 + half))
    a = (2.0 ** (1 + beta * n) * math.gamma(0.5 + half)
         / (math.sqrt(math.pi) * math.gamma(1.0 + half) ** 2))
    c_tilde = 1.0 / (math.sqrt(math.pi) * math.gamma(1.0 + half))
    c = None
    if beta == 2:
        c = 4.0 ** (n - 1) / (math.sqrt(math.pi) * n * math.factorial(2 * n - 1))
    return TailCoefficients(a=a, b=b, c_tilde=c_tilde, c=c)


def cutoffs(beta, n: int, gbar: float) -> Cutoffs:
    check_beta(beta, matrix=False)
    if gbar < 1:
        raise ValueError("gbar must be >= 1")
    return Cutoffs(t_low=1.0 / (2.0 * n * gbar),
                   t_tilde_low=1.0 / (n * gbar),
                   t_up=4.0 * math.e * gbar / n)


def wigner_crossover(n: int, g: float) -> float:
    """Scale tau_* ~ 1/(g N^2) of the Wigner-time power-law upper cutoff."""
    if not (g > 0):
        raise ValueError("g must be positive")
    return 1.0 / (g * n * n)


def large_dev_exponents(beta, n: int, g: float) -> LargeDeviationExponents:
    beta = check_beta(beta, matrix=False)
    far = 2.0 + beta * n / 2.0
    if g == 1.0:
        power = 3.0 * beta * n * n / 4.0 + n * (1.0 - beta / 2.0) / 2.0 + 1.5
        rate = beta * n / 2.0
    else:
        power = beta * n * n / 2.0 + 1.5
        rate = beta * n * g / 2.0
    return LargeDeviationExponents(left_power=power, left_rate=rate, far_power=far)


def _gamma_det(entries) -> mp.mpf:
    """Determinant of a small matrix of mp numbers (fraction-free LU)."""
    a = [[mp.mpf(x) for x in row] for row in entries]
    n = len(a)
    sign = 1
    det = mp.mpf(1)
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(a[r][col]))
        if a[piv][col] == 0:
            return mp.mpf(0)
        if piv != col:
            a[piv], a[col] = a[col], a[piv]
            sign = -sign
        det *= a[col][col]
        for r in range(col + 1, n):
            f = a[r][col] / a[col][col]
            for c in range(col, n):
                a[r][c] -= f * a[col][c]
    return sign * det


def z0_closed(n: int) -> float:
    """Normalization of the unitary-class characteristic function at p = 0:
    ``pi^N 2^{-N^2} N! prod_{k=1}^N Gamma(N+k)`` (coupling-independent)."""
    if n < 1:
        raise ValueError("need N >= 1")
    with mp.workdps(40):
        val = mp.pi ** n * mp.mpf(2) ** (-n * n) * mp.factorial(n)
        for k in range(1, n + 1):
            val *= mp.gamma(n + k)
        return float(val)


def left_tail_prefactor_unitary(n: int) -> LeftTailForm:
    """Computable left-tail form of the rescaled Wigner-time density at weak
    coupling (unitary class): ``P(t) ~= C t^{-power} exp(-rate/t)``."""
    if not (1 <= n <= 10):
        raise ValueError("supported channel range is 1..10")
    with mp.workdps(60):
        det_half = _gamma_det([[mp.gamma(mp.mpf(i) / 2 + j - 1)
                                for j in range(1, n + 1)] for i in range(1, n + 1)])
        det_full = _gamma_det([[mp.gamma(i + j - 1)
                                for j in range(1, n + 1)] for i in range(1, n + 1)])
        if det_full == 0 or not mp.isfinite(det_half):
            raise ArithmeticError("Gamma-determinant evaluation lost precision")
        ratio = det_half / det_full
        for k in range(1, n + 1):
            ratio *= mp.gamma(k) / mp.gamma(mp.mpf(k) / 2)
        a_coef = mp.mpf(2) ** (-n * (n + 1) / 2) * mp.pi ** n * mp.barnesg(n + 2) * ratio
        c_coef = mp.sqrt(mp.mpf(n) / mp.pi) * a_coef / z0_closed(n)
        if c_coef <= 0 or not mp.isfinite(c_coef):
            raise ArithmeticError("left-tail prefactor evaluation lost precision")
        return LeftTailForm(coefficient=float(c_coef), power=n * n + 1.5, rate=float(n))


def selberg_cauchy_norm(n: int, alpha: float, beta: float) -> float:
    r"""Normalization of the Cauchy ensemble:
    ``int prod dx |Vandermonde(x)|^beta prod (1+x_k^2)^{-alpha}``.

    Finite only when ``a = alpha - 1 - beta (N-1)/2 > -1/2`` (integrability
    of the one-body tail against the Vandermonde growth).
    """
    if n < 1:
        raise ValueError("need N >= 1")
    a = alpha - 1.0 - beta * (n - 1) / 2.0
    if not a > -0.5:
        raise ValueError(f"divergent parameter set: a = {a:g} <= -1/2")
    lam = beta / 2.0
    with mp.workdps(40):
        m = mp.mpf(1)
        for j in range(n):
            m *= (mp.gamma(lam * j + 2 * a + 1) * mp.gamma(lam * (j + 1) + 1)
                  / (mp.gamma(lam * j + a + 1) ** 2 * mp.gamma(1 + lam)))
        val = (mp.mpf(2) ** (beta * n * (n - 1) / 2 - 2 * (alpha - 1) * n)
               * mp.pi ** n * m)
        return float(val)
