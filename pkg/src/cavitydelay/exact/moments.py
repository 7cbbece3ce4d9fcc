r"""Exact variances and covariances of the time delays (tau_H = 1).

Perfect coupling, any beta (poles at beta*N = 2):

* var(tau_W)      = 4 / (N^2 (N+1) (beta N - 2))
* var(partial)    = 2 / (N^2 (beta N - 2))
* cov(partial)    = var(partial) / (N + 1)
* var(proper)     = (N [beta (N-1) + 2] + 2) / (N^2 (N+1) (beta N - 2))
* cov(proper)     = -1 / (N^2 (N+1))

Arbitrary transmission T in (0, 1], unitary class only (N >= 2):

* var(tau_W)      = 2 [1 - (1-T)^(N+1)] / (T^2 N^2 (N^2 - 1))
* var(partial)    = (2 N (1/T - 1) + 1) / (N^2 (N - 1))
* cov(partial)    = [2(1-(1-T)^(N+1))/(N+1) - 2T(1-T) - T^2/N] / (T^2 N (N-1)^2)

The T = 1 specializations coincide with the perfect-coupling forms (an
acceptance-gated identity). The resonance-width density is the chi^2 law
with beta*N degrees of freedom rescaled to unit mean.
"""
from __future__ import annotations

import numpy as np

from ..rmt import check_beta

__all__ = [
    "DivergentMomentError",
    "var_wigner_perfect",
    "var_partial_perfect",
    "cov_partial_perfect",
    "var_proper_perfect",
    "cov_proper_perfect",
    "var_wigner_unitary",
    "var_partial_unitary",
    "cov_partial_unitary",
    "relative_variance_wigner",
    "resonance_width_pdf",
]


class DivergentMomentError(ArithmeticError):
    """The requested moment diverges (beta*N <= 2 pole)."""


def _check_pole(beta: int, n: int) -> None:
    if beta * n <= 2:
        raise DivergentMomentError(
            f"second moment diverges at beta*N = {beta * n} <= 2")


def var_wigner_perfect(beta, n: int) -> float:
    beta = check_beta(beta, matrix=False)
    _check_pole(beta, n)
    return 4.0 / (n * n * (n + 1) * (beta * n - 2))


def var_partial_perfect(beta, n: int) -> float:
    beta = check_beta(beta, matrix=False)
    _check_pole(beta, n)
    return 2.0 / (n * n * (beta * n - 2))


def cov_partial_perfect(beta, n: int) -> float:
    return var_partial_perfect(beta, n) / (n + 1)


def var_proper_perfect(beta, n: int) -> float:
    beta = check_beta(beta, matrix=False)
    _check_pole(beta, n)
    return (n * (beta * (n - 1) + 2) + 2.0) / (n * n * (n + 1) * (beta * n - 2))


def cov_proper_perfect(beta, n: int) -> float:
    beta = check_beta(beta, matrix=False)
    _check_pole(beta, n)
    return -1.0 / (n * n * (n + 1))


def _check_unitary_args(n: int, t: float) -> None:
    if n < 2:
        raise ValueError("arbitrary-coupling variance formulas require N >= 2")
    if not (0 < t <= 1):
        raise ValueError("transmission must lie in (0, 1]")


def var_wigner_unitary(n: int, t: float) -> float:
    _check_unitary_args(n, t)
    return 2.0 * (1.0 - (1.0 - t) ** (n + 1)) / (t * t * n * n * (n * n - 1))


def var_partial_unitary(n: int, t: float) -> float:
    _check_unitary_args(n, t)
    return (2.0 * n * (1.0 / t - 1.0) + 1.0) / (n * n * (n - 1))


def cov_partial_unitary(n: int, t: float) -> float:
    _check_unitary_args(n, t)
    bracket = (2.0 * (1.0 - (1.0 - t) ** (n + 1)) / (n + 1)
               - 2.0 * t * (1.0 - t) - t * t / n)
    return bracket / (t * t * n * (n - 1) ** 2)


def relative_variance_wigner(n: int, t: float) -> float:
    """var(tau_W)/mean^2 at beta=2; crosses from narrow (NT >> 1, ~4/(NT)^2)
    to broad (NT << 1, ~2/(NT)) around NT ~ 1."""
    return var_wigner_unitary(n, t) * n * n


def resonance_width_pdf(beta, n: int, y) -> np.ndarray:
    """chi^2 density with beta*N degrees of freedom, rescaled to mean 1."""
    beta = check_beta(beta, matrix=False)
    y = np.asarray(y, dtype=float)
    if np.any(y <= 0):
        raise ValueError("width argument must be positive")
    from scipy.special import gammaln
    half = beta * n / 2.0
    logp = half * np.log(half) - gammaln(half) + (half - 1.0) * np.log(y) - half * y
    return np.exp(logp)
