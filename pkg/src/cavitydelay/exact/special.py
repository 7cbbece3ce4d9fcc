r"""Special functions used by the closed-form oracles.

Thin, domain-checked wrappers over scipy.special with the conventions the
oracles need: the lower incomplete gamma is UNnormalized,
``gamma_lower(a, z) = int_0^z u^{a-1} e^{-u} du``, and the MacDonald
function K_nu is exposed in log form so that arguments deep in the
exponential tail neither under- nor overflow.
"""
from __future__ import annotations

import numpy as np
from scipy import special as sc

__all__ = [
    "log_gamma",
    "lower_incomplete_gamma",
    "bessel_K_log_scaled",
    "bessel_I0",
    "kummer_U_half",
]


def log_gamma(x):
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("log_gamma requires x > 0")
    return sc.gammaln(x)


def lower_incomplete_gamma(a, z):
    """Unnormalized lower incomplete gamma gamma(a, z), a > 0, z >= 0."""
    a = np.asarray(a, dtype=float)
    z = np.asarray(z, dtype=float)
    if np.any(a <= 0) or np.any(z < 0):
        raise ValueError("need a > 0 and z >= 0")
    return np.exp(sc.gammaln(a)) * sc.gammainc(a, z)


def regularized_gamma_p(a, z):
    """Regularized P(a, z) = gamma(a, z)/Gamma(a)."""
    return sc.gammainc(a, z)


def bessel_K_log_scaled(nu, x):
    """log K_nu(x) for x > 0, valid across the full exponential range."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("bessel_K_log_scaled requires x > 0")
    return np.log(sc.kve(nu, x)) - x


def bessel_I0(x):
    return sc.i0(np.asarray(x, dtype=float))


def kummer_U_half(c, z):
    """Tricomi confluent hypergeometric U(1/2, c, z) for z > 0.

    Only the a = 1/2 slice is needed by the weak-coupling marginals; it has
    the integral representation
    ``U(1/2, c, z) = (1/Gamma(1/2)) int_0^inf u^{-1/2} (1+u)^{c-3/2} e^{-zu} du``
    (which the tests use as an independent oracle).
    """
    z = np.asarray(z, dtype=float)
    if np.any(z <= 0):
        raise ValueError("kummer_U_half requires z > 0")
    return sc.hyperu(0.5, c, z)
