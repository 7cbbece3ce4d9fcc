r"""Primitive random-matrix samplers and the Hermitian linear-algebra kernel.

Conventions
-----------
* ``beta`` is the Dyson symmetry index: 1 (orthogonal), 2 (unitary). Matrix
  sampling supports beta in {1, 2}; formula-only consumers elsewhere also
  accept beta=4.
* Scattering matrices at perfect coupling are drawn from the circular
  ensembles: CUE = Haar on U(N) for beta=2, COE realized as ``U U^T`` for
  beta=1.
* The inverse of the symmetrised time-delay matrix at perfect coupling
  follows the Laguerre law ``P(G) ~ det(G)^{beta N/2} exp(-beta tr G / 2)``,
  realized constructively as a Wishart Gram matrix:

  - beta=2: ``G = X X^dag`` with X an (N x 2N) matrix of standard complex
    Gaussians (E|X_ij|^2 = 1), giving ``det(G)^N e^{-tr G}``;
  - beta=1: ``G = X X^T`` with X an (N x 2N+1) matrix of standard real
    Gaussians, giving ``det(G)^{N/2} e^{-tr G / 2}``.

All matrices are plain complex/real ndarrays. Structural invariants
(unitarity, Hermiticity, positivity) are asserted on construction when
strict checks are enabled (env ``CAVITYDELAY_STRICT=1``; the test suite
turns this on).
"""
from __future__ import annotations

import os

import numpy as np

__all__ = [
    "MATRIX_BETAS",
    "FORMULA_BETAS",
    "UnsupportedSymmetryError",
    "CayleySingularityError",
    "check_beta",
    "strict_checks",
    "assert_unitary",
    "assert_hermitian",
    "haar_unitary",
    "sample_scattering_perfect",
    "sample_inverse_ws_perfect",
    "cayley_reaction",
    "hermitian_eigensystem",
    "matrix_function_hermitian",
]

MATRIX_BETAS = (1, 2)
FORMULA_BETAS = (1, 2, 4)


class UnsupportedSymmetryError(ValueError):
    """Requested symmetry class is outside the supported set for this context."""


class CayleySingularityError(ArithmeticError):
    """An eigenphase of S sits too close to pi for the inverse Cayley map."""


def check_beta(beta, matrix: bool = True) -> int:
    """Validate a symmetry index; matrix samplers reject beta=4."""
    allowed = MATRIX_BETAS if matrix else FORMULA_BETAS
    if beta not in allowed:
        raise UnsupportedSymmetryError(
            f"beta={beta!r} unsupported here (allowed: {allowed})")
    return int(beta)


def strict_checks() -> bool:
    return os.environ.get("CAVITYDELAY_STRICT", "") not in ("", "0")


def assert_unitary(u: np.ndarray, tol: float = 1e-10) -> None:
    n = u.shape[0]
    res = np.abs(u.conj().T @ u - np.eye(n)).max()
    if res >= tol:
        raise AssertionError(f"unitarity residual {res:.3e} >= {tol:.1e}")


def assert_hermitian(h: np.ndarray, tol: float = 1e-12,
                     positive: bool = False) -> None:
    res = np.abs(h - h.conj().T).max()
    if res >= tol:
        raise AssertionError(f"hermiticity residual {res:.3e} >= {tol:.1e}")
    if positive and np.linalg.eigvalsh(h)[0] <= 0:
        raise AssertionError("matrix is not positive definite")


def standard_normal_complex(rng: np.random.Generator, size) -> np.ndarray:
    """Complex Gaussians with E|z|^2 = 1 (real/imag parts N(0, 1/2))."""
    return (rng.standard_normal(size) + 1j * rng.standard_normal(size)) / np.sqrt(2.0)


def haar_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed U(n) matrix via QR of a complex Ginibre matrix.

    The diagonal of R is normalized to unit modulus and absorbed into Q,
    which removes the QR gauge ambiguity and makes the law exactly Haar.
    """
    if n < 1:
        raise ValueError("channel count must be >= 1")
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    q = q * (d / np.abs(d))
    if strict_checks():
        assert_unitary(q)
    return q


def sample_scattering_perfect(beta, n: int, rng: np.random.Generator) -> np.ndarray:
    """Scattering matrix of a perfectly coupled cavity (circular ensemble).

    beta=2 returns a CUE matrix; beta=1 returns the symmetric unitary
    ``U U^T`` with U Haar (COE).
    """
    beta = check_beta(beta, matrix=True)
    u = haar_unitary(n, rng)
    if beta == 1:
        u = u @ u.T
        if strict_checks():
            assert_unitary(u)
    return u


def sample_inverse_ws_perfect(beta, n: int, rng: np.random.Generator) -> np.ndarray:
    """Inverse symmetrised time-delay matrix at perfect coupling (Laguerre law).

    Returns a positive-definite Hermitian (beta=2) or real symmetric
    (beta=1) Wishart Gram matrix; see the module docstring for the exact
    construction and the density it realizes.
    """
    beta = check_beta(beta, matrix=True)
    if n < 1:
        raise ValueError("channel count must be >= 1")
    if beta == 2:
        x = standard_normal_complex(rng, (n, 2 * n))
        g = x @ x.conj().T
    else:
        x = rng.standard_normal((n, 2 * n + 1))
        g = x @ x.T
    if strict_checks():
        assert_hermitian(g, positive=True)
    return g


def cayley_reaction(s: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    """Reaction matrix K = -i (I + S)^{-1} (I - S) of a unitary S.

    K is Hermitian with eigenvalues ``-tan(theta_a / 2)`` for eigenphases
    theta_a of S. Raises :class:`CayleySingularityError` when an eigenphase
    is within ``tol`` of pi (measure-zero; callers resample).
    """
    n = s.shape[0]
    eye = np.eye(n)
    phases = np.linalg.eigvals(s)
    if np.abs(1.0 + phases).min() < tol:
        raise CayleySingularityError("eigenphase of S too close to pi")
    k = -1j * np.linalg.solve(eye + s, eye - s)
    k = (k + k.conj().T) / 2.0
    if strict_checks():
        assert_hermitian(k)
    return k


def hermitian_eigensystem(h: np.ndarray):
    """Eigenvalues (ascending) and orthonormal eigenvector matrix of Hermitian h."""
    w, v = np.linalg.eigh(h)
    return w, v


def matrix_function_hermitian(h: np.ndarray, f) -> np.ndarray:
    """Spectral calculus: apply the scalar map f to a Hermitian matrix.

    ``f`` must be finite on the spectrum of h; the result is Hermitian and
    commutes with h.
    """
    w, v = np.linalg.eigh(h)
    fw = np.asarray(f(w), dtype=float if np.isrealobj(h) else complex)
    fw_f = np.asarray(fw, dtype=float) if np.isrealobj(fw) else fw
    if not np.all(np.isfinite(fw_f)):
        raise ValueError("scalar map is not finite on the spectrum")
    out = (v * fw) @ v.conj().T
    out = (out + out.conj().T) / 2.0
    return out
