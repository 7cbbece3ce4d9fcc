r"""Map perfect-coupling primitives to arbitrary channel coupling.

A contact of transmission ``T = 4g/(1+g)^2`` (coupling constant g > 0, mean
scattering amplitude ``sbar = (1-g)/(1+g)``) turns a perfectly coupled
cavity ``(S0, Qs0)`` into

* ``S  = (sbar I + S0)(I + sbar S0)^{-1}``  (Poisson-kernel ensemble), and
* ``Qs = A Qs0 A`` with the Hermitian coupling map
  ``A = sqrt(2g) [(1+g^2) I + (1-g^2) H]^{-1/2}``, ``H = (S0 + S0^dag)/2``.

The second form is the singularity-free equivalent of
``A = sqrt(g) (I + g^2 K^2)^{-1/2} (I + K^2)^{1/2}`` written through the
reaction matrix K: with eigenphase theta of S0 one has k = -tan(theta/2),
``1+k^2 = 2/(1+cos theta)`` and the two scalar maps coincide, but the H form
never touches the Cayley singularity at theta = pi. The shifted matrix
``(1+g^2) I + (1-g^2) H`` has smallest eigenvalue >= 2 min(1, g^2) > 0.

All times are in Heisenberg units (tau_H = 1). Results depend on g only
through T, giving the exact symmetry g <-> 1/g.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import rmt
from .rng import RngStream

__all__ = [
    "CouplingSpec",
    "CavitySample",
    "TimeDelayBatch",
    "coupling_matrix_a",
    "transform_scattering",
    "build_sample",
    "build_sample_general",
    "eigenphases",
]


@dataclass(frozen=True)
class CouplingSpec:
    """Uniform coupling constant g > 0 for N equivalent channels.

    Derived quantities: transmission ``T = 4g/(1+g)^2`` in (0, 1], mean
    scattering amplitude ``sbar = (1-g)/(1+g)``, and ``gbar = 2/T - 1 >= 1``
    (the parameter the exact marginal densities are written in).
    """

    g: float

    def __post_init__(self):
        if not (self.g > 0):
            raise ValueError("coupling constant g must be positive")

    @classmethod
    def from_transmission(cls, t: float) -> "CouplingSpec":
        """The canonical g in (0, 1] with T(g) = t."""
        if not (0 < t <= 1):
            raise ValueError("transmission must lie in (0, 1]")
        gbar = 2.0 / t - 1.0
        return cls(gbar - np.sqrt(gbar * gbar - 1.0))

    @property
    def transmission(self) -> float:
        return 4.0 * self.g / (1.0 + self.g) ** 2

    @property
    def sbar(self) -> float:
        return (1.0 - self.g) / (1.0 + self.g)

    @property
    def gbar(self) -> float:
        return 2.0 / self.transmission - 1.0


@dataclass(frozen=True)
class CavitySample:
    """One joint draw (S, Qs) of the scattering and time-delay matrices."""

    s: np.ndarray
    q_s: np.ndarray
    coupling: CouplingSpec
    beta: int = 2
    resample_count: int = 0


@dataclass(frozen=True)
class TimeDelayBatch:
    """A batch of positive time-delay samples with its config snapshot.

    kind is one of 'wigner', 'proper', 'partial', 'heuristic'; values of
    pooled kinds (proper/partial) are flattened.
    """

    values: np.ndarray
    kind: str
    beta: int
    channels: int
    g: float | None = None
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        if self.values.size and self.values.min() <= 0:
            raise ValueError("time-delay samples must be positive")


def coupling_matrix_a(s0: np.ndarray, g: float) -> np.ndarray:
    """Hermitian positive-definite coupling map A for uniform coupling g."""
    if not (g > 0):
        raise ValueError("g must be positive")
    n = s0.shape[0]
    h = (s0 + s0.conj().T) / 2.0
    b = (1.0 + g * g) * np.eye(n) + (1.0 - g * g) * h
    w, v = np.linalg.eigh(b)
    a = (v * np.sqrt(2.0 * g / w)) @ v.conj().T
    a = (a + a.conj().T) / 2.0
    if rmt.strict_checks():
        rmt.assert_hermitian(a, positive=True)
    return a


def transform_scattering(s0: np.ndarray, spec: CouplingSpec) -> np.ndarray:
    """Poisson-kernel scattering matrix S = (sbar I + S0)(I + sbar S0)^{-1}."""
    sbar = spec.sbar
    if sbar == 0.0:
        return s0
    n = s0.shape[0]
    eye = np.eye(n)
    s = np.linalg.solve((eye + sbar * s0).T, (sbar * eye + s0).T).T
    if rmt.strict_checks():
        rmt.assert_unitary(s)
    return s


def build_sample(beta, n: int, spec: CouplingSpec, stream: RngStream) -> CavitySample:
    """Draw one (S, Qs) sample at uniform coupling.

    Qs = A G0^{-1} A with G0 from the Laguerre sampler and A from
    :func:`coupling_matrix_a`; at g=1 this reduces to Qs = G0^{-1} exactly.
    For beta=1 both S and Qs are (complex-)symmetric/real-symmetric.
    """
    beta = rmt.check_beta(beta, matrix=True)
    rng = stream.generator()
    s0 = rmt.sample_scattering_perfect(beta, n, rng)
    g0 = rmt.sample_inverse_ws_perfect(beta, n, rng)
    s = transform_scattering(s0, spec)
    if spec.g == 1.0:
        q_s = np.linalg.inv(g0)
    else:
        a = coupling_matrix_a(s0, spec.g)
        if beta == 1:
            a = a.real
        q_s = a @ np.linalg.inv(g0) @ a
    q_s = (q_s + q_s.conj().T) / 2.0
    if beta == 1:
        q_s = q_s.real
    if rmt.strict_checks():
        rmt.assert_hermitian(q_s, positive=True)
    return CavitySample(s=s, q_s=q_s, coupling=spec, beta=beta)


def build_sample_general(beta, n: int, g_a, u_c: np.ndarray | None,
                         stream: RngStream,
                         max_resample: int = 64) -> CavitySample:
    """Draw one sample with per-channel couplings g_a and channel mixer u_c.

    Uses the explicit reaction-matrix route
    ``A = u_c^dag (I + (C K C)^2)^{-1/2} C (I + K^2)^{1/2}``,
    ``C = diag(sqrt(g_a))``, ``Qs = A G0^{-1} A^dag``; draws that hit the
    Cayley singularity are transparently resampled (counted in
    ``resample_count``). Reduces to :func:`build_sample` when all g_a are
    equal and u_c is the identity.
    """
    beta = rmt.check_beta(beta, matrix=True)
    g_a = np.asarray(g_a, dtype=float)
    if g_a.shape != (n,) or np.any(g_a <= 0):
        raise ValueError("g_a must be N positive reals")
    if u_c is None:
        u_c = np.eye(n)
    rng = stream.generator()
    resamples = 0
    while True:
        s0 = rmt.sample_scattering_perfect(beta, n, rng)
        try:
            k = rmt.cayley_reaction(s0)
        except rmt.CayleySingularityError:
            resamples += 1
            if resamples > max_resample:
                raise
            continue
        break
    g0 = rmt.sample_inverse_ws_perfect(beta, n, rng)
    c = np.diag(np.sqrt(g_a))
    ckc = c @ k @ c
    m1 = rmt.matrix_function_hermitian(ckc @ ckc, lambda x: 1.0 / np.sqrt(1.0 + x))
    m2 = rmt.matrix_function_hermitian(k @ k, lambda x: np.sqrt(1.0 + x))
    a = u_c.conj().T @ m1 @ c @ m2
    q_s = a @ np.linalg.inv(g0) @ a.conj().T
    q_s = (q_s + q_s.conj().T) / 2.0
    # average coupling recorded for bookkeeping only
    spec = CouplingSpec(float(np.exp(np.mean(np.log(g_a)))))
    if rmt.strict_checks():
        rmt.assert_hermitian(q_s, positive=True)
    s = u_c.conj().T @ np.linalg.solve(
        (np.eye(n) + 1j * ckc).T, (np.eye(n) - 1j * ckc).T).T @ u_c
    return CavitySample(s=s, q_s=q_s, coupling=spec, beta=beta,
                        resample_count=resamples)


def eigenphases(k: np.ndarray, g: float) -> np.ndarray:
    """Eigenphases of the non-ideal S from the perfect-coupling reaction matrix.

    The coupling substitution sends K to gK, so S = (I - igK)(I + igK)^{-1}
    and the phases are ``theta_a = -2 arctan(g k_a)`` without ever
    diagonalizing a non-Hermitian matrix. Returned ascending in (-pi, pi).
    """
    ev = np.linalg.eigvalsh(k)
    return np.sort(-2.0 * np.arctan(g * ev))
