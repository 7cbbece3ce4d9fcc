"""Hot Monte Carlo kernels: numba-compiled loops with a pure-numpy twin.

Both paths consume identical pre-generated Gaussian blocks (the stream layout
lives in :func:`draw_blocks`), so switching implementations never changes the
random numbers, only the floating-point evaluation order. Selection:

* default: numba ``@njit`` kernels (compiled lazily, cached on disk);
* ``CAVITYDELAY_DISABLE_NUMBA=1``: batched-numpy fallback.

``benchmarks/bench_kernels.py`` compares the two.

Kernel contract (per batch of m samples, N channels, uniform coupling g):
``wigner`` returns the m Wigner times ``tr(Qs)/N``; ``proper`` returns the
(m, N) ascending eigenvalues of Qs. The Qs chain avoids eigendecompositions
where the trace alone is needed: ``tr(Qs)/N = (2g/N) tr(G^{-1} B^{-1})`` with
``B = (1+g^2) I + (1-g^2) H``.
"""
from __future__ import annotations

import os

import numpy as np

__all__ = [
    "numba_enabled",
    "draw_blocks",
    "wigner_batch",
    "proper_batch",
    "wigner_and_trs_batch",
]


def _numba_requested() -> bool:
    return os.environ.get("CAVITYDELAY_DISABLE_NUMBA", "") in ("", "0")


try:  # pragma: no cover - exercised via the env-flag matrix in benchmarks
    import numba
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    _HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(f):
            return f

        if args and callable(args[0]):
            return args[0]
        return wrap


def numba_enabled() -> bool:
    return _HAVE_NUMBA and _numba_requested()


def draw_blocks(beta: int, n: int, m: int, rng: np.random.Generator):
    """Draw the Gaussian blocks for m samples in a fixed stream layout.

    Returns ``(z, x)``: z is the (m, n, n) complex Ginibre block for the
    circular-ensemble draw; x is the Wishart factor, complex (m, n, 2n) with
    E|x|^2 = 1 for beta=2 or real (m, n, 2n+1) unit-variance for beta=1.
    """
    zr = rng.standard_normal((m, n, n))
    zi = rng.standard_normal((m, n, n))
    z = zr + 1j * zi
    if beta == 2:
        xr = rng.standard_normal((m, n, 2 * n))
        xi = rng.standard_normal((m, n, 2 * n))
        x = (xr + 1j * xi) / np.sqrt(2.0)
    else:
        x = rng.standard_normal((m, n, 2 * n + 1))
    return z, x


# ---------------------------------------------------------------- numba path

@njit(cache=True, nogil=True)
def _wigner_nb_c(z, x, g, out):
    m, n = z.shape[0], z.shape[1]
    eye = np.eye(n)
    for s in range(m):
        q, r = np.linalg.qr(z[s])
        for j in range(n):
            ph = r[j, j] / abs(r[j, j])
            for i in range(n):
                q[i, j] *= ph
        h = (q + np.conj(q.T)) / 2.0
        gram = np.ascontiguousarray(x[s]) @ np.conj(x[s].T)
        b = (1.0 + g * g) * eye + (1.0 - g * g) * h
        t = np.linalg.inv(gram) @ np.linalg.inv(b)
        acc = 0.0
        for i in range(n):
            acc += t[i, i].real
        out[s] = 2.0 * g * acc / n


@njit(cache=True, nogil=True)
def _wigner_nb_r(z, x, g, out):
    m, n = z.shape[0], z.shape[1]
    eye = np.eye(n)
    for s in range(m):
        q, r = np.linalg.qr(z[s])
        for j in range(n):
            ph = r[j, j] / abs(r[j, j])
            for i in range(n):
                q[i, j] *= ph
        s0 = np.ascontiguousarray(q) @ np.ascontiguousarray(q.T)
        h = np.real(s0).copy()
        gram = np.ascontiguousarray(x[s]) @ np.ascontiguousarray(x[s].T)
        b = (1.0 + g * g) * eye + (1.0 - g * g) * h
        t = np.linalg.inv(gram) @ np.linalg.inv(b)
        acc = 0.0
        for i in range(n):
            acc += t[i, i]
        out[s] = 2.0 * g * acc / n


@njit(cache=True, nogil=True)
def _proper_nb_c(z, x, g, out):
    m, n = z.shape[0], z.shape[1]
    eye = np.eye(n)
    for s in range(m):
        q, r = np.linalg.qr(z[s])
        for j in range(n):
            ph = r[j, j] / abs(r[j, j])
            for i in range(n):
                q[i, j] *= ph
        h = (q + np.conj(q.T)) / 2.0
        gram = np.ascontiguousarray(x[s]) @ np.conj(x[s].T)
        b = (1.0 + g * g) * eye + (1.0 - g * g) * h
        wb, vb = np.linalg.eigh(b)
        a = (vb * np.sqrt(2.0 * g / wb)) @ np.conj(vb.T)
        qs = a @ np.linalg.inv(gram) @ a
        qs = (qs + np.conj(qs.T)) / 2.0
        out[s] = np.linalg.eigvalsh(qs)


@njit(cache=True, nogil=True)
def _proper_nb_r(z, x, g, out):
    m, n = z.shape[0], z.shape[1]
    eye = np.eye(n)
    for s in range(m):
        q, r = np.linalg.qr(z[s])
        for j in range(n):
            ph = r[j, j] / abs(r[j, j])
            for i in range(n):
                q[i, j] *= ph
        s0 = np.ascontiguousarray(q) @ np.ascontiguousarray(q.T)
        h = np.real(s0).copy()
        gram = np.ascontiguousarray(x[s]) @ np.ascontiguousarray(x[s].T)
        b = (1.0 + g * g) * eye + (1.0 - g * g) * h
        wb, vb = np.linalg.eigh(b)
        a = (vb * np.sqrt(2.0 * g / wb)) @ vb.T
        qs = a @ np.linalg.inv(gram) @ a
        out[s] = np.linalg.eigvalsh((qs + qs.T) / 2.0)


# ---------------------------------------------------------------- numpy path

def _phase_fixed_q(z):
    q, r = np.linalg.qr(z)
    d = np.einsum("mii->mi", r)
    return q * (d / np.abs(d))[:, None, :]


def _wigner_np(z, x, g, beta):
    m, n = z.shape[0], z.shape[1]
    q = _phase_fixed_q(z)
    if beta == 2:
        h = (q + np.conj(np.swapaxes(q, 1, 2))) / 2.0
        gram = x @ np.conj(np.swapaxes(x, 1, 2))
    else:
        h = (q @ np.swapaxes(q, 1, 2)).real
        gram = x @ np.swapaxes(x, 1, 2)
    b = (1.0 + g * g) * np.eye(n)[None] + (1.0 - g * g) * h
    t = np.linalg.inv(gram) @ np.linalg.inv(b)
    return 2.0 * g * np.einsum("mii->mi", t).sum(axis=1).real / n


def _proper_np(z, x, g, beta):
    n = z.shape[1]
    q = _phase_fixed_q(z)
    if beta == 2:
        h = (q + np.conj(np.swapaxes(q, 1, 2))) / 2.0
        gram = x @ np.conj(np.swapaxes(x, 1, 2))
    else:
        h = (q @ np.swapaxes(q, 1, 2)).real
        gram = x @ np.swapaxes(x, 1, 2)
    b = (1.0 + g * g) * np.eye(n)[None] + (1.0 - g * g) * h
    wb, vb = np.linalg.eigh(b)
    a = (vb * np.sqrt(2.0 * g / wb)[:, None, :]) @ np.conj(np.swapaxes(vb, 1, 2))
    qs = a @ np.linalg.inv(gram) @ a
    qs = (qs + np.conj(np.swapaxes(qs, 1, 2))) / 2.0
    return np.linalg.eigvalsh(qs)


# ------------------------------------------------------------------ frontend

def wigner_batch(beta: int, n: int, g: float, z, x) -> np.ndarray:
    """Wigner times for one batch of pre-drawn blocks."""
    if numba_enabled():
        out = np.empty(z.shape[0])
        if beta == 2:
            _wigner_nb_c(z, x, g, out)
        else:
            _wigner_nb_r(z, x, g, out)
        return out
    return _wigner_np(z, x, g, beta)


def proper_batch(beta: int, n: int, g: float, z, x) -> np.ndarray:
    """(m, N) ascending proper times for one batch of pre-drawn blocks."""
    if numba_enabled():
        out = np.empty((z.shape[0], n))
        if beta == 2:
            _proper_nb_c(z, x, g, out)
        else:
            _proper_nb_r(z, x, g, out)
        return out
    return _proper_np(z, x, g, beta)


def wigner_and_trs_batch(beta: int, n: int, g: float, z, x):
    """(tau_W, Re tr S) pairs; numpy-only, used by distributional tests."""
    tau = _wigner_np(z, x, g, beta)
    q = _phase_fixed_q(z)
    s0 = q if beta == 2 else q @ np.swapaxes(q, 1, 2)
    sbar = (1.0 - g) / (1.0 + g)
    if sbar == 0.0:
        s = s0
    else:
        eye = np.eye(n)[None]
        s = np.linalg.solve(np.swapaxes(eye + sbar * s0, 1, 2),
                            np.swapaxes(sbar * eye + s0, 1, 2))
        s = np.swapaxes(s, 1, 2)
    return tau, np.einsum("mii->mi", s).sum(axis=1).real
