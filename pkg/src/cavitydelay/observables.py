r"""Time-delay observables, cheap scalar samplers, histograms and statistics.

The mergeable histogram keeps exact integer counts plus underflow/overflow,
so merging is commutative and associative and totals are conserved. Tail
fitting works on the log CCDF with an automated curvature guard: soft
crossovers between regimes would otherwise masquerade as power laws.

Cheap samplers (no matrices):

* partial time delays at any coupling: ``tau = f(theta) * tau0`` with theta
  uniform on [0, 2pi), ``f(theta) = 1/(gbar + sqrt(gbar^2-1) cos theta)``,
  ``gbar = 2/T - 1``, and tau0 the perfect-coupling partial time, i.e. the
  reciprocal of a Gamma(1 + beta*N/2, rate beta/2) variate;
* single-resonance heuristic for the Wigner time in the weak-coupling
  regime: width ``Gamma = N T y`` with y chi^2-distributed (beta*N degrees,
  mean 1), level position E uniform on [-pi, pi] (tau_H = 1), and
  ``tau = Gamma / (N (E^2 + Gamma^2/4))``.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .coupling import TimeDelayBatch
from .rmt import check_beta
from .rng import RngStream

__all__ = [
    "EmpiricalDistribution",
    "TailFit",
    "InsufficientDataError",
    "log_edges",
    "parse_bin_spec",
    "wigner_time",
    "proper_times",
    "sample_partial_cheap",
    "sample_heuristic",
    "fit_tail_exponent",
    "rescale",
    "summary",
    "ks_statistic",
]

DEFAULT_BIN_SPEC = "log:1e-6:1e6:240"


class InsufficientDataError(ValueError):
    """Not enough occupied bins / samples for the requested estimate."""


def log_edges(lo: float, hi: float, nbins: int) -> np.ndarray:
    if not (0 < lo < hi) or nbins < 1:
        raise ValueError("need 0 < lo < hi and nbins >= 1")
    return np.geomspace(lo, hi, nbins + 1)


def parse_bin_spec(spec: str) -> np.ndarray:
    """Parse 'log:lo:hi:n' or 'lin:lo:hi:n' into an edge array."""
    parts = spec.split(":")
    if len(parts) != 4 or parts[0] not in ("log", "lin"):
        raise ValueError(f"bad bin spec {spec!r} (want log:lo:hi:n or lin:lo:hi:n)")
    lo, hi, n = float(parts[1]), float(parts[2]), int(parts[3])
    if parts[0] == "log":
        return log_edges(lo, hi, n)
    if not (lo < hi) or n < 1:
        raise ValueError(f"bad bin spec {spec!r}")
    return np.linspace(lo, hi, n + 1)


@dataclass
class EmpiricalDistribution:
    """Mergeable histogram with exact integer bookkeeping.

    ``counts.sum() + underflow + overflow == total`` always holds; the pdf
    view normalizes by total weight and bin width, so it integrates to
    ``1 - (underflow + overflow)/total`` exactly.
    """

    edges: np.ndarray
    counts: np.ndarray = None
    underflow: int = 0
    overflow: int = 0

    def __post_init__(self):
        self.edges = np.asarray(self.edges, dtype=float)
        if self.edges.ndim != 1 or len(self.edges) < 2 or np.any(np.diff(self.edges) <= 0):
            raise ValueError("edges must be strictly increasing, length >= 2")
        if self.counts is None:
            self.counts = np.zeros(len(self.edges) - 1, dtype=np.int64)
        else:
            self.counts = np.asarray(self.counts, dtype=np.int64)
            if self.counts.shape != (len(self.edges) - 1,) or np.any(self.counts < 0):
                raise ValueError("counts shape/positivity mismatch")

    @property
    def total(self) -> int:
        return int(self.counts.sum()) + self.underflow + self.overflow

    def add(self, values) -> "EmpiricalDistribution":
        """Accumulate a batch of values in place; returns self for chaining."""
        v = np.asarray(values, dtype=float).ravel()
        if v.size == 0:
            return self
        h, _ = np.histogram(v, bins=self.edges)
        self.counts += h
        self.underflow += int((v < self.edges[0]).sum())
        self.overflow += int((v >= self.edges[-1]).sum())
        return self

    def merge(self, other: "EmpiricalDistribution") -> "EmpiricalDistribution":
        """Exact merge; requires identical edge lists."""
        if not np.array_equal(self.edges, other.edges):
            raise ValueError("cannot merge histograms with different edges")
        return EmpiricalDistribution(self.edges, self.counts + other.counts,
                                     self.underflow + other.underflow,
                                     self.overflow + other.overflow)

    def table(self) -> dict:
        """Columns bin_lo, bin_hi, count, pdf, cdf, ccdf (cdf/ccdf at bin_hi)."""
        total = self.total
        widths = np.diff(self.edges)
        cum = np.cumsum(self.counts)
        if total == 0:
            pdf = np.zeros_like(widths)
            cdf = np.zeros_like(widths)
            ccdf = np.zeros_like(widths)
        else:
            pdf = self.counts / (total * widths)
            cdf = (self.underflow + cum) / total
            ccdf = (self.overflow + cum[-1] - cum) / total
        return {"bin_lo": self.edges[:-1], "bin_hi": self.edges[1:],
                "count": self.counts.copy(), "pdf": pdf, "cdf": cdf, "ccdf": ccdf}

    def to_pdf(self):
        t = self.table()
        return t["bin_lo"], t["bin_hi"], t["pdf"]

    def to_cdf(self):
        t = self.table()
        return t["bin_hi"], t["cdf"]

    def to_ccdf(self):
        t = self.table()
        return t["bin_hi"], t["ccdf"]


@dataclass(frozen=True)
class TailFit:
    """Least-squares log-log slope of the CCDF over a window."""

    lo: float
    hi: float
    slope: float
    stderr: float
    n_points: int
    curvature_t: float = 0.0
    power_law_ok: bool = True
    amplitude: float = field(default=float("nan"), compare=False)


def wigner_time(q_s: np.ndarray) -> float:
    """tau_W = tr(Qs)/N; the positive time-delay per channel."""
    n = q_s.shape[0]
    tau = float(np.trace(q_s).real) / n
    if tau <= 0:
        raise ValueError("non-positive trace: Qs violates positivity")
    return tau


def proper_times(q_s: np.ndarray) -> np.ndarray:
    """Ascending eigenvalues of the time-delay matrix."""
    return np.linalg.eigvalsh(q_s)


def _coupling_gbar(g: float) -> float:
    t = 4.0 * g / (1.0 + g) ** 2
    return 2.0 / t - 1.0


def sample_partial_cheap(beta, n: int, g: float, stream: RngStream,
                         size: int = 1) -> np.ndarray:
    """Partial time delays at coupling g via the factorized scalar construction."""
    beta = check_beta(beta, matrix=False)
    if not (g > 0):
        raise ValueError("g must be positive")
    rng = stream.generator()
    gbar = _coupling_gbar(g)
    shape = 1.0 + beta * n / 2.0
    tau0 = 1.0 / rng.gamma(shape, scale=2.0 / beta, size=size)
    theta = rng.uniform(0.0, 2.0 * np.pi, size=size)
    f = 1.0 / (gbar + np.sqrt(max(gbar * gbar - 1.0, 0.0)) * np.cos(theta))
    return f * tau0


def sample_heuristic(beta, n: int, t: float, stream: RngStream,
                     size: int = 1) -> np.ndarray:
    """Single-resonance Wigner-time approximant (weak coupling, NT << 1)."""
    beta = check_beta(beta, matrix=False)
    if not (0 < t <= 1):
        raise ValueError("transmission must lie in (0, 1]")
    rng = stream.generator()
    half = beta * n / 2.0
    y = rng.gamma(half, scale=1.0 / half, size=size)
    width = n * t * y
    e = rng.uniform(-np.pi, np.pi, size=size)
    return width / (n * (e * e + width * width / 4.0))


def fit_tail_exponent(dist: EmpiricalDistribution, window,
                      min_bins: int = 10) -> TailFit:
    """OLS slope of log CCDF vs log abscissa over [lo, hi].

    Uses bins whose upper edge lies in the window and whose CCDF is
    positive; requires at least ``min_bins`` occupied bins. A quadratic
    term with |t| >= 2 marks curvature (``power_law_ok = False``): no
    power law should be asserted from such a window. The CCDF amplitude at
    slope fixed to the fitted value is also reported.
    """
    lo, hi = float(window[0]), float(window[1])
    if not (0 < lo < hi):
        raise ValueError("window must satisfy 0 < lo < hi")
    t = dist.table()
    x = t["bin_hi"]
    ccdf = t["ccdf"]
    sel = (x >= lo) & (x <= hi) & (ccdf > 0) & (t["count"] > 0)
    npts = int(sel.sum())
    if npts < min_bins:
        raise InsufficientDataError(
            f"only {npts} occupied bins in window [{lo:g}, {hi:g}] (< {min_bins})")
    lx = np.log(x[sel])
    ly = np.log(ccdf[sel])
    lx0 = lx - lx.mean()
    a = np.column_stack([np.ones(npts), lx0])
    coef, res, *_ = np.linalg.lstsq(a, ly, rcond=None)
    dof = npts - 2
    s2 = float(res[0]) / dof if res.size else float(((ly - a @ coef) ** 2).sum()) / dof
    stderr = float(np.sqrt(s2 / (lx0 ** 2).sum()))
    # curvature guard
    a2 = np.column_stack([np.ones(npts), lx0, lx0 ** 2])
    coef2, *_ = np.linalg.lstsq(a2, ly, rcond=None)
    r2 = ly - a2 @ coef2
    s2q = float((r2 ** 2).sum()) / max(npts - 3, 1)
    cov_q = s2q * np.linalg.inv(a2.T @ a2)[2, 2]
    curv_t = float(coef2[2] / np.sqrt(cov_q)) if cov_q > 0 else 0.0
    amplitude = float(np.exp(coef[0] - coef[1] * lx.mean()))
    return TailFit(lo=lo, hi=hi, slope=float(coef[1]), stderr=stderr,
                   n_points=npts, curvature_t=curv_t,
                   power_law_ok=abs(curv_t) < 2.0, amplitude=amplitude)


_RESCALE_MODES = ("t", "s")


def rescale(batch: TimeDelayBatch, mode: str) -> TimeDelayBatch:
    """Rescale a batch to the universal variable.

    mode 't': t = 2 tau / (beta g). mode 's': s = |1/g - g| tau for
    Wigner-time batches and s = N |1/g - g| tau for proper/partial pools
    (the collapse variable of the cumulative plots); g=1 is rejected for
    's' since the factor vanishes.
    """
    if mode not in _RESCALE_MODES:
        raise ValueError(f"unknown rescale mode {mode!r}")
    if batch.g is None:
        raise ValueError("batch carries no coupling constant")
    g = batch.g
    if mode == "t":
        factor = 2.0 / (batch.beta * g)
    else:
        if g == 1.0:
            raise ValueError("mode 's' undefined at g = 1")
        factor = abs(1.0 / g - g)
        if batch.kind in ("proper", "partial"):
            factor *= batch.channels
    return replace(batch, values=batch.values * factor,
                   meta={**batch.meta, "rescale": mode, "factor": factor})


def summary(values, n_boot: int = 200, seed: int = 0xB001):
    """(mean, variance, se_mean, se_variance) of a sample batch.

    se_mean is the plain sd/sqrt(M); the variance error comes from a
    bootstrap with ``n_boot`` resamples over ~batch means (chunked for
    large M, per-sample otherwise).
    """
    v = np.asarray(values, dtype=float).ravel()
    m = v.size
    if m < 100:
        raise InsufficientDataError("summary requires at least 100 samples")
    mean = float(v.mean())
    var = float(v.var())
    se_mean = float(v.std(ddof=1) / np.sqrt(m))
    nchunk = int(min(500, max(50, m // 2000)))
    edges = np.linspace(0, m, nchunk + 1).astype(int)
    cn = np.diff(edges).astype(float)
    cs = np.add.reduceat(v, edges[:-1])
    cs2 = np.add.reduceat(v * v, edges[:-1])
    rng = RngStream(seed, 0).generator()
    idx = rng.integers(0, nchunk, size=(n_boot, nchunk))
    bn = cn[idx].sum(axis=1)
    bs = cs[idx].sum(axis=1)
    bs2 = cs2[idx].sum(axis=1)
    bvar = bs2 / bn - (bs / bn) ** 2
    se_var = float(bvar.std(ddof=1))
    return mean, var, se_mean, se_var


def ks_statistic(values, cdf) -> float:
    """Kolmogorov-Smirnov sup distance of a sample against a CDF callable."""
    v = np.sort(np.asarray(values, dtype=float).ravel())
    m = v.size
    f = np.asarray(cdf(v), dtype=float)
    i = np.arange(1, m + 1)
    return float(max(np.max(i / m - f), np.max(f - (i - 1) / m)))
