"""Batched Monte Carlo driver with deterministic stream-ordered merging.

Work is split into batches of fixed size; batch b uses the RNG stream
``(seed, stream_id=b)``. Results are merged in stream order, so the output
is a pure function of (config, seed) regardless of the worker count
(``CAVITYDELAY_WORKERS``, default 1; threads — the kernels release the GIL).
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .coupling import CouplingSpec, TimeDelayBatch
from .rng import RngStream

__all__ = ["BatchMoments", "McResult", "worker_count", "run_matrix", "DEFAULT_BATCH"]

DEFAULT_BATCH = 4096


def worker_count() -> int:
    raw = os.environ.get("CAVITYDELAY_WORKERS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


@dataclass
class BatchMoments:
    """Per-batch moment triples, enough for batch-level bootstrap errors."""

    count: np.ndarray
    total: np.ndarray
    total_sq: np.ndarray

    @property
    def n(self) -> int:
        return int(self.count.sum())

    @property
    def mean(self) -> float:
        return float(self.total.sum() / self.count.sum())

    @property
    def variance(self) -> float:
        n = self.count.sum()
        mu = self.total.sum() / n
        return float(self.total_sq.sum() / n - mu * mu)


@dataclass
class McResult:
    values: np.ndarray | None
    moments: BatchMoments
    kind: str
    beta: int
    channels: int
    g: float
    counts: np.ndarray | None = None
    underflow: int = 0
    overflow: int = 0
    extras: dict = field(default_factory=dict)

    def batch(self) -> TimeDelayBatch:
        if self.values is None:
            raise ValueError("raw values were not collected for this run")
        return TimeDelayBatch(self.values, kind=self.kind, beta=self.beta,
                              channels=self.channels, g=self.g)


def run_matrix(observable: str, beta: int, n: int, spec: CouplingSpec,
               samples: int, seed: int, *, batch_size: int = DEFAULT_BATCH,
               edges: np.ndarray | None = None, collect: bool = True,
               workers: int | None = None) -> McResult:
    """Sample tau_W ('wigner') or pooled eigenvalues ('proper') of Qs.

    Streams every batch into the histogram (when ``edges`` is given) and the
    moment accumulators; raw values are kept only when ``collect``.
    """
    if observable not in ("wigner", "proper"):
        raise ValueError(f"unknown matrix observable {observable!r}")
    if samples < 1:
        raise ValueError("samples must be >= 1")
    g = spec.g
    nbatch = (samples + batch_size - 1) // batch_size
    sizes = [batch_size] * (nbatch - 1) + [samples - batch_size * (nbatch - 1)]

    def one(b: int) -> np.ndarray:
        rng = RngStream(seed, b).generator()
        z, x = kernels.draw_blocks(beta, n, sizes[b], rng)
        if observable == "wigner":
            return kernels.wigner_batch(beta, n, g, z, x)
        return kernels.proper_batch(beta, n, g, z, x).ravel()

    w = worker_count() if workers is None else max(1, workers)
    if w == 1:
        results = map(one, range(nbatch))
    else:
        pool = ThreadPoolExecutor(max_workers=w)
        results = pool.map(one, range(nbatch))

    cnt = np.zeros(nbatch, dtype=np.int64)
    tot = np.zeros(nbatch)
    tot2 = np.zeros(nbatch)
    hist = None if edges is None else np.zeros(len(edges) - 1, dtype=np.int64)
    under = over = 0
    chunks = [] if collect else None
    for b, vals in enumerate(results):
        cnt[b] = vals.size
        tot[b] = vals.sum()
        tot2[b] = (vals * vals).sum()
        if edges is not None:
            h, _ = np.histogram(vals, bins=edges)
            hist += h
            under += int((vals < edges[0]).sum())
            over += int((vals >= edges[-1]).sum())
        if collect:
            chunks.append(vals)
    if w > 1:
        pool.shutdown()

    values = np.concatenate(chunks) if collect else None
    return McResult(values=values,
                    moments=BatchMoments(cnt, tot, tot2),
                    kind=observable, beta=beta, channels=n, g=g,
                    counts=hist, underflow=under, overflow=over)
