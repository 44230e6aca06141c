"""Monte Carlo experiment over Haar-random pure states.

Sampling is chunked; each chunk draws from its own child of the
master seed sequence, so the output is reproducible bit for bit no
matter how many worker threads run the chunks.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

CHUNK = 4096


def thread_count() -> int:
    env = os.environ.get("COHERENCE_THREADS")
    if env:
        try:
            n = int(env)
            if n >= 1:
                return n
        except ValueError:
            pass
    return min(8, os.cpu_count() or 1)


def haar_states(d: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """n Haar-random unit vectors in dimension d, one per row."""
    z = rng.normal(size=(n, d)) + 1j * rng.normal(size=(n, d))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def pure_stats(amps: np.ndarray) -> np.ndarray:
    """Columns (max_prob, zero_error_bits, fidelity_at_2) per row.

    Closed forms only: the optimal two-level fidelity either keeps the
    single largest amplitude and flattens the rest, or flattens
    everything, whichever leaves less mean tail mass.
    """
    probs = np.abs(amps) ** 2
    d = probs.shape[1]
    maxp = probs.max(axis=1)
    bits = np.log2(np.floor(1.0 / maxp + 1e-9))
    if d == 1:
        fid2 = np.full(probs.shape[0], 0.5)
    else:
        keep_one = np.sqrt(maxp) + np.sqrt(np.maximum(1.0 - maxp, 0.0))
        norm2 = np.where(maxp >= 0.5, keep_one, np.sqrt(2.0))
        fid2 = norm2**2 / 2.0
    return np.column_stack([maxp, bits, fid2])


@dataclass
class HaarSummary:
    dimension: int
    samples: int
    seed: int
    fraction_distillable: float
    predicted_fraction: float
    stderr: float
    mean_bits: float


def predicted_distillable_fraction(d: int) -> float:
    """Haar probability that the zero-error rate reaches one bit."""
    if d < 2:
        return 0.0
    return 1.0 - d * 2.0 ** (1 - d)


def run_haar(d: int, n: int, seed: int, chunk: int = CHUNK, workers=None):
    """Sample n states, returning (stats array, summary)."""
    if d < 1 or n < 1:
        raise ValueError("need d >= 1 and n >= 1")
    n_chunks = (n + chunk - 1) // chunk
    children = np.random.SeedSequence(seed).spawn(n_chunks)
    stats = np.empty((n, 3))

    def work(i: int):
        lo = i * chunk
        hi = min(lo + chunk, n)
        rng = np.random.default_rng(children[i])
        stats[lo:hi] = pure_stats(haar_states(d, hi - lo, rng))

    nw = workers if workers else thread_count()
    if nw > 1 and n_chunks > 1:
        with ThreadPoolExecutor(max_workers=nw) as pool:
            list(pool.map(work, range(n_chunks)))
    else:
        for i in range(n_chunks):
            work(i)

    frac = float(np.mean(stats[:, 1] >= 1.0))
    return stats, HaarSummary(
        dimension=d,
        samples=n,
        seed=seed,
        fraction_distillable=frac,
        predicted_fraction=predicted_distillable_fraction(d),
        stderr=float(np.sqrt(max(frac * (1.0 - frac), 1e-12) / n)),
        mean_bits=float(np.mean(stats[:, 1])),
    )
