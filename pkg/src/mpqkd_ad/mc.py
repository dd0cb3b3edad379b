"""Stochastic and exhaustive oracles for the pairing rate and AD block statistics.

Random numbers come from counter-based Philox substreams keyed by
``(seed, chunk_index)``, so an estimate depends only on ``(seed, n)`` and not
on how many workers generated the chunks.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

CHUNK = 1 << 20
MIN_ROUNDS = 100_000
MAX_ENUM_BLOCK = 20
_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class McEstimate:
    mean: float
    stderr: float
    n: int
    seed: int

    def within(self, expected: float, k: float = 3.0) -> bool:
        return abs(self.mean - expected) <= k * self.stderr


def _rng(seed: int, chunk: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=[seed & _MASK64, chunk]))


def _chunks(n: int) -> list[tuple[int, int]]:
    return [(i, min(CHUNK, n - i * CHUNK)) for i in range((n + CHUNK - 1) // CHUNK)]


def _map_chunks(fn, n: int, workers: int) -> list:
    chunks = _chunks(n)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda c: fn(*c), chunks))
    return [fn(*c) for c in chunks]


def _binomial(count: int, n: int, seed: int) -> McEstimate:
    mean = count / n if n else 0.0
    stderr = math.sqrt(mean * (1.0 - mean) / n) if n else 0.0
    return McEstimate(mean, stderr, n, seed)


def count_pairs(click_positions: np.ndarray, delta: int) -> int:
    """Pairs formed from sorted click positions.

    A click waits up to ``delta`` rounds for a partner. On timeout it is
    discarded and the late click becomes the new first click. Along a run of
    ``m`` consecutive gaps that are all ``<= delta`` the clicks alternate
    first/second, giving ``ceil(m / 2)`` pairs; a long gap always restarts.
    """
    if click_positions.size < 2:
        return 0
    short = np.diff(click_positions) <= delta
    padded = np.concatenate(([False], short, [False])).astype(np.int8)
    edges = np.diff(padded)
    starts = np.flatnonzero(edges == 1)
    ends = np.flatnonzero(edges == -1)
    runs = ends - starts
    return int(((runs + 1) // 2).sum())


def mc_pair_rate(
    p: float, delta: int, n_rounds: int, seed: int, workers: int = 1
) -> McEstimate:
    """Simulated pairs per round for i.i.d. clicks with probability ``p``."""
    if not (0.0 < p < 1.0):
        raise ValueError(f"p must be in (0, 1), got {p}")
    if n_rounds < MIN_ROUNDS:
        raise ValueError(f"n_rounds must be >= {MIN_ROUNDS}, got {n_rounds}")
    if delta < 1:
        raise ValueError(f"delta must be >= 1, got {delta}")

    def clicks(index: int, size: int) -> np.ndarray:
        hits = _rng(seed, index).random(size) < p
        return np.flatnonzero(hits) + index * CHUNK

    positions = np.concatenate(_map_chunks(clicks, n_rounds, workers))
    return _binomial(count_pairs(positions, delta), n_rounds, seed)


def mc_ad_block(
    E: float, b: int, n_blocks: int, seed: int, workers: int = 1
) -> tuple[McEstimate, McEstimate]:
    """Simulated AD success probability and post-AD error rate.

    Each block holds ``b`` i.i.d. error bits (1 with probability ``E``). A
    block survives when all bits agree; it is an error when they are all 1.
    """
    if not (0.0 <= E <= 1.0):
        raise ValueError(f"E must be in [0, 1], got {E}")
    if b < 1:
        raise ValueError(f"b must be >= 1, got {b}")
    if n_blocks < 1:
        raise ValueError("n_blocks must be positive")

    def counts(index: int, size: int) -> tuple[int, int]:
        bits = _rng(seed, index).random((size, b)) < E
        ones = bits.sum(axis=1)
        all_one = int(np.count_nonzero(ones == b))
        all_zero = int(np.count_nonzero(ones == 0))
        return all_zero + all_one, all_one

    parts = _map_chunks(counts, n_blocks, workers)
    ok = sum(c[0] for c in parts)
    bad = sum(c[1] for c in parts)
    return _binomial(ok, n_blocks, seed), _binomial(bad, ok, seed)


def enumerate_ad_block(E: float, b: int) -> tuple[float, float]:
    """Exact ``(q_s, e_tilde)`` by summing over all ``2**b`` error patterns."""
    if b > MAX_ENUM_BLOCK:
        raise ValueError(f"b={b} exceeds the enumeration limit {MAX_ENUM_BLOCK}")
    if b < 1:
        raise ValueError(f"b must be >= 1, got {b}")
    success = 0.0
    errors = 0.0
    for pattern in itertools.product((0, 1), repeat=b):
        k = sum(pattern)
        prob = E**k * (1.0 - E) ** (b - k)
        if k == 0 or k == b:
            success += prob
            if k == b:
                errors += prob
    return success, errors / success
