"""Checkpoint sequences and segmented prime generation.

Checkpoints follow x_0 = 2, x_{j+1} = x_j + x_j^(21/40) in unconditional
mode and x_{j+1} = x_j + 4 sqrt(x_j) log x_j in RH mode.  Primes are
produced by an odd-only segmented sieve whose segment size is tuned
independently of block boundaries, then cut into the checkpoint blocks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .targets import StripMode

STEP_EXPONENT_UNCONDITIONAL = 21.0 / 40.0
SEGMENT_ODDS_DEFAULT = 1 << 20


@dataclass(frozen=True)
class Checkpoints:
    """Monotone checkpoint list x_0 = 2 < x_1 < ... with the last entry
    at or beyond the requested cutoff."""

    mode: StripMode
    xs: np.ndarray


def checkpoints(mode: StripMode, x_max: float) -> Checkpoints:
    """Full checkpoint list up to the first x_j >= x_max."""
    if x_max < 2.0:
        raise ValueError("x_max must be >= 2")
    xs = [2.0]
    x = 2.0
    while x < x_max:
        if mode.kind == "unconditional":
            x = x + x ** STEP_EXPONENT_UNCONDITIONAL
        else:
            x = x + 4.0 * math.sqrt(x) * math.log(x)
        xs.append(x)
    return Checkpoints(mode, np.array(xs, dtype=float))


def simple_sieve(limit: int) -> np.ndarray:
    """All primes <= limit by a monolithic sieve (base primes / oracle)."""
    if limit < 2:
        return np.zeros(0, dtype=np.int64)
    is_prime = np.ones(limit + 1, dtype=bool)
    is_prime[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if is_prime[p]:
            is_prime[p * p:: p] = False
    return np.flatnonzero(is_prime).astype(np.int64)


def segmented_primes(lo: int, hi: int,
                     segment_odds: int = SEGMENT_ODDS_DEFAULT) -> Iterator[np.ndarray]:
    """Stream primes in [lo, hi) as ascending arrays, one per segment.

    Odd-only bitmap; memory is bounded by the segment, not by hi.
    """
    if hi <= lo:
        return
    base = simple_sieve(math.isqrt(max(hi - 1, 0)))
    if lo <= 2 < hi:
        yield np.array([2], dtype=np.int64)
    low = max(lo, 3)
    if low % 2 == 0:
        low += 1
    span = 2 * segment_odds
    odd_base = base[base > 2]
    while low < hi:
        high = min(low + span, hi)  # exclusive
        count = (high - low + 1) // 2
        mask = np.ones(count, dtype=bool)
        for p in odd_base:
            p = int(p)
            if p * p >= high:
                break
            start = max(p * p, ((low + p - 1) // p) * p)
            if start % 2 == 0:
                start += p
            if start < high:
                mask[(start - low) // 2:: p] = False
        seg = low + 2 * np.flatnonzero(mask).astype(np.int64)
        if len(seg):
            yield seg
        low = high


def primes_upto(limit: int, segment_odds: int = SEGMENT_ODDS_DEFAULT) -> np.ndarray:
    """All primes <= limit as one array (segmented under the hood)."""
    parts = list(segmented_primes(2, limit + 1, segment_odds))
    if not parts:
        return np.zeros(0, dtype=np.int64)
    return np.concatenate(parts)


@dataclass(frozen=True)
class PrimeBlock:
    """Primes of one checkpoint block [lo, hi)."""

    j: int
    lo: float
    hi: float
    primes: np.ndarray


def block_stream(mode: StripMode, x_max: float,
                 segment_odds: int = SEGMENT_ODDS_DEFAULT) -> Iterator[PrimeBlock]:
    """Stream checkpoint blocks in order with their primes.

    Blocks tile [2, x_K) where x_K is the first checkpoint >= x_max.
    """
    cps = checkpoints(mode, x_max)
    xs = cps.xs
    if len(xs) < 2:
        return
    top = int(math.ceil(xs[-1]))
    j = 0
    buffer = np.zeros(0, dtype=np.int64)
    for seg in segmented_primes(2, top, segment_odds):
        if len(seg) == 0:
            continue
        buffer = np.concatenate([buffer, seg]) if len(buffer) else seg
        # flush every block fully contained below the segment's end
        seg_end = seg[-1] + 1
        while j + 1 < len(xs) and xs[j + 1] <= seg_end:
            cut = np.searchsorted(buffer, xs[j + 1], side="left")
            # xs are non-integers in general; side irrelevant except at 2
            yield PrimeBlock(j, xs[j], xs[j + 1], buffer[:cut])
            buffer = buffer[cut:]
            j += 1
    while j + 1 < len(xs):
        cut = np.searchsorted(buffer, xs[j + 1], side="left")
        yield PrimeBlock(j, xs[j], xs[j + 1], buffer[:cut])
        buffer = buffer[cut:]
        j += 1


def interval_stats(mode: StripMode, x_max: float) -> list[dict]:
    """Per-block prime count and log-mass, for checking the empirical
    prime-supply assumptions (short-interval counts, PNT-scale mass)."""
    rows = []
    for block in block_stream(mode, x_max):
        mass = float(np.sum(np.log(block.primes))) if len(block.primes) else 0.0
        rows.append(
            {
                "j": block.j,
                "x_j": block.lo,
                "count": int(len(block.primes)),
                "mass": mass,
            }
        )
    return rows
