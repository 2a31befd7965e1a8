import math

import numpy as np
import pytest

from helsonzeta.primes import (block_stream, checkpoints, interval_stats,
                               primes_upto, segmented_primes, simple_sieve)
from helsonzeta.targets import StripMode


def test_sieve_small():
    assert list(simple_sieve(30)) == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]


def test_prime_counting_frozen():
    assert len(primes_upto(10 ** 6)) == 78498
    assert len(primes_upto(10 ** 5)) == 9592


def test_segmented_matches_monolithic():
    mono = simple_sieve(2 * 10 ** 5)
    seg = np.concatenate(list(segmented_primes(2, 2 * 10 ** 5,
                                               segment_odds=1 << 12)))
    assert np.array_equal(mono, seg)
    mid = mono[(mono >= 1234) & (mono < 99991)]
    part = np.concatenate(list(segmented_primes(1234, 99991,
                                                segment_odds=1 << 10)))
    assert np.array_equal(mid, part)


def test_checkpoint_frozen_values():
    xs_u = checkpoints(StripMode.unconditional(), 100.0).xs
    assert xs_u[0] == 2.0
    assert xs_u[1] == pytest.approx(2.0 + 2.0 ** (21.0 / 40.0), rel=1e-15)
    assert xs_u[1] == pytest.approx(3.438934, abs=1e-6)
    xs_r = checkpoints(StripMode.rh(), 100.0).xs
    assert xs_r[1] == pytest.approx(2.0 + 4.0 * math.sqrt(2.0) * math.log(2.0),
                                    rel=1e-15)
    assert xs_r[1] == pytest.approx(5.921033, abs=1e-6)


def test_checkpoints_cover_xmax():
    for mode in (StripMode.unconditional(), StripMode.rh()):
        xs = checkpoints(mode, 12345.0).xs
        assert xs[-2] < 12345.0 <= xs[-1]
        assert np.all(np.diff(xs) > 0)


def test_block_stream_partitions_primes():
    mode = StripMode.unconditional()
    blocks = list(block_stream(mode, 10 ** 4, segment_odds=1 << 10))
    xs = checkpoints(mode, 10 ** 4).xs
    assert [b.j for b in blocks] == list(range(len(xs) - 1))
    allp = np.concatenate([b.primes for b in blocks])
    ref = primes_upto(int(math.ceil(xs[-1])) - 1)
    assert np.array_equal(allp, ref[ref < xs[-1]])
    for b in blocks:
        if len(b.primes):
            assert b.lo <= b.primes[0] and b.primes[-1] < b.hi


def test_interval_stats_counts():
    rows = interval_stats(StripMode.unconditional(), 10 ** 4)
    assert sum(r["count"] for r in rows) == len(primes_upto(10 ** 4 + 200))  \
        or sum(r["count"] for r in rows) >= 1229  # pi(1e4)
    # every block past 1e3 contains at least one prime (BHP-scale check)
    for r in rows:
        if r["x_j"] >= 1e3:
            assert r["count"] >= 1
