"""Meromorphic generator with prescribed simple poles and residues.

The generator is g(z) = G1(z) * sum_i w_i * g_i(z) with the fixed
envelope G1(z) = exp(-z) z^-2, rational blocks

    g_i(z) = 1 / ((z - z_i) (z - z_i + 1)^(2 n_i)),

weights w_i = m_i / G1(z_i), and n_i chosen so that each weighted block
is bounded by 2^-(i+1) on Re z > 1.  The result is analytic on
Re z > alpha away from the plan locations, has residue m_i at z_i, and
satisfies |g(z)| <= |G1(z)| on Re z >= 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, PoleHit
from .targets import ResiduePlan

EPS_POLE = 1e-9  # clearance below which evaluation refuses to proceed


def envelope_G1(z):
    """The zero-free envelope exp(-z) / z^2 (vectorized)."""
    z = np.asarray(z, dtype=complex)
    out = np.exp(-z) / (z * z)
    if out.shape == ():
        return complex(out)
    return out


@dataclass(frozen=True)
class PoleBlock:
    """One rational block: pole z0, squared-factor exponent n, the
    positive bound C it was sized for, and the weight m/G1(z0)."""

    z0: complex
    n: int
    C: float
    weight: complex
    residue: int


@dataclass(frozen=True)
class GeneratorFunction:
    """Assembled generator: envelope times the weighted block sum."""

    blocks: tuple[PoleBlock, ...]
    plan: ResiduePlan


def select_exponent(z0: complex, C: float) -> int:
    """Smallest n >= 1 making the block bound C hold.

    On Re z > 1 we have |z - z0| >= delta and |z - z0 + 1| >= 1 + delta
    with delta = 1 - Re z0, so (1 + delta)^(2n) > 1/(C delta) forces
    |g_z0| < C there.  For |z - z0| > 20 (with Re z > alpha) we have
    |z - z0 + 1| >= 19, so 20 * 19^(2n) > 1/C forces the far-field
    bound.  Returns the smallest n satisfying both.
    """
    if C <= 0:
        raise ValueError("C must be positive")
    delta = 1.0 - z0.real
    if not (0.0 < delta < 1.0):
        raise DomainError(f"pole {z0} is not inside the strip (Re in (0, 1))")
    # log-space to survive exponents in the hundreds near the boundary
    n = 1
    while 2 * n * math.log1p(delta) + math.log(C * delta) <= 0.0:
        n += 1
    while math.log(20.0) + 2 * n * math.log(19.0) + math.log(C) <= 0.0:
        n += 1
    return n


def eval_block(block: PoleBlock, z):
    """Evaluate 1 / ((z - z0)(z - z0 + 1)^(2n)) exactly.

    Raises PoleHit when z is within EPS_POLE of z0 or z0 - 1.
    """
    z = np.asarray(z, dtype=complex)
    d0 = z - block.z0
    d1 = d0 + 1.0
    if np.min(np.abs(d0)) < EPS_POLE or np.min(np.abs(d1)) < EPS_POLE:
        raise PoleHit(f"evaluation within clearance of pole {block.z0} or {block.z0 - 1}")
    out = 1.0 / (d0 * d1 ** (2 * block.n))
    if out.shape == ():
        return complex(out)
    return out


def build_generator(plan: ResiduePlan) -> GeneratorFunction:
    """Size every block of the plan.

    Entry i gets C_i = |G1(z_i)| / (|m_i| 2^(i+1)), n_i from
    select_exponent, and weight m_i / G1(z_i).  An empty plan yields
    the zero function.
    """
    blocks = []
    for entry in plan.entries:
        g1 = envelope_G1(entry.location)
        C = abs(g1) / (abs(entry.residue) * 2.0 ** (entry.index + 1))
        n = select_exponent(entry.location, C)
        blocks.append(
            PoleBlock(
                z0=entry.location,
                n=n,
                C=C,
                weight=entry.residue / g1,
                residue=entry.residue,
            )
        )
        # both removed singularities of the block must lie left of the strip
        assert (entry.location - 1.0).real < 0.0
    return GeneratorFunction(tuple(blocks), plan)


def eval_generator(G: GeneratorFunction, z):
    """Evaluate g(z) = G1(z) * sum_i w_i g_i(z) on Re z > alpha.

    The sum is finite and exact; PoleHit signals insufficient clearance
    from a plan location, a shifted pole z_i - 1, or the origin.
    """
    z = np.asarray(z, dtype=complex)
    alpha = G.plan.mode.alpha
    if np.min(z.real) <= alpha:
        raise DomainError(f"generator evaluation requires Re z > alpha = {alpha}")
    if np.min(np.abs(z)) < EPS_POLE:
        raise PoleHit("evaluation within clearance of the origin")
    acc = np.zeros(np.shape(z), dtype=complex)
    for block in G.blocks:
        acc = acc + block.weight * eval_block(block, z)
    out = envelope_G1(z) * acc
    if out.shape == ():
        return complex(out)
    return out


def eval_simple_oracle(plan: ResiduePlan, z):
    """Independent oracle: sum_i m_i / (z - z_i).

    The minimal function with the same principal parts as the
    generator; the difference must be analytic near every plan entry.
    """
    z = np.asarray(z, dtype=complex)
    acc = np.zeros(np.shape(z), dtype=complex)
    for entry in plan.entries:
        d = z - entry.location
        if np.min(np.abs(d)) < EPS_POLE:
            raise PoleHit(f"evaluation within clearance of {entry.location}")
        acc = acc + entry.residue / d
    if acc.shape == ():
        return complex(acc)
    return acc
