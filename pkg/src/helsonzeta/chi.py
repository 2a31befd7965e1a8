"""Greedy phase assignment keeping the remainder small at checkpoints.

The remainder is r(x) = int_1^x q(y) dy - sum_{p <= x, p chosen}
chi(p) log p.  Block by block, the phase c_j = arg(r(x_j) + Q_j) is
assigned to an ascending prefix of the block's primes, chosen just
large enough that |r(x_{j+1})| <= log x_{j+1}; blocks that run out of
primes first are flagged as carries and their excess is absorbed later.
Primes never chosen ("leftovers") get alternating +1/-1 values in
ascending order, which keeps their partial log-sums below log x.

Sign conventions are delicate here: the character whose Helson zeta
function realizes the prescribed zeroes and poles is NOT the stored
construction value chi on chosen primes but its negative (see
engine.Evaluator).  This module stores and exposes the construction
values; chi_of_n composes the zeta-side character.
"""

from __future__ import annotations

import cmath
import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ChecksumMismatch, FormatError, NotPrime, OutOfRange
from .mellin import QClosedForm, integral_q_checkpoints, integrate_q
from .primes import block_stream, checkpoints
from .targets import PlanEntry, ResiduePlan, StripMode

LEFTOVER_RULE = "pair-ascending-v1"
TABLE_HEADER = "HELSON-CHI v1"


@dataclass(frozen=True)
class BlockRecord:
    """Outcome of the greedy step on one checkpoint block."""

    j: int
    c: float                  # phase in (-pi, pi]
    chosen: np.ndarray        # ascending primes assigned e^(i c)
    Q: complex                # exact int_{x_j}^{x_{j+1}} q
    carry: bool


@dataclass(frozen=True)
class RemainderLedger:
    """Checkpoint remainders and per-block amplitude bounds."""

    xs: np.ndarray            # checkpoints, len nblocks + 1
    r: np.ndarray             # complex, r[j] = r(x_j), len nblocks + 1
    B: np.ndarray             # float, B_j = |r(x_j)| + |Q_j| + chosen log-mass


@dataclass
class ChiAssignment:
    """The built character table restricted to primes <= x_max.

    Carries the full prime array with per-prime block indices and the
    chosen mask, so lookups and leftover pairing are O(log n).
    """

    mode: StripMode
    x_max: float
    xs: np.ndarray
    blocks: list[BlockRecord]
    plan_entries: tuple[PlanEntry, ...]
    plan_fingerprint: str
    leftover_rule: str = LEFTOVER_RULE
    primes: np.ndarray = field(default=None, repr=False)
    block_of_prime: np.ndarray = field(default=None, repr=False)
    chosen_mask: np.ndarray = field(default=None, repr=False)
    _leftover_primes: np.ndarray = field(default=None, repr=False)
    _leftover_rank: np.ndarray = field(default=None, repr=False)
    _extended: bool = False
    _spf_limit: int = field(default=0, repr=False)
    _theta_table: np.ndarray = field(default=None, repr=False)

    # -- construction values ------------------------------------------------

    def _check_prime(self, p: int) -> int:
        if p > self.x_max and p >= self.xs[-1]:
            raise OutOfRange(f"{p} exceeds the table range x_max = {self.x_max}")
        idx = int(np.searchsorted(self.primes, p))
        if idx >= len(self.primes) or self.primes[idx] != p:
            raise NotPrime(f"{p} is not a prime in the table")
        return idx

    def chi_lookup(self, p: int) -> complex:
        """Construction value at a prime: e^(i c_j) on chosen primes,
        +1/-1 by ascending pairing on leftovers."""
        idx = self._check_prime(p)
        if self.chosen_mask[idx]:
            j = int(self.block_of_prime[idx])
            return cmath.exp(1j * self.blocks[j].c)
        if not self._extended:
            extend_leftovers(self)
        rank = int(np.searchsorted(self._leftover_primes, p))
        return 1.0 + 0.0j if rank % 2 == 0 else -1.0 + 0.0j

    def construction_phase(self, p: int) -> float:
        """Phase of chi_lookup(p); exact unimodularity by construction."""
        idx = self._check_prime(p)
        if self.chosen_mask[idx]:
            return self.blocks[int(self.block_of_prime[idx])].c
        if not self._extended:
            extend_leftovers(self)
        rank = int(np.searchsorted(self._leftover_primes, p))
        return 0.0 if rank % 2 == 0 else math.pi

    def zeta_phase(self, p: int) -> float:
        """Phase of the zeta-side character at p.

        The analytic continuation built from the ledger has principal
        parts +m_i exactly when the multiplicative character flips the
        sign of the construction value on chosen primes and keeps the
        leftover pairing; see engine.Evaluator for the derivation.
        """
        idx = self._check_prime(p)
        if self.chosen_mask[idx]:
            return self.blocks[int(self.block_of_prime[idx])].c + math.pi
        return self.construction_phase(p)

    def chi_of_n(self, n: int, n_max: int = 1_000_000) -> complex:
        """Zeta-side character at any integer via its factorization.

        Completely multiplicative: chi(n) = prod chi(p)^v_p(n); phases
        are summed so the result is exactly unimodular.  Requires every
        prime factor (hence n) within the smallest-prime-factor table.
        """
        if n < 1:
            raise ValueError("n must be a positive integer")
        if n == 1:
            return 1.0 + 0.0j
        limit = min(int(self.x_max), n_max)
        if n > limit:
            raise OutOfRange(f"{n} exceeds the factorization limit {limit}")
        self._ensure_spf(limit)
        return cmath.exp(1j * float(self._theta_table[n]))

    def _ensure_spf(self, limit: int):
        if self._spf_limit >= limit and self._theta_table is not None:
            return
        theta = np.zeros(limit + 1, dtype=float)
        for p in self.primes[self.primes <= limit]:
            p = int(p)
            tp = self.zeta_phase(p)
            pk = p
            while pk <= limit:
                theta[pk::pk] += tp
                pk *= p
        self._theta_table = theta
        self._spf_limit = limit

    def zeta_phases_for_primes(self) -> np.ndarray:
        """Zeta-side phases aligned with self.primes (vectorized)."""
        if not self._extended:
            extend_leftovers(self)
        phases = np.where(self._leftover_rank % 2 == 0, 0.0, math.pi)
        c_per_block = np.array([b.c for b in self.blocks], dtype=float)
        chosen = self.chosen_mask
        phases[chosen] = c_per_block[self.block_of_prime[chosen]] + math.pi
        return phases

    def construction_phases_for_primes(self) -> np.ndarray:
        if not self._extended:
            extend_leftovers(self)
        phases = np.where(self._leftover_rank % 2 == 0, 0.0, math.pi)
        c_per_block = np.array([b.c for b in self.blocks], dtype=float)
        chosen = self.chosen_mask
        phases[chosen] = c_per_block[self.block_of_prime[chosen]]
        return phases


def greedy_block(r: complex, Q: complex, primes: np.ndarray, threshold: float):
    """One greedy step: pick the phase and an ascending prime prefix.

    Returns (c, chosen, r_next, carry).  The phase is arg(r + Q) (zero
    when r + Q = 0); primes are added in ascending order while
    | |r + Q| - sum log p | > threshold; carry flags exhaustion.  Each
    decrement log p is below the threshold, so a non-carry stop lands
    in [-threshold, threshold].
    """
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    v = complex(r) + complex(Q)
    absv = abs(v)
    c = cmath.phase(v) if absv > 0 else 0.0
    primes = np.asarray(primes, dtype=np.int64)
    if absv <= threshold or len(primes) == 0:
        chosen = primes[:0]
        carry = absv > threshold
        mass = 0.0
    else:
        cum = np.cumsum(np.log(primes.astype(float)))
        k = int(np.searchsorted(cum, absv - threshold, side="left"))
        if k >= len(cum):
            chosen = primes
            mass = float(cum[-1])
            carry = abs(absv - mass) > threshold
        else:
            chosen = primes[: k + 1]
            mass = float(cum[k])
            carry = False
    r_next = v - cmath.exp(1j * c) * mass
    return c, chosen, r_next, carry


def build_chi(q: QClosedForm, mode: StripMode, x_max: float,
              plan: ResiduePlan | None = None):
    """Run the greedy induction over all checkpoint blocks.

    Returns (ChiAssignment, RemainderLedger).  r(x_0) = int_1^2 q
    (exact); each block uses threshold log x_{j+1}.
    """
    if x_max < 2.0:
        raise ValueError("x_max must be >= 2")
    cps = checkpoints(mode, x_max)
    xs = cps.xs
    nblocks = len(xs) - 1
    iq = integral_q_checkpoints(q, xs)
    Qs = iq[1:] - iq[:-1]

    r = np.zeros(nblocks + 1, dtype=complex)
    B = np.zeros(nblocks, dtype=float)
    r[0] = integrate_q(q, 1.0, 2.0)

    blocks: list[BlockRecord] = []
    prime_parts: list[np.ndarray] = []
    block_idx_parts: list[np.ndarray] = []
    chosen_parts: list[np.ndarray] = []
    for block in block_stream(mode, x_max):
        j = block.j
        threshold = math.log(xs[j + 1])
        c, chosen, r_next, carry = greedy_block(r[j], Qs[j], block.primes, threshold)
        mass = float(np.sum(np.log(chosen.astype(float)))) if len(chosen) else 0.0
        B[j] = abs(r[j]) + abs(Qs[j]) + mass
        r[j + 1] = r_next
        blocks.append(BlockRecord(j, c, chosen, complex(Qs[j]), carry))
        prime_parts.append(block.primes)
        block_idx_parts.append(np.full(len(block.primes), j, dtype=np.int32))
        mask = np.zeros(len(block.primes), dtype=bool)
        mask[: len(chosen)] = True
        chosen_parts.append(mask)

    primes = np.concatenate(prime_parts) if prime_parts else np.zeros(0, np.int64)
    fingerprint = plan.fingerprint() if plan is not None else ""
    entries = plan.entries if plan is not None else ()
    assignment = ChiAssignment(
        mode=mode,
        x_max=float(x_max),
        xs=xs,
        blocks=blocks,
        plan_entries=entries,
        plan_fingerprint=fingerprint,
        primes=primes,
        block_of_prime=(np.concatenate(block_idx_parts) if block_idx_parts
                        else np.zeros(0, np.int32)),
        chosen_mask=(np.concatenate(chosen_parts) if chosen_parts
                     else np.zeros(0, bool)),
    )
    ledger = RemainderLedger(xs=xs, r=r, B=B)
    return assignment, ledger


def extend_leftovers(a: ChiAssignment) -> ChiAssignment:
    """Materialize the leftover pairing.

    Leftovers are all table primes not in any chosen set, in ascending
    order; even ranks get +1, odd ranks -1 (a trailing unpaired prime
    keeps +1).  Pairing is global, independent of block boundaries, so
    the signed log-mass telescopes: |S_L(x)| <= log x for all x.
    """
    leftover = a.primes[~a.chosen_mask]
    rank = np.zeros(len(a.primes), dtype=np.int64)
    rank[~a.chosen_mask] = np.arange(len(leftover))
    a._leftover_primes = leftover
    a._leftover_rank = rank
    a._extended = True
    return a


def leftover_prefix_bound(a: ChiAssignment) -> float:
    """max over table primes of |S_L(p)| / log p (should be <= 1)."""
    if not a._extended:
        extend_leftovers(a)
    lp = a._leftover_primes
    if len(lp) == 0:
        return 0.0
    signs = np.where(np.arange(len(lp)) % 2 == 0, 1.0, -1.0)
    s = np.cumsum(signs * np.log(lp.astype(float)))
    return float(np.max(np.abs(s) / np.log(lp.astype(float))))


# ---------------------------------------------------------------------------
# table serialization (bit-exact, hash-terminated)
# ---------------------------------------------------------------------------

def _table_lines(a: ChiAssignment) -> list[str]:
    lines = [TABLE_HEADER]
    lines.append(f"mode={a.mode.kind}")
    lines.append(f"xmax={float(a.x_max).hex()}")
    lines.append(f"targets={len(a.plan_entries)}")
    for e in a.plan_entries:
        lines.append(
            f"T {e.location.real.hex()} {e.location.imag.hex()} {e.residue}"
        )
    for b in a.blocks:
        if len(b.chosen) == 0 and not b.carry:
            continue
        parts = [
            "B",
            str(b.j),
            float(a.xs[b.j]).hex(),
            float(b.c).hex(),
            float(b.Q.real).hex(),
            float(b.Q.imag).hex(),
            str(len(b.chosen)),
        ]
        parts.extend(str(int(p)) for p in b.chosen)
        if b.carry:
            parts.append("CARRY")
        lines.append(" ".join(parts))
    return lines


def save_table(a: ChiAssignment, ledger: RemainderLedger, path: str) -> None:
    """Write the chi table; trailing line holds the SHA-256 of the body.

    Leftovers are implicit: they are reproduced from the sieve and the
    chosen sets at load time.  The ledger is not stored; it is
    recomputed exactly on load.
    """
    lines = _table_lines(a)
    body = "\n".join(lines) + "\n"
    digest = hashlib.sha256(body.encode()).hexdigest()
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(body)
        fh.write(f"H {digest}\n")


def load_table(path: str):
    """Read a chi table and rebuild the full assignment and ledger.

    The kernel q is reconstructed from the stored targets, the sieve is
    re-run, and the remainder sequence is recomputed from the stored
    phases and chosen sets; stored Q values are checked against the
    exact recomputation to 1e-9 relative.
    """
    from .generator import build_generator
    from .mellin import mellin_inverse_closed, partial_fractions
    from .powerlog import PowerLogSum
    from .targets import StripMode as SM

    with open(path, "r", encoding="utf-8") as fh:
        raw = fh.read()
    lines = raw.splitlines()
    if len(lines) < 5 or lines[0] != TABLE_HEADER:
        raise FormatError("missing or malformed table header")
    if not lines[-1].startswith("H "):
        raise FormatError("missing trailing hash line (truncated file?)")
    body = "\n".join(lines[:-1]) + "\n"
    digest = hashlib.sha256(body.encode()).hexdigest()
    if lines[-1] != f"H {digest}":
        raise ChecksumMismatch("table hash mismatch")

    try:
        mode = SM(lines[1].split("=", 1)[1])
        x_max = float.fromhex(lines[2].split("=", 1)[1])
        ntargets = int(lines[3].split("=", 1)[1])
        entries = []
        for k in range(ntargets):
            tag, re_s, im_s, res_s = lines[4 + k].split()
            if tag != "T":
                raise FormatError("expected a T line")
            entries.append(
                (complex(float.fromhex(re_s), float.fromhex(im_s)), int(res_s))
            )
        stored: dict[int, tuple[float, complex, list[int], bool]] = {}
        for line in lines[4 + ntargets: -1]:
            parts = line.split()
            if parts[0] != "B":
                raise FormatError(f"unexpected line: {line[:40]!r}")
            j = int(parts[1])
            c = float.fromhex(parts[3])
            Q = complex(float.fromhex(parts[4]), float.fromhex(parts[5]))
            count = int(parts[6])
            carry = parts[-1] == "CARRY"
            chosen = [int(t) for t in parts[7: 7 + count]]
            stored[j] = (c, Q, chosen, carry)
    except (IndexError, ValueError) as exc:
        raise FormatError(f"malformed table line: {exc}") from exc

    plan = ResiduePlan(
        tuple(PlanEntry(loc, res, i) for i, (loc, res) in enumerate(entries)),
        mode,
    )
    if entries:
        G = build_generator(plan)
        q = mellin_inverse_closed(partial_fractions(G), shift=True)
    else:
        q = QClosedForm(PowerLogSum.from_terms([]), True)

    cps = checkpoints(mode, x_max)
    xs = cps.xs
    nblocks = len(xs) - 1
    iq = integral_q_checkpoints(q, xs)
    Qs = iq[1:] - iq[:-1]

    r = np.zeros(nblocks + 1, dtype=complex)
    B = np.zeros(nblocks, dtype=float)
    r[0] = integrate_q(q, 1.0, 2.0)
    blocks: list[BlockRecord] = []
    prime_parts, block_idx_parts, chosen_parts = [], [], []
    for block in block_stream(mode, x_max):
        j = block.j
        if j in stored:
            c, Q_stored, chosen_list, carry = stored[j]
            scale = max(abs(Q_stored), abs(Qs[j]), 1e-30)
            if abs(Q_stored - Qs[j]) / scale > 1e-9 and abs(Q_stored - Qs[j]) > 1e-12:
                raise FormatError(
                    f"stored Q at block {j} disagrees with recomputation"
                )
            chosen = np.array(chosen_list, dtype=np.int64)
        else:
            # blocks that chose nothing are not stored; their phase is
            # reproduced bit-exactly from the recomputed remainder
            v = complex(r[j]) + complex(Qs[j])
            c = cmath.phase(v) if abs(v) > 0 else 0.0
            chosen, carry = block.primes[:0], False
        mass = float(np.sum(np.log(chosen.astype(float)))) if len(chosen) else 0.0
        B[j] = abs(r[j]) + abs(Qs[j]) + mass
        r[j + 1] = r[j] + Qs[j] - cmath.exp(1j * c) * mass
        blocks.append(BlockRecord(j, c, chosen, complex(Qs[j]), carry))
        prime_parts.append(block.primes)
        block_idx_parts.append(np.full(len(block.primes), j, dtype=np.int32))
        mask = np.isin(block.primes, chosen, assume_unique=True)
        if int(mask.sum()) != len(chosen):
            raise FormatError(f"chosen primes of block {j} not within the block")
        chosen_parts.append(mask)

    assignment = ChiAssignment(
        mode=mode,
        x_max=x_max,
        xs=xs,
        blocks=blocks,
        plan_entries=plan.entries,
        plan_fingerprint=plan.fingerprint(),
        primes=np.concatenate(prime_parts) if prime_parts else np.zeros(0, np.int64),
        block_of_prime=(np.concatenate(block_idx_parts) if block_idx_parts
                        else np.zeros(0, np.int32)),
        chosen_mask=(np.concatenate(chosen_parts) if chosen_parts
                     else np.zeros(0, bool)),
    )
    return assignment, RemainderLedger(xs=xs, r=r, B=B)


def verify_assignment(a: ChiAssignment, ledger: RemainderLedger,
                      q: QClosedForm) -> list[tuple[str, float, float, bool]]:
    """Re-run the greedy from scratch and check every ledger invariant.

    Returns (name, measured, bound, ok) rows: phase correctness,
    checkpoint bounds on non-carry blocks, recomputed-remainder
    agreement, and greedy determinism (chosen sets identical).
    """
    rebuilt, led2 = build_chi(q, a.mode, a.x_max, plan=None)
    rows = []
    same = len(rebuilt.blocks) == len(a.blocks) and all(
        rb.j == b.j and rb.carry == b.carry and np.array_equal(rb.chosen, b.chosen)
        and rb.c == b.c
        for rb, b in zip(rebuilt.blocks, a.blocks)
    )
    rows.append(("greedy_determinism", 0.0 if same else 1.0, 0.0, same))

    scale = np.maximum(np.abs(ledger.r), 1.0)
    r_dev = float(np.max(np.abs(ledger.r - led2.r) / scale))
    rows.append(("remainder_recomputation", r_dev, 1e-9, r_dev <= 1e-9))

    phase_defect = 0.0
    for b in a.blocks:
        v = ledger.r[b.j] + b.Q
        if abs(v) > 0:
            phase_defect = max(phase_defect,
                               abs(v - abs(v) * cmath.exp(1j * b.c)))
    rows.append(("phase_correctness", phase_defect, 1e-12,
                 phase_defect <= 1e-12))

    worst = 0.0
    for b in a.blocks:
        if not b.carry:
            worst = max(worst,
                        abs(ledger.r[b.j + 1]) / math.log(a.xs[b.j + 1]))
    rows.append(("checkpoint_bound", worst, 1.0, worst <= 1.0 + 1e-12))

    lb = leftover_prefix_bound(a)
    rows.append(("leftover_bound", lb, 1.0, lb <= 1.0 + 1e-12))
    return rows
