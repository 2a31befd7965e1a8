import cmath
import math

import numpy as np
import pytest

from helsonzeta.chi import (build_chi, extend_leftovers, greedy_block,
                            leftover_prefix_bound, load_table, save_table,
                            verify_assignment)
from helsonzeta.errors import ChecksumMismatch, FormatError, NotPrime, OutOfRange
from helsonzeta.generator import build_generator
from helsonzeta.mellin import mellin_inverse_closed, partial_fractions
from helsonzeta.powerlog import PowerLogSum
from helsonzeta.mellin import QClosedForm
from helsonzeta.targets import (StripMode, TargetPoint, TargetSpec,
                                build_residue_plan, validate_spec)


def make_q_and_plan(zeroes=(), poles=()):
    spec = TargetSpec(zeroes=tuple(TargetPoint(*z) for z in zeroes),
                      poles=tuple(TargetPoint(*p) for p in poles),
                      mode=StripMode.unconditional())
    plan = build_residue_plan(validate_spec(spec))
    if plan.entries:
        q = mellin_inverse_closed(partial_fractions(build_generator(plan)),
                                  shift=True)
    else:
        q = QClosedForm(PowerLogSum.from_terms([]), True)
    return q, plan


@pytest.fixture(scope="module")
def built():
    q, plan = make_q_and_plan(zeroes=[(0.8 + 5j, 1)])
    a, led = build_chi(q, StripMode.unconditional(), 1e4, plan=plan)
    return q, plan, a, led


def test_greedy_single_prime_frozen():
    # r + Q = 5 on the real axis, first prime 101: one prime suffices
    c, chosen, r_next, carry = greedy_block(
        5.0 + 0j, 0.0 + 0j, np.array([101, 103, 107]), threshold=1.0)
    assert c == 0.0
    assert list(chosen) == [101]
    assert not carry
    assert r_next == pytest.approx(5.0 - math.log(101), abs=1e-12)
    assert abs(r_next) == pytest.approx(0.3848795, abs=1e-6)


def test_greedy_phase_is_argument():
    v = 3.0 + 4.0j
    c, chosen, r_next, carry = greedy_block(
        v, 0.0j, np.array([7, 11, 13, 17, 19, 23]), threshold=1.0)
    assert c == pytest.approx(cmath.phase(v))
    # the remainder keeps the phase direction: r_next = (|v| - mass) e^(ic)
    assert abs(r_next) <= 1.0 + 1e-12
    assert cmath.phase(r_next) == pytest.approx(c, abs=1e-12) or abs(r_next) < 1e-12


def test_greedy_zero_input_chooses_nothing():
    c, chosen, r_next, carry = greedy_block(
        0.0j, 0.0j, np.array([2, 3, 5]), threshold=math.log(3.0))
    assert c == 0.0 and len(chosen) == 0 and not carry and r_next == 0


def test_greedy_exhaustion_carries():
    c, chosen, r_next, carry = greedy_block(
        100.0 + 0j, 0.0j, np.array([2, 3]), threshold=1.0)
    assert carry
    assert list(chosen) == [2, 3]
    assert abs(r_next) == pytest.approx(100.0 - math.log(6.0))


def test_checkpoint_invariant(built):
    _, _, a, led = built
    for b in a.blocks:
        if not b.carry:
            assert abs(led.r[b.j + 1]) <= math.log(a.xs[b.j + 1]) + 1e-12


def test_leftover_pairing(built):
    _, _, a, _ = built
    extend_leftovers(a)
    lp = a._leftover_primes
    assert a.chi_lookup(int(lp[0])) == 1.0
    assert a.chi_lookup(int(lp[1])) == -1.0
    assert leftover_prefix_bound(a) <= 1.0 + 1e-12


def test_chi_lookup_phases(built):
    _, _, a, _ = built
    chosen = a.primes[a.chosen_mask]
    if len(chosen):
        p = int(chosen[0])
        j = int(a.block_of_prime[a.chosen_mask][0])
        assert a.chi_lookup(p) == pytest.approx(cmath.exp(1j * a.blocks[j].c))
        # the zeta-side character flips the sign on chosen primes
        assert cmath.exp(1j * a.zeta_phase(p)) == pytest.approx(-a.chi_lookup(p))
    with pytest.raises(NotPrime):
        a.chi_lookup(8)
    with pytest.raises(OutOfRange):
        a.chi_lookup(10 ** 9 + 7)


def test_chi_of_n_multiplicative(built):
    _, _, a, _ = built
    v6 = a.chi_of_n(6)
    assert v6 == pytest.approx(a.chi_of_n(2) * a.chi_of_n(3))
    v12 = a.chi_of_n(12)
    assert v12 == pytest.approx(a.chi_of_n(2) ** 2 * a.chi_of_n(3))
    assert abs(v12) == pytest.approx(1.0)
    assert a.chi_of_n(1) == 1.0


def test_zeta_phases_vector_matches_scalar(built):
    _, _, a, _ = built
    phases = a.zeta_phases_for_primes()
    for idx in (0, 5, 100, len(a.primes) - 1):
        p = int(a.primes[idx])
        assert phases[idx] == pytest.approx(a.zeta_phase(p))


def test_table_round_trip(tmp_path, built):
    q, plan, a, led = built
    path = str(tmp_path / "chi.tbl")
    save_table(a, led, path)
    a2, led2 = load_table(path)
    assert a2.mode.kind == a.mode.kind
    assert np.allclose(led2.r, led.r, rtol=0, atol=1e-12)
    assert np.array_equal(a2.primes, a.primes)
    assert np.array_equal(a2.chosen_mask, a.chosen_mask)
    for b1, b2 in zip(a.blocks, a2.blocks):
        assert b1.c == b2.c and b1.carry == b2.carry
        assert np.array_equal(b1.chosen, b2.chosen)
    assert a2.plan_fingerprint == plan.fingerprint()


def test_table_checksum_guard(tmp_path, built):
    q, plan, a, led = built
    path = str(tmp_path / "chi.tbl")
    save_table(a, led, path)
    raw = open(path).read()
    lines = raw.splitlines()
    # flip one stored digit in a body line
    for i, ln in enumerate(lines):
        if ln.startswith("B ") and " 3 " in ln:
            lines[i] = ln.replace(" 3 ", " 5 ", 1)
            break
    else:
        lines[2] = lines[2] + "0"
    open(path, "w").write("\n".join(lines) + "\n")
    with pytest.raises(ChecksumMismatch):
        load_table(path)


def test_table_truncation_guard(tmp_path, built):
    q, plan, a, led = built
    path = str(tmp_path / "chi.tbl")
    save_table(a, led, path)
    raw = open(path).read()
    open(path, "w").write(raw[: len(raw) // 2])
    with pytest.raises((FormatError, ChecksumMismatch)):
        load_table(path)


def test_verify_assignment_green(built):
    q, plan, a, led = built
    rows = verify_assignment(a, led, q)
    assert all(ok for _, _, _, ok in rows), rows


def test_empty_plan_all_leftover():
    q, plan = make_q_and_plan()
    a, led = build_chi(q, StripMode.unconditional(), 1e4, plan=plan)
    assert not np.any(a.chosen_mask)
    assert np.all(led.r == 0)
    assert leftover_prefix_bound(a) <= 1.0 + 1e-12
