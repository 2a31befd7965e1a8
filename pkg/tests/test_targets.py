import pytest

from helsonzeta.errors import FormatError, OverlapError, StripViolation
from helsonzeta.targets import (ALPHA_UNCONDITIONAL, StripMode,
                                TargetPoint, TargetSpec, build_residue_plan,
                                parse_complex, validate_spec)


def plan_of(zeroes=(), poles=(), mode=None):
    mode = mode or StripMode.unconditional()
    spec = TargetSpec(zeroes=tuple(TargetPoint(*z) for z in zeroes),
                      poles=tuple(TargetPoint(*p) for p in poles),
                      mode=mode)
    return build_residue_plan(validate_spec(spec))


def test_alpha_values():
    assert ALPHA_UNCONDITIONAL == 21.0 / 40.0
    assert StripMode.unconditional().alpha == pytest.approx(0.525)
    assert StripMode.rh().alpha == 0.5


def test_residue_signs_and_order():
    plan = plan_of(zeroes=[(0.8 + 5j, 1)], poles=[(0.75 + 2j, 2)])
    assert [e.residue for e in plan.entries] == [-2, 1]
    # canonical order: by (Re, Im)
    assert plan.entries[0].location == 0.75 + 2j
    assert plan.entries[1].location == 0.8 + 5j
    assert [e.index for e in plan.entries] == [0, 1]


def test_duplicate_locations_merge():
    plan = plan_of(zeroes=[(0.8 + 5j, 1), (0.8 + 5j, 2)])
    assert len(plan.entries) == 1
    assert plan.entries[0].residue == 3


def test_strip_violation():
    with pytest.raises(StripViolation):
        plan_of(zeroes=[(0.5 + 1j, 1)])          # below alpha = 21/40
    with pytest.raises(StripViolation):
        plan_of(zeroes=[(1.0 + 1j, 1)])          # boundary Re = 1 excluded
    # allowed in rh mode but not unconditional
    plan_of(zeroes=[(0.51 + 1j, 1)], mode=StripMode.rh())
    with pytest.raises(StripViolation):
        plan_of(zeroes=[(0.51 + 1j, 1)])


def test_zero_pole_overlap_rejected():
    with pytest.raises(OverlapError):
        plan_of(zeroes=[(0.8 + 5j, 1)], poles=[(0.8 + 5j, 1)])


def test_fingerprint_is_location_order_independent():
    a = plan_of(zeroes=[(0.8 + 5j, 1), (0.9 + 2j, 1)])
    b = plan_of(zeroes=[(0.9 + 2j, 1), (0.8 + 5j, 1)])
    assert a.fingerprint() == b.fingerprint()
    c = plan_of(zeroes=[(0.8 + 5j, 2), (0.9 + 2j, 1)])
    assert a.fingerprint() != c.fingerprint()


@pytest.mark.parametrize("text,value", [
    ("0.8+5i", 0.8 + 5j),
    ("0.8+5j", 0.8 + 5j),
    ("-0.75-2.5i", -0.75 - 2.5j),
    ("3i", 3j),
    ("-i", -1j),
    ("2", 2 + 0j),
    ("1e-3+2e2i", 0.001 + 200j),
    ("1.5E+1-2E-1i", 15 - 0.2j),
])
def test_parse_complex(text, value):
    z = parse_complex(text)
    assert z == pytest.approx(value)


def test_parse_complex_rejects_garbage():
    for bad in ("", "1+", "i+i+i", "abc", "1 + 2i i"):
        with pytest.raises(FormatError):
            parse_complex(bad)
