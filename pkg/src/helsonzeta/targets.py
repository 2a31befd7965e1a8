"""Target zero/pole multisets and the residue plan derived from them.

A target specification lists finite multisets Z (zeroes) and P (poles)
inside the open strip alpha < Re s < 1, where alpha is 21/40 in
unconditional mode and 1/2 in RH mode.  The residue plan is the flat,
canonically ordered list of distinct locations with integer residues:
+multiplicity for zeroes and -multiplicity for poles, matching the
residues of the logarithmic derivative zeta'/zeta at a zero or pole of
that order.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

from .errors import FormatError, OverlapError, StripViolation

ALPHA_UNCONDITIONAL = 21.0 / 40.0
ALPHA_RH = 0.5


@dataclass(frozen=True)
class StripMode:
    """Which strip the construction works in.

    kind is "unconditional" (alpha = 21/40) or "rh" (alpha = 1/2).  The
    RH variant is a configuration choice for the checkpoint step rule,
    not an assertion about the Riemann hypothesis.
    """

    kind: str

    def __post_init__(self):
        if self.kind not in ("unconditional", "rh"):
            raise ValueError(f"unknown mode kind: {self.kind!r}")

    @property
    def alpha(self) -> float:
        return ALPHA_UNCONDITIONAL if self.kind == "unconditional" else ALPHA_RH

    @staticmethod
    def unconditional() -> "StripMode":
        return StripMode("unconditional")

    @staticmethod
    def rh() -> "StripMode":
        return StripMode("rh")


@dataclass(frozen=True)
class TargetPoint:
    """One prescribed zero or pole with its multiplicity."""

    location: complex
    multiplicity: int = 1

    def __post_init__(self):
        if self.multiplicity < 1:
            raise ValueError("multiplicity must be a positive integer")


@dataclass(frozen=True)
class TargetSpec:
    """Validated zero/pole multisets plus the strip mode."""

    zeroes: tuple[TargetPoint, ...]
    poles: tuple[TargetPoint, ...]
    mode: StripMode


@dataclass(frozen=True)
class PlanEntry:
    """A distinct location with its nonzero integer residue and its
    position in the canonical enumeration (used for the 2^-(i+1) weights)."""

    location: complex
    residue: int
    index: int


@dataclass(frozen=True)
class ResiduePlan:
    """Canonically ordered residue map for the pole generator."""

    entries: tuple[PlanEntry, ...]
    mode: StripMode

    def locations(self) -> list[complex]:
        return [e.location for e in self.entries]

    def serialize(self) -> str:
        """Deterministic text form, also used for fingerprints."""
        lines = [f"mode={self.mode.kind}"]
        for e in self.entries:
            lines.append(
                f"{e.index} {e.location.real.hex()} {e.location.imag.hex()} {e.residue}"
            )
        return "\n".join(lines) + "\n"

    def fingerprint(self) -> str:
        return hashlib.sha256(self.serialize().encode()).hexdigest()


def _sort_key(z: complex) -> tuple[float, float]:
    # Canonical enumeration: lexicographic by (Re, Im).
    return (z.real, z.imag)


def _merge(points) -> list[TargetPoint]:
    merged: dict[complex, int] = {}
    for pt in points:
        merged[pt.location] = merged.get(pt.location, 0) + pt.multiplicity
    return [
        TargetPoint(loc, mult)
        for loc, mult in sorted(merged.items(), key=lambda kv: _sort_key(kv[0]))
    ]


def validate_spec(raw: TargetSpec) -> TargetSpec:
    """Normalize and validate a target specification.

    Duplicate locations inside one list are merged by summing
    multiplicities; lists come out sorted by (Re, Im).  Raises
    StripViolation if a location is outside alpha < Re < 1 and
    OverlapError if a location appears in both lists.  Empty Z and P
    are legal.
    """
    zeroes = _merge(raw.zeroes)
    poles = _merge(raw.poles)
    alpha = raw.mode.alpha
    for pt in [*zeroes, *poles]:
        if not (alpha < pt.location.real < 1.0):
            raise StripViolation(
                f"location {pt.location} has Re = {pt.location.real}, "
                f"outside the open strip ({alpha}, 1)"
            )
    zset = {pt.location for pt in zeroes}
    pset = {pt.location for pt in poles}
    common = zset & pset
    if common:
        raise OverlapError(f"locations in both Z and P: {sorted(common, key=_sort_key)}")
    return TargetSpec(tuple(zeroes), tuple(poles), raw.mode)


def build_residue_plan(spec: TargetSpec) -> ResiduePlan:
    """Flatten a validated spec into the canonical residue plan.

    Zeroes contribute +multiplicity, poles -multiplicity, because
    d/ds log (s - s0)^m = m/(s - s0).
    """
    signed: list[tuple[complex, int]] = [
        (pt.location, +pt.multiplicity) for pt in spec.zeroes
    ] + [(pt.location, -pt.multiplicity) for pt in spec.poles]
    signed.sort(key=lambda lr: _sort_key(lr[0]))
    entries = tuple(
        PlanEntry(loc, res, i) for i, (loc, res) in enumerate(signed)
    )
    return ResiduePlan(entries, spec.mode)


def _split_last_sign(body: str) -> int:
    """Index of the +/- separating real and imaginary parts, or -1.

    Skips a leading sign and signs that belong to an exponent (after
    e/E in decimal literals or p/P in hex literals).
    """
    for i in range(len(body) - 1, 0, -1):
        if body[i] in "+-" and body[i - 1] not in "eEpP":
            return i
    return -1


def _parse_real(token: str) -> float:
    t = token.lstrip("+")
    if "0x" in t or "0X" in t:
        return float.fromhex(t)
    return float(t)


def parse_complex(text: str) -> complex:
    """Parse complex literals like "0.8+5i", "-0.5-2.5i", "3i", "0.8".

    Hexadecimal float parts (as written by hex-exact serialization) are
    accepted in the same shapes.
    """
    s = text.strip().replace(" ", "")
    if not s:
        raise FormatError("empty complex literal")
    try:
        if s[-1] in "ij":
            body = s[:-1]
            idx = _split_last_sign(body)
            if idx < 0:
                if body in ("", "+"):
                    return complex(0.0, 1.0)
                if body == "-":
                    return complex(0.0, -1.0)
                return complex(0.0, _parse_real(body))
            imag = body[idx:]
            if imag in ("+", "-"):
                imag += "1"
            return complex(_parse_real(body[:idx]), _parse_real(imag))
        return complex(_parse_real(s), 0.0)
    except (ValueError, OverflowError) as exc:
        raise FormatError(f"cannot parse complex literal: {text!r}") from exc
