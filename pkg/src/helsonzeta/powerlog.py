"""Closed-form calculus for finite sums of c * x^mu * (log x)^k.

This family is closed under antidifferentiation and under multiplication
by x^(-s), which is what makes every integral in the verification chain
exact: kernels q, their running integrals, and integrals against
x^(-s-1) all live here.  Terms are grouped by exponent, each group
holding a polynomial in log x.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateExponent

_EXP_TOL = 0.0  # exponents are produced by exact arithmetic; match exactly


def _trim(coeffs: np.ndarray) -> np.ndarray:
    nz = np.nonzero(coeffs)[0]
    if len(nz) == 0:
        return np.zeros(0, dtype=complex)
    return np.asarray(coeffs[: nz[-1] + 1], dtype=complex)


@dataclass(frozen=True)
class PowerLogSum:
    """Finite sum over exponent groups: sum_mu x^mu * P_mu(log x).

    groups maps each complex exponent mu to the coefficient array of
    P_mu, ascending in the power of log x.  Immutable; all operations
    return new instances.
    """

    groups: tuple[tuple[complex, tuple[complex, ...]], ...]

    @staticmethod
    def zero() -> "PowerLogSum":
        return PowerLogSum(())

    @staticmethod
    def from_terms(terms) -> "PowerLogSum":
        """Build from an iterable of (mu, logdeg, coeff) triples."""
        acc: dict[complex, dict[int, complex]] = {}
        for mu, k, c in terms:
            mu = complex(mu)
            if c == 0:
                continue
            acc.setdefault(mu, {})
            acc[mu][k] = acc[mu].get(k, 0.0) + complex(c)
        groups = []
        for mu in sorted(acc, key=lambda z: (z.real, z.imag)):
            deg = max(acc[mu])
            coeffs = np.zeros(deg + 1, dtype=complex)
            for k, c in acc[mu].items():
                coeffs[k] = c
            coeffs = _trim(coeffs)
            if len(coeffs):
                groups.append((mu, tuple(coeffs)))
        return PowerLogSum(tuple(groups))

    def terms(self):
        """Iterate (mu, logdeg, coeff) with coeff != 0."""
        for mu, coeffs in self.groups:
            for k, c in enumerate(coeffs):
                if c != 0:
                    yield mu, k, c

    @property
    def is_zero(self) -> bool:
        return len(self.groups) == 0

    def __add__(self, other: "PowerLogSum") -> "PowerLogSum":
        return PowerLogSum.from_terms(
            list(self.terms()) + list(other.terms())
        )

    def scaled(self, factor: complex) -> "PowerLogSum":
        return PowerLogSum.from_terms(
            (mu, k, c * factor) for mu, k, c in self.terms()
        )

    def shifted(self, delta: complex) -> "PowerLogSum":
        """Multiply by x^delta, i.e. shift every exponent by delta."""
        return PowerLogSum(
            tuple((mu + delta, coeffs) for mu, coeffs in self.groups)
        )

    def __call__(self, x):
        """Evaluate at x (scalar or ndarray, x > 0); complex output."""
        x = np.asarray(x, dtype=float)
        lx = np.log(x)
        out = np.zeros(np.shape(x), dtype=complex)
        for mu, coeffs in self.groups:
            poly = np.zeros(np.shape(x), dtype=complex)
            for c in reversed(coeffs):
                poly = poly * lx + c
            out = out + poly * np.exp(mu * lx)
        if out.shape == ():
            return complex(out)
        return out

    def antiderivative(self) -> "PowerLogSum":
        """An antiderivative within the same family.

        Uses int x^mu (log x)^k dx =
            x^(mu+1)(log x)^k/(mu+1) - k/(mu+1) int x^mu (log x)^(k-1) dx
        for mu != -1, and int x^-1 (log x)^k dx = (log x)^(k+1)/(k+1).
        No integration constant is added; use .integral for definite
        integrals.
        """
        terms = []
        for mu, k, c in self.terms():
            if mu == -1:
                terms.append((0.0, k + 1, c / (k + 1)))
                continue
            # iterate the reduction down to logdeg 0
            coeff = c / (mu + 1)
            deg = k
            while True:
                terms.append((mu + 1, deg, coeff))
                if deg == 0:
                    break
                coeff = -coeff * deg / (mu + 1)
                deg -= 1
        return PowerLogSum.from_terms(terms)

    def integral(self, a, b):
        """Exact definite integral over [a, b] (scalars or arrays)."""
        F = self.antiderivative()
        return F(b) - F(a)

    def integral_to_inf(self, a):
        """Exact integral over [a, inf); requires Re mu < -1 for all terms.

        int_a^inf x^mu (log x)^k dx =
            -a^(mu+1)(log a)^k/(mu+1) - k/(mu+1) * int_a^inf x^mu (log x)^(k-1) dx
        """
        for mu, _coeffs in self.groups:
            if mu.real >= -1.0:
                raise DegenerateExponent(
                    f"integral to infinity diverges for exponent {mu}"
                )
        a = np.asarray(a, dtype=float)
        la = np.log(a)
        out = np.zeros(np.shape(a), dtype=complex)
        for mu, coeffs in self.groups:
            apow = np.exp((mu + 1) * la)
            for k, c in enumerate(coeffs):
                if c == 0:
                    continue
                ik = -apow / (mu + 1)
                for j in range(1, k + 1):
                    ik = -apow * la**j / (mu + 1) - j / (mu + 1) * ik
                out = out + c * ik
        if out.shape == ():
            return complex(out)
        return out

    def tail_abs_bound(self, a: float) -> float:
        """Upper bound on int_a^inf |sum| dx via the triangle inequality.

        Bounds each |c x^mu (log x)^k| by |c| x^Re(mu) (log x)^k and
        integrates exactly.  Requires Re mu < -1 for all terms.
        """
        absd = PowerLogSum.from_terms(
            (mu.real, k, abs(c)) for mu, k, c in self.terms()
        )
        if absd.is_zero:
            return 0.0
        return float(abs(absd.integral_to_inf(a)))
