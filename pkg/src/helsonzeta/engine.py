"""Analytic continuation, residue extraction, and zeta cross-routes.

The chain of identities, all exact at finite truncation X = last
checkpoint, with r(x) = int_1^x q - sum_{p<=x chosen} chi_c(p) log p:

    s int_1^X r(x) x^(-s-1) dx
        = int_1^X q(x) x^(-s) dx
          - sum_{p<=X chosen} chi_c(p) log p p^(-s)  -  r(X) X^(-s).

Let psi be the completely multiplicative unimodular character with
psi(p) = -chi_c(p) on chosen primes and psi(p) = chi_c(p) = +-1 on
leftovers.  Writing F(s) = s int_1^inf r x^(-s-1) dx,
L(s) = sum_{leftover} chi_c(p) log p p^(-s) and g1 for the closed-form
generator (the full Mellin transform of q), the prime sums combine to

    zeta'_psi / zeta_psi (s) = g1(s) - F(s) - L(s) - ppt_psi(s),

where ppt is the prime-power tail sum_{p, k>=2} psi(p)^k log p p^(-ks).
F, L and ppt are analytic in the strip, so the right-hand side has
exactly the principal parts of g1: simple poles with residue m_i at
each target.  Truncating F and L at X costs an explicitly bounded
tail, and contour averages of the truncated g recover the residues.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .chi import ChiAssignment, RemainderLedger, extend_leftovers
from .errors import (AmbiguousWinding, DomainError, PathBlocked,
                     SeparationError)
from .generator import EPS_POLE, GeneratorFunction, eval_generator
from .mellin import QClosedForm, integrate_q, mellin_transform_q
from .powerlog import PowerLogSum
from .targets import ResiduePlan

PPT_MARGIN = 0.01          # prime-power sums need Re s > 1/2 + margin
CONTOUR_NODES_DEFAULT = 256
CONTOUR_RADIUS_CAP = 0.02
PATH_CLEARANCE = 0.05
WINDING_DEFECT_MAX = 0.25


@dataclass(frozen=True)
class ContourSpec:
    """A positively oriented circle for residue/winding extraction."""

    center: complex
    radius: float
    nodes: int = CONTOUR_NODES_DEFAULT

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("radius must be positive")
        if self.nodes < 8 or self.nodes & (self.nodes - 1):
            raise ValueError("nodes must be a power of two, at least 8")

    def points(self) -> np.ndarray:
        theta = 2.0 * np.pi * np.arange(self.nodes) / self.nodes
        return self.center + self.radius * np.exp(1j * theta)


def default_contour(center: complex, others) -> ContourSpec:
    """Radius min(0.02, sep/3) where sep is the distance to the nearest
    other pole location; SeparationError if that leaves no room."""
    sep = min((abs(center - o) for o in others if o != center),
              default=math.inf)
    radius = min(CONTOUR_RADIUS_CAP, sep / 3.0)
    if radius < 10 * EPS_POLE:
        raise SeparationError(
            f"target at {center} is too close to a neighbour (sep = {sep})"
        )
    return ContourSpec(center, radius)


def residue_contour(f, spec: ContourSpec) -> complex:
    """(1/2 pi i) contour integral of f by the trapezoid rule on the
    circle: (r/N) sum f(z_k) e^(i theta_k)."""
    z = spec.points()
    theta = 2.0 * np.pi * np.arange(spec.nodes) / spec.nodes
    vals = np.asarray(f(z), dtype=complex)
    return complex(spec.radius / spec.nodes * np.sum(vals * np.exp(1j * theta)))


def _tail_integral(exponent: float, logpow: int, lower: float) -> float:
    """int_lower^inf x^exponent (log x)^logpow dx, requiring exponent < -1."""
    if exponent >= -1.0:
        return math.inf
    pls = PowerLogSum.from_terms([(exponent, logpow, 1.0)])
    return abs(pls.integral_to_inf(lower))


class Evaluator:
    """All analytic evaluations against one built character table.

    Precomputes flat prime arrays from the assignment so that every
    evaluation is a handful of vectorized exponentials.
    """

    def __init__(self, assignment: ChiAssignment, ledger: RemainderLedger,
                 q: QClosedForm, generator: GeneratorFunction | None,
                 plan: ResiduePlan):
        if not assignment._extended:
            extend_leftovers(assignment)
        self.assignment = assignment
        self.ledger = ledger
        self.q = q
        self.generator = generator
        self.plan = plan
        self.mode = assignment.mode
        self.xs = np.asarray(assignment.xs, dtype=float)
        self.X = float(self.xs[-1])

        primes = assignment.primes.astype(float)
        chosen = assignment.chosen_mask
        self.logp_chosen = np.log(primes[chosen])
        c_per_block = np.array([b.c for b in assignment.blocks], dtype=float)
        self.phase_chosen = c_per_block[assignment.block_of_prime[chosen]]
        # checkpoint closing the block each chosen prime belongs to
        self.xend_chosen = self.xs[assignment.block_of_prime[chosen] + 1]

        left = primes[~chosen]
        self.logp_left = np.log(left)
        self.sign_left = np.where(np.arange(len(left)) % 2 == 0, 1.0, -1.0)
        self._all_logp = np.log(primes)
        self._all_psi_phase = assignment.zeta_phases_for_primes()

        # amplitude model |r(x)| <= A x^(theta + step) (log x)^Lpow,
        # fitted as the max observed ratio over block bounds B_j and
        # doubled (oscillation inside a block can exceed |Q_j|)
        if plan.entries:
            self.theta = max(e.location.real for e in plan.entries) - 1.0
        else:
            self.theta = -1.0
        if self.mode.kind == "rh":
            self.step, self.logpow = 0.5, 2
        else:
            self.step, self.logpow = 21.0 / 40.0, 1
        B = np.asarray(ledger.B, dtype=float)
        xj = self.xs[:-1]
        model = xj ** (self.theta + self.step) * np.log(xj) ** self.logpow
        pos = B > 0
        self.A_fit = 2.0 * float(np.max(B[pos] / model[pos])) if pos.any() else 0.0

        self._theta_table = None
        self._theta_limit = 0

    # -- truncated Dirichlet building blocks --------------------------------

    def prime_sum_chosen(self, s: complex) -> complex:
        """sum over chosen p <= X of chi_c(p) log p p^(-s)."""
        w = np.exp(1j * self.phase_chosen - s * self.logp_chosen)
        return complex(np.sum(self.logp_chosen * w))

    def leftover_L(self, s: complex) -> complex:
        """L_X(s) = sum over leftover p <= X of (+-1) log p p^(-s)."""
        w = self.sign_left * np.exp(-s * self.logp_left)
        return complex(np.sum(self.logp_left * w))

    def tail_L(self, s: complex) -> float:
        """|L(s) - L_X(s)| via Abel summation: leftover partial log-sums
        move by at most 2 log x past X."""
        sigma = s.real
        if sigma <= 0:
            return math.inf
        return 2.0 * abs(s) * _tail_integral(-sigma - 1.0, 1, self.X) \
            + 2.0 * math.log(self.X) * self.X ** (-sigma)

    # -- the continuation F --------------------------------------------------

    def continuation_F(self, s: complex) -> complex:
        """Blockwise route for F_X(s) = s int_1^X r(x) x^(-s-1) dx.

        Per block: r_j (x_j^-s - x_{j+1}^-s) - Q_j x_{j+1}^-s
        + int_block q x^-s - sum_{chosen in block} chi_c log p
        (p^-s - x_{j+1}^-s); everything is exact closed form.
        """
        xs_pow = np.exp(-s * np.log(self.xs))
        r = self.ledger.r
        Qs = np.array([b.Q for b in self.assignment.blocks], dtype=complex)
        out = np.sum(r[:-1] * (xs_pow[:-1] - xs_pow[1:]))
        out -= np.sum(Qs * xs_pow[1:])
        out += self._mellin_blocks(s)
        w = np.exp(1j * self.phase_chosen)
        pterm = np.exp(-s * self.logp_chosen) - np.exp(-s * np.log(self.xend_chosen))
        out -= np.sum(w * self.logp_chosen * pterm)
        # [1, x_0) prefix (identically zero for shifted kernels)
        out += mellin_transform_q(self.q, s, upper=float(self.xs[0]))
        out -= integrate_q(self.q, 1.0, float(self.xs[0])) * xs_pow[0]
        return complex(out)

    def _mellin_blocks(self, s: complex) -> complex:
        """sum_j int_{x_j}^{x_{j+1}} q(x) x^-s dx via the exact
        antiderivative evaluated at every checkpoint."""
        if self.q.is_zero:
            return 0.0 + 0.0j
        inner = self.q.inner.shifted(-s)
        anti = inner.antiderivative()
        if self.q.shifted:
            y = np.maximum(self.xs / math.e, 1.0)
            vals = anti(y) * np.exp(-s)
        else:
            vals = anti(self.xs)
        return complex(np.sum(vals[1:] - vals[:-1]))

    def F_global(self, s: complex) -> complex:
        """Independent single-shot route for the same quantity:
        int_1^X q x^-s - sum_chosen chi_c log p p^-s - r(X) X^-s."""
        out = mellin_transform_q(self.q, s, upper=self.X)
        out -= self.prime_sum_chosen(s)
        out -= self.ledger.r[-1] * cmath.exp(-s * math.log(self.X))
        return complex(out)

    def tail_F(self, s: complex) -> float:
        """|F(s) - F_X(s)| <= |s| A int_X^inf x^(theta+step-sigma-1)
        (log x)^Lpow dx, from the fitted remainder amplitude."""
        sigma = s.real
        exponent = self.theta + self.step - sigma - 1.0
        if self.A_fit == 0.0:
            return 0.0
        return abs(s) * self.A_fit * _tail_integral(exponent, self.logpow, self.X)

    # -- the continued logarithmic derivative --------------------------------

    def g1(self, s):
        if self.generator is None or not self.generator.blocks:
            return np.zeros(np.shape(s), dtype=complex) if np.shape(s) else 0j
        return eval_generator(self.generator, s)

    def g_tilde(self, s: complex) -> tuple[complex, float]:
        """g~(s) = g1(s) - F_X(s) - L_X(s) and its truncation bound.

        Meromorphic continuation of the chosen-prime Dirichlet series
        minus leftovers; principal parts are exactly those of g1.
        """
        val = self.g1(s) - self.continuation_F(s) - self.leftover_L(s)
        return complex(val), self.tail_F(s) + self.tail_L(s)

    def prime_power_tail(self, s: complex) -> tuple[complex, float]:
        """ppt(s) = sum_{p <= X, k >= 2, p^k <= X^2} psi(p)^k log p p^(-ks)
        plus a bound on everything omitted; needs Re s > 1/2 + margin."""
        sigma = s.real
        if sigma <= 0.5 + PPT_MARGIN:
            raise DomainError(
                f"prime-power tail needs Re s > {0.5 + PPT_MARGIN}"
            )
        limit = self.X * self.X
        total = 0.0 + 0.0j
        k = 2
        while 2.0 ** k <= limit:
            cut = limit ** (1.0 / k)
            m = self.assignment.primes <= cut
            lp = self._all_logp[m]
            ph = self._all_psi_phase[m]
            total += np.sum(lp * np.exp(1j * k * ph - s * k * lp))
            k += 1
        # omitted: (a) primes beyond the table at k >= 2, bounded via
        # theta(x) <= 1.02 x and partial summation; (b) powers past
        # X^2 of table primes, each below X^(-2 sigma) with geometric
        # continuation, against total prime log-mass theta(X).
        beyond = 1.02 * (2.0 * sigma / (2.0 * sigma - 1.0)) \
            * self.X ** (1.0 - 2.0 * sigma)
        high_powers = 1.02 * self.X ** (1.0 - 2.0 * sigma) \
            / (1.0 - 2.0 ** (-sigma))
        return complex(total), float(beyond + high_powers)

    def log_derivative_g(self, s: complex) -> tuple[complex, float]:
        """zeta'_psi / zeta_psi (s) = g~(s) - ppt(s), with total bound."""
        gt, b1 = self.g_tilde(s)
        pp, b2 = self.prime_power_tail(s)
        return gt - pp, b1 + b2

    # -- residues and winding -------------------------------------------------

    def residue_at(self, center: complex,
                   spec: ContourSpec | None = None) -> tuple[complex, float]:
        """Contour residue of g~ at center and an error bound
        (truncation tails averaged over the circle, times the radius
        is NOT needed: the contour average of an analytic error E is
        at most max |E| on the circle)."""
        if spec is None:
            spec = default_contour(center,
                                   [e.location for e in self.plan.entries])
        z = spec.points()
        gv = self.g1(z) \
            - np.array([self.continuation_F(s) + self.leftover_L(s)
                        for s in z])
        theta = 2.0 * np.pi * np.arange(spec.nodes) / spec.nodes
        res = complex(spec.radius / spec.nodes
                      * np.sum(gv * np.exp(1j * theta)))
        tb = max(self.tail_F(zz) + self.tail_L(zz) for zz in z)
        return res, spec.radius * tb

    def winding_number(self, spec: ContourSpec) -> tuple[int, float]:
        """Zeros-minus-poles count of zeta_psi inside the circle: the
        rounded contour residue of g~, rejecting defects above 0.25."""
        res, _ = self.residue_at(spec.center, spec)
        n = int(round(res.real))
        defect = abs(res - n)
        if defect > WINDING_DEFECT_MAX:
            raise AmbiguousWinding(
                f"contour average {res} is not near an integer"
            )
        return n, defect

    # -- zeta routes ------------------------------------------------------------

    def _ensure_theta_table(self, n: int):
        if self._theta_table is not None and self._theta_limit >= n:
            return
        theta = np.zeros(n + 1, dtype=float)
        primes = self.assignment.primes
        phases = self._all_psi_phase
        for p, tp in zip(primes[primes <= n], phases[primes <= n]):
            pk = int(p)
            while pk <= n:
                theta[pk::pk] += tp
                pk *= int(p)
        self._theta_table = theta
        self._theta_limit = n

    def zeta_dirichlet(self, s: complex, n_terms: int = 100_000
                       ) -> tuple[complex, float]:
        """sum_{n<=N} psi(n) n^-s with tail bound N^(1-sigma)/(sigma-1);
        the character values come from a sieved additive phase table."""
        sigma = s.real
        if sigma <= 1.0:
            raise DomainError("Dirichlet route needs Re s > 1")
        n_terms = min(n_terms, int(self.X))
        self._ensure_theta_table(n_terms)
        n = np.arange(1, n_terms + 1, dtype=float)
        vals = np.exp(1j * self._theta_table[1: n_terms + 1] - s * np.log(n))
        tail = n_terms ** (1.0 - sigma) / (sigma - 1.0)
        return complex(np.sum(vals)), float(tail)

    def log_zeta_euler(self, s: complex,
                       cutoff: float | None = None) -> tuple[complex, float]:
        """-sum_{p<=cutoff} log(1 - psi(p) p^-s), principal branch per
        factor, with tail bound 2 cutoff^(1-sigma)/(sigma-1); cutoff
        defaults to the full table range (needs Re s > 1)."""
        sigma = s.real
        if sigma <= 1.0:
            raise DomainError("Euler route needs Re s > 1")
        if cutoff is None:
            cutoff = self.X
        m = self.assignment.primes <= cutoff
        z = np.exp(1j * self._all_psi_phase[m] - s * self._all_logp[m])
        val = -np.sum(np.log1p(-z))
        tail = 2.0 * cutoff ** (1.0 - sigma) / (sigma - 1.0)
        return complex(val), float(tail)

    def zeta_euler(self, s: complex,
                   cutoff: float | None = None) -> tuple[complex, float]:
        lz, tail = self.log_zeta_euler(s, cutoff)
        v = cmath.exp(lz)
        return v, abs(v) * (math.expm1(tail) if tail < 50 else math.inf)

    # -- continuation of zeta itself -------------------------------------------

    def zeta_continued(self, s: complex, base: complex | None = None
                       ) -> complex:
        """zeta_psi(s) off the Re s > 1 half-plane.

        Integrates the continued logarithmic derivative from a base
        point where the Euler product converges, along a straight path
        that is re-routed around any target within 0.05; PathBlocked if
        the endpoint itself has no clearance.
        """
        if s.real <= 0.5 + PPT_MARGIN:
            raise DomainError("continuation limited to Re s > 1/2 + margin")
        targets = [e.location for e in self.plan.entries]
        if any(abs(s - t) < PATH_CLEARANCE for t in targets):
            raise PathBlocked(f"endpoint {s} is within clearance of a target")
        if base is None:
            base = complex(2.0, s.imag)
        lz0, _ = self.log_zeta_euler(base)
        path = _route(base, s, targets, PATH_CLEARANCE)
        integral = 0.0 + 0.0j
        for a, b in zip(path[:-1], path[1:]):
            integral += self._segment_quad(a, b, targets)
        return cmath.exp(lz0 + integral)

    def _segment_quad(self, a: complex, b: complex, poles,
                      rel_tol: float = 1e-9, depth: int = 0) -> complex:
        """Adaptive Gauss-Legendre on the segment [a, b] of the
        integrand zeta'/zeta, halving until two orders agree."""
        def quad(n):
            x, w = np.polynomial.legendre.leggauss(n)
            z = a + (b - a) * (x + 1.0) / 2.0
            vals = np.array([self.log_derivative_g(zz)[0] for zz in z])
            return (b - a) / 2.0 * np.sum(w * vals)

        lo, hi = quad(8), quad(16)
        err = abs(hi - lo)
        if err <= rel_tol * max(1.0, abs(hi)) or depth >= 12:
            return hi
        mid = (a + b) / 2.0
        return (self._segment_quad(a, mid, poles, rel_tol, depth + 1)
                + self._segment_quad(mid, b, poles, rel_tol, depth + 1))


def _route(a: complex, b: complex, poles, clearance: float,
           depth: int = 0) -> list[complex]:
    """Polyline from a to b keeping every pole at least `clearance`
    away, inserting perpendicular detour waypoints as needed."""
    if depth > 16:
        raise PathBlocked("could not route the continuation path")
    blocker, dist, t = None, clearance, 0.0
    for p in poles:
        tt = _segment_param(a, b, p)
        d = abs(a + tt * (b - a) - p)
        if d < dist:
            blocker, dist, t = p, d, tt
    if blocker is None:
        return [a, b]
    direction = (b - a) / abs(b - a)
    normal = 1j * direction
    foot = a + t * (b - a)
    side = normal if ((foot - blocker) / normal).real >= 0 else -normal
    waypoint = blocker + side * (3.0 * clearance)
    left = _route(a, waypoint, poles, clearance, depth + 1)
    right = _route(waypoint, b, poles, clearance, depth + 1)
    return left[:-1] + right


def _segment_param(a: complex, b: complex, p: complex) -> float:
    """Parameter in [0, 1] of the closest point to p on segment [a, b]."""
    d = b - a
    denom = abs(d) ** 2
    if denom == 0:
        return 0.0
    t = ((p - a) * d.conjugate()).real / denom
    return min(1.0, max(0.0, t))


def make_evaluator(assignment: ChiAssignment, ledger: RemainderLedger,
                   plan: ResiduePlan) -> Evaluator:
    """Build the standard evaluator: generator and kernel derived from
    the plan stored with the table."""
    from .generator import build_generator
    from .mellin import mellin_inverse_closed, partial_fractions

    if plan.entries:
        G = build_generator(plan)
        q = mellin_inverse_closed(partial_fractions(G), shift=True)
    else:
        G = build_generator(plan)
        q = QClosedForm(PowerLogSum.from_terms([]), True)
    return Evaluator(assignment, ledger, q, G, plan)
