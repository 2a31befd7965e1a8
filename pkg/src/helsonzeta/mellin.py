"""Kernels q with integral_1^inf q(x) x^-s dx equal to the generator.

Two routes are provided.  The closed-form route factors the generator
as exp(-z) * R(z) with R rational, decomposes R into partial fractions
algebraically, applies the inverse-Mellin dictionary

    (s - a)^-m  <->  x^(a-1) (log x)^(m-1) / (m-1)!,

and absorbs the exp(-z) envelope by the substitution q(x) = u(x/e)/e
supported on x >= e.  The numeric route inverts the causal Fourier
transform of h(t) = g(1 - it) by FFT quadrature; analyticity of g in
the right half-plane forces the transform to vanish for negative
arguments, which is checked rather than assumed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import (
    BudgetExceeded,
    ExponentOutOfRange,
    SeparationError,
)
from .generator import GeneratorFunction, eval_block, eval_generator
from .powerlog import PowerLogSum

E = math.e


# ---------------------------------------------------------------------------
# partial fractions of the rational factor
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PoleGroup:
    """One pole a of R with its coefficients c_1..c_order so that the
    group contributes sum_m c_m (z - a)^-m."""

    pole: complex
    order: int
    coeffs: tuple[complex, ...]


@dataclass(frozen=True)
class PartialFractionForm:
    """Exact decomposition of R(z) = z^-2 sum_i w_i g_i(z)."""

    groups: tuple[PoleGroup, ...]

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.zeros(np.shape(z), dtype=complex)
        for g in self.groups:
            d = z - g.pole
            term = np.zeros(np.shape(z), dtype=complex)
            # Horner in 1/d: c_1/d + ... + c_order/d^order
            for c in reversed(g.coeffs):
                term = (term + c) / d
            out = out + term
        if out.shape == ():
            return complex(out)
        return out


def eval_rational_factor(G: GeneratorFunction, z):
    """Direct evaluation of R(z) = z^-2 sum_i w_i g_i(z) (reconstruction
    oracle for the decomposition)."""
    z = np.asarray(z, dtype=complex)
    acc = np.zeros(np.shape(z), dtype=complex)
    for block in G.blocks:
        acc = acc + block.weight * eval_block(block, z)
    out = acc / (z * z)
    if out.shape == ():
        return complex(out)
    return out


MIN_POLE_SEPARATION = 1e-8


def partial_fractions(G: GeneratorFunction) -> PartialFractionForm:
    """Decompose the rational factor of the generator exactly.

    Pole groups are {0 (order 2)} u {z_i (order 1)} u {z_i - 1 (order
    2 n_i)}.  Each elementary piece has closed-form coefficients:

      1/((z-p) (z-p+1)^(2n)) = 1/(z-p) - sum_{m=1}^{2n} (z-p+1)^-m,

    and multiplying by z^-2 splits off Taylor data at the pole and a
    double pole at the origin.  No quadrature is involved.
    """
    poles: list[complex] = [0.0 + 0.0j]
    for b in G.blocks:
        poles.append(b.z0)
        poles.append(b.z0 - 1.0)
    for i, p in enumerate(poles):
        for q in poles[i + 1:]:
            if abs(p - q) < MIN_POLE_SEPARATION:
                raise SeparationError(
                    f"pole groups {p} and {q} are too close to separate"
                )

    c0 = np.zeros(2, dtype=complex)  # coefficients of z^-1, z^-2
    groups: list[PoleGroup] = []
    for b in G.blocks:
        p, w, order = b.z0, b.weight, 2 * b.n
        # simple pole at p: w * z^-2 / (z-p) = w/p^2 * 1/(z-p) + Taylor at 0
        groups.append(PoleGroup(p, 1, (w / (p * p),)))
        c0[0] += w * (-1.0 / (p * p))
        c0[1] += w * (-1.0 / p)
        # high-order pole at a = p - 1 enters with weight -w
        a = p - 1.0
        coeffs = np.zeros(order, dtype=complex)
        # Taylor of z^-2 at a: sum_j (j+1)(-1)^j a^-(j+2) (z-a)^j
        for k in range(1, order + 1):
            s = 0.0 + 0.0j
            for j in range(order - k + 1):
                s += (j + 1) * (-1.0) ** j * a ** (-(j + 2))
            coeffs[k - 1] = -w * s
        groups.append(PoleGroup(a, order, tuple(coeffs)))
        # Taylor of (z-a)^-m at 0 is (-a)^-m [1 + m z / a + ...]; with
        # the z^-2 factor this puts base at z^-2 and m base / a at z^-1
        for m in range(1, order + 1):
            base = (-a) ** (-m)
            c0[0] += -w * (m * base / a)
            c0[1] += -w * base

    if G.blocks:
        groups.insert(0, PoleGroup(0.0 + 0.0j, 2, (complex(c0[0]), complex(c0[1]))))
    groups.sort(key=lambda g: (g.pole.real, g.pole.imag))
    return PartialFractionForm(tuple(groups))


def laurent_coefficients(f, center: complex, orders: int, radius: float,
                         nodes: int = 2048) -> np.ndarray:
    """Principal-part coefficients of f at center by circle quadrature.

    Returns c_1..c_orders with c_m = (1/2 pi i) closed-integral
    f(z) (z - center)^(m-1) dz.  Trapezoid on a circle is spectrally
    accurate for the analytic remainder; the caller picks a radius
    clearing other singularities.  Used as an independent oracle for
    the algebraic decomposition.
    """
    theta = 2.0 * np.pi * np.arange(nodes) / nodes
    ring = radius * np.exp(1j * theta)
    vals = f(center + ring)
    out = np.empty(orders, dtype=complex)
    for m in range(1, orders + 1):
        out[m - 1] = np.mean(vals * ring**m)
    return out


# ---------------------------------------------------------------------------
# closed-form kernel
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QClosedForm:
    """Kernel q in closed form.

    inner is u(y) = sum c y^(a-1) (log y)^k; with shifted=True the
    kernel is q(x) = u(x/e)/e on x >= e and 0 on [1, e), which absorbs
    the exp(-s) envelope of the generator.  With shifted=False the
    kernel is u itself on x >= 1 (the unshifted rational oracle class).
    """

    inner: PowerLogSum
    shifted: bool

    @property
    def is_zero(self) -> bool:
        return self.inner.is_zero

    def terms(self):
        """Iterate (exponent a, logdeg k, coeff) of the inner kernel,
        with a the Mellin exponent (inner power is a - 1)."""
        for mu, k, c in self.inner.terms():
            yield mu + 1.0, k, c

    def support_start(self) -> float:
        return E if self.shifted else 1.0


def mellin_inverse_closed(pf: PartialFractionForm, shift: bool) -> QClosedForm:
    """Apply the inverse-Mellin dictionary to a partial-fraction form.

    (s - a)^-m maps to x^(a-1) (log x)^(m-1) / (m-1)!.  Raises
    ExponentOutOfRange if some pole has Re a >= 1 (the kernel would not
    decay).  shift=True records that the exp(-s) envelope applies.
    """
    terms = []
    for g in pf.groups:
        if g.pole.real >= 1.0:
            raise ExponentOutOfRange(
                f"pole {g.pole} has Re >= 1; kernel would not vanish"
            )
        for m, c in enumerate(g.coeffs, start=1):
            if c != 0:
                terms.append((g.pole - 1.0, m - 1, c / math.factorial(m - 1)))
    return QClosedForm(PowerLogSum.from_terms(terms), shift)


def eval_q(q: QClosedForm, x):
    """Evaluate the kernel at x >= 1 (scalar or array); complex-valued."""
    scalar = np.shape(x) == ()
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    if np.min(xa) < 1.0:
        raise ValueError("kernel defined on x >= 1")
    out = np.zeros(xa.shape, dtype=complex)
    if not q.is_zero:
        if q.shifted:
            mask = xa >= E
            if np.any(mask):
                out[mask] = q.inner(xa[mask] / E) / E
        else:
            out = q.inner(xa)
    return complex(out[0]) if scalar else out


def integrate_q(q: QClosedForm, a: float, b: float) -> complex:
    """Exact integral of the kernel over [a, b], 1 <= a <= b."""
    if not (1.0 <= a <= b):
        raise ValueError("require 1 <= a <= b")
    if q.is_zero or a == b:
        return 0.0 + 0.0j
    if not q.shifted:
        return complex(q.inner.integral(a, b))
    lo = max(a, E)
    if b <= lo:
        return 0.0 + 0.0j
    # substitute y = x/e: (1/e) int u(x/e) dx = int u(y) dy
    return complex(q.inner.integral(lo / E, b / E))


def integral_q_checkpoints(q: QClosedForm, xs: np.ndarray) -> np.ndarray:
    """Running integral I(x) = int_1^x q at many points, vectorized."""
    xs = np.asarray(xs, dtype=float)
    if q.is_zero:
        return np.zeros(xs.shape, dtype=complex)
    if q.shifted:
        y = np.maximum(xs / E, 1.0)
        F = q.inner.antiderivative()
        return F(y) - F(1.0)
    F = q.inner.antiderivative()
    return F(xs) - F(1.0)


def mellin_transform_q(q: QClosedForm, s: complex, upper: float | None = None):
    """Exact integral of q(x) x^-s over [1, upper] (or [1, inf)).

    For the infinite range every inner exponent must satisfy
    Re(a - s) < 0, i.e. Re s larger than every kernel exponent.
    """
    if q.is_zero:
        return 0.0 + 0.0j
    shifted_sum = q.inner.shifted(-s)
    if not q.shifted:
        if upper is None:
            return complex(shifted_sum.integral_to_inf(1.0))
        return complex(shifted_sum.integral(1.0, upper))
    # int_e^upper u(x/e)/e x^-s dx = e^-s int_1^(upper/e) u(y) y^-s dy
    env = np.exp(-s)
    if upper is None:
        return complex(env * shifted_sum.integral_to_inf(1.0))
    if upper <= E:
        return 0.0 + 0.0j
    return complex(env * shifted_sum.integral(1.0, upper / E))


def forward_mellin_check(q, s: complex) -> complex:
    """Forward Mellin transform of a kernel at Re s > 1.

    For closed-form kernels the integral is exact over [1, inf); for
    numeric kernels the stored grid is integrated by the composite
    Simpson rule on the log axis.
    """
    if isinstance(q, QClosedForm):
        return mellin_transform_q(q, s, upper=None)
    return q.forward_mellin(s)


# ---------------------------------------------------------------------------
# numeric kernel via causal Fourier inversion
# ---------------------------------------------------------------------------

@dataclass
class QNumeric:
    """Kernel reconstructed on a uniform grid of phi(y), q(x) = phi(log x)."""

    y: np.ndarray
    phi: np.ndarray
    step: float
    eps_q: float
    _spline_re: CubicSpline = field(repr=False, default=None)
    _spline_im: CubicSpline = field(repr=False, default=None)

    def __post_init__(self):
        if self._spline_re is None:
            self._spline_re = CubicSpline(self.y, self.phi.real)
            self._spline_im = CubicSpline(self.y, self.phi.imag)

    def eval_phi(self, y):
        y = np.asarray(y, dtype=float)
        inside = (y >= self.y[0]) & (y <= self.y[-1])
        out = np.where(
            inside,
            self._spline_re(np.clip(y, self.y[0], self.y[-1]))
            + 1j * self._spline_im(np.clip(y, self.y[0], self.y[-1])),
            0.0 + 0.0j,
        )
        return complex(out) if out.shape == () else out

    def eval_qx(self, x):
        return self.eval_phi(np.log(np.asarray(x, dtype=float)))

    def forward_mellin(self, s: complex, n_panels: int = 20000) -> complex:
        """Simpson quadrature of int q(x) x^-s dx = int phi(y) e^((1-s)y) dy
        over the stored positive-y grid."""
        y = np.linspace(0.0, self.y[-1], 2 * n_panels + 1)
        f = self.eval_phi(y) * np.exp((1.0 - s) * y)
        h = y[1] - y[0]
        w = np.ones_like(y)
        w[1:-1:2] = 4.0
        w[2:-1:2] = 2.0
        return complex(np.sum(w * f) * h / 3.0)


SAMPLE_CAP_DEFAULT = 1 << 24


def fourier_inverse_callable(h, eps_q: float, y_need: tuple[float, float] = (-12.0, 10.0),
                             sample_cap: int = SAMPLE_CAP_DEFAULT) -> QNumeric:
    """Invert phi(y) = (1/2 pi) int h(t) e^(-i t y) dt by FFT quadrature.

    h must be analytic in the upper half of the t-plane (equivalently g
    analytic right of the line used to define it) and decay like
    K/(1+t^2); K is estimated by sampling.  The truncation T is chosen
    so the discarded tail is below eps_q/4, and the grid period is
    doubled until the periodization error (visible as drift between
    successive refinements) is below eps_q/4.
    """
    t_probe = np.concatenate([[0.0], np.geomspace(1e-3, 1e5, 400)])
    t_probe = np.concatenate([-t_probe[::-1], t_probe])
    K = float(np.max(np.abs(h(t_probe)) * (1.0 + t_probe**2)))
    if K == 0.0:
        y = np.linspace(y_need[0], y_need[1], 1025)
        return QNumeric(y, np.zeros_like(y, dtype=complex), y[1] - y[0], eps_q)

    T = max(50.0, 4.0 * K / (math.pi * eps_q))
    period = 2.0 * max(64.0, y_need[1] - y_need[0] + 8.0)
    prev = None
    while True:
        dt = 2.0 * math.pi / period
        n = 1 << max(8, math.ceil(math.log2(2.0 * T / dt)))
        if n > sample_cap:
            raise BudgetExceeded(
                f"Fourier grid of {n} samples exceeds cap {sample_cap}"
            )
        T_eff = n * dt / 2.0
        t = -T_eff + dt * np.arange(n)
        hv = h(t)
        # phi(y_j) = (dt / 2 pi) e^{i T_eff y_j} FFT(hv)_j, y_j = j * 2 pi/(n dt)
        spec = np.fft.fft(hv)
        y = 2.0 * math.pi * np.arange(n) / (n * dt)
        phi = (dt / (2.0 * math.pi)) * np.exp(1j * T_eff * y) * spec
        # wrap to a symmetric window around zero
        half = n // 2
        y = np.concatenate([y[half:] - period, y[:half]])
        phi = np.concatenate([phi[half:], phi[:half]])
        sel = (y >= y_need[0] - 1.0) & (y <= y_need[1] + 1.0)
        qn = QNumeric(y[sel], phi[sel], y[1] - y[0], eps_q)
        if prev is not None:
            probe = np.linspace(y_need[0], y_need[1], 1001)
            drift = np.max(np.abs(qn.eval_phi(probe) - prev.eval_phi(probe)))
            if drift <= eps_q / 4.0:
                return qn
        prev = qn
        period *= 2.0


def fourier_inverse_numeric(G: GeneratorFunction, eps_q: float = 1e-3,
                            sample_cap: int = SAMPLE_CAP_DEFAULT) -> QNumeric:
    """Numeric kernel for a built generator via h(t) = g(1 - i t)."""
    if not G.blocks:
        return fourier_inverse_callable(lambda t: np.zeros_like(t, dtype=complex),
                                        eps_q, sample_cap=sample_cap)

    def h(t):
        return eval_generator(G, 1.0 - 1j * np.asarray(t, dtype=float))

    return fourier_inverse_callable(h, eps_q, sample_cap=sample_cap)
