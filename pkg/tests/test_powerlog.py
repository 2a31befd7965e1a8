import numpy as np
import pytest
from scipy.integrate import quad

from helsonzeta.errors import DegenerateExponent
from helsonzeta.powerlog import PowerLogSum


def num_integral(f, a, b):
    re = quad(lambda x: f(x).real, a, b, limit=200)[0]
    im = quad(lambda x: f(x).imag, a, b, limit=200)[0]
    return re + 1j * im


def test_evaluation_matches_direct_formula():
    pls = PowerLogSum.from_terms([(-0.3 + 2j, 0, 1.5), (-0.3 + 2j, 2, -0.5j),
                                  (-1.2, 1, 2.0)])
    x = np.array([1.0, 2.5, 10.0, 123.0])
    direct = (1.5 * x ** (-0.3 + 2j)
              - 0.5j * x ** (-0.3 + 2j) * np.log(x) ** 2
              + 2.0 * x ** -1.2 * np.log(x))
    assert np.allclose(pls(x), direct, rtol=1e-13)


def test_addition_and_scaling():
    a = PowerLogSum.from_terms([(-0.5, 0, 1.0)])
    b = PowerLogSum.from_terms([(-0.5, 0, 2.0), (-2.0, 1, 1.0)])
    s = (a + b).scaled(3.0)
    assert s(2.0) == pytest.approx(3.0 * (3.0 * 2.0 ** -0.5
                                          + 2.0 ** -2.0 * np.log(2.0)))


def test_shift_multiplies_by_power():
    pls = PowerLogSum.from_terms([(-0.5, 1, 2.0)])
    s = 1.3 - 0.7j
    shifted = pls.shifted(-s)
    x = 7.7
    assert shifted(x) == pytest.approx(pls(x) * x ** (-s))


def test_antiderivative_against_quadrature():
    pls = PowerLogSum.from_terms([(-0.4 + 1j, 2, 1.0), (-3.0, 0, 2.5)])
    val = pls.integral(2.0, 9.0)
    ref = num_integral(lambda x: complex(pls(x)), 2.0, 9.0)
    assert val == pytest.approx(ref, rel=1e-10)


def test_log_branch_at_exponent_minus_one():
    # integrating x^-1 (log x)^k must produce (log x)^(k+1)/(k+1)
    pls = PowerLogSum.from_terms([(-1.0, 1, 1.0)])
    val = pls.integral(1.0, np.e ** 2)
    assert val == pytest.approx((2.0 ** 2) / 2.0, rel=1e-12)


def test_integral_to_infinity():
    pls = PowerLogSum.from_terms([(-2.5, 2, 1.0)])
    ref = quad(lambda x: x ** -2.5 * np.log(x) ** 2, 3.0, np.inf)[0]
    assert pls.integral_to_inf(3.0) == pytest.approx(ref, rel=1e-10)


def test_integral_to_infinity_requires_decay():
    pls = PowerLogSum.from_terms([(-1.0, 0, 1.0)])
    with pytest.raises(DegenerateExponent):
        pls.integral_to_inf(2.0)


def test_zero_sum():
    z = PowerLogSum.from_terms([])
    assert z.is_zero
    assert z(5.0) == 0
    assert z.integral(1.0, 10.0) == 0
