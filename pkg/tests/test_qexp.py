from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, strategies as st

from modec.exactmath import CyclotomicNumber
from modec.qexp import (
    FracQSeries,
    PrecisionError,
    antiderivative_2pii,
    delta_coeffs,
    eisenstein_coeffs,
    eta_power_coeffs,
    j_coeffs,
)

coeff_lists = st.lists(st.fractions(min_value=-20, max_value=20, max_denominator=9), min_size=1, max_size=25)


def series(coeffs, width=1, val=0, level=12):
    return FracQSeries(width, val, coeffs, val + len(coeffs), level)


def naive_product(a, b, n):
    return [sum(a[i] * b[k - i] for i in range(k + 1) if i < len(a) and k - i < len(b)) for k in range(n)]


@given(coeff_lists, coeff_lists)
def test_product_matches_convolution(a, b):
    n = min(len(a), len(b))
    p = series(a) * series(b)
    want = naive_product(a, b, n)
    for k in range(n):
        assert p[k] == want[k]


@given(coeff_lists)
def test_inverse(a):
    if a[0] == 0:
        return
    f = series(a)
    one = f * f.inverse()
    assert one[0] == 1 and all(one[k] == 0 for k in range(1, len(a)))


@given(coeff_lists, st.integers(1, 12))
def test_antiderivative_derivative_round_trip(a, w):
    f = FracQSeries(w, 1, a, 1 + len(a), 12)
    assert antiderivative_2pii(f).derivative_q() == f


def test_antiderivative_rejects_constant_term():
    with pytest.raises(ValueError):
        antiderivative_2pii(series([1, 2, 3]))


def test_cyclotomic_coefficients_survive_arithmetic():
    z = CyclotomicNumber.zeta(12)
    f = FracQSeries(12, 1, [z, 1, z * z], 4, 12)
    g = (f * f).root_of_unity_twist(0)
    assert g[2] == z * z


def test_delta_is_eta_24th_power():
    # eta^24 = q prod (1 - q^n)^24; compare with the tau values 1, -24, 252, -1472, 4830
    assert eta_power_coeffs(5, 24) == [1, -24, 252, -1472, 4830]
    assert delta_coeffs(5) == [1, -24, 252, -1472, 4830]


def test_j_invariant_coefficients():
    j = j_coeffs(4)
    assert j[:4] == [1, 744, 196884, 21493760]


def test_e4_squared_is_e8():
    # only one normalized weight-8 form: E4^2 = E8 = 1 + 480 sum sigma_7(n) q^n
    e4 = series(eisenstein_coeffs(4, 10), level=1)
    e8 = [1] + [480 * sum(d**7 for d in range(1, n + 1) if n % d == 0) for n in range(1, 10)]
    assert [(e4 * e4)[k] for k in range(10)] == e8


def test_rescale_width():
    f = series([1, 2, 3], width=2)
    g = f.rescale_width(6)
    assert g.width == 6 and g[3] == 2 and g[1] == 0


def test_eval_at_matches_closed_form():
    # sum q^n, n >= 1, is q/(1 - q)
    f = series([0] + [1] * 199, level=1)
    z = mpmath.mpc(0.1, 0.5)
    val, tb = f.eval_at(z, 100)
    with mpmath.workdps(40):
        q = mpmath.exp(2j * mpmath.pi * z)
        assert abs(val - q / (1 - q)) < 1e-25
    assert tb < 1e-25


def test_eval_at_flags_insufficient_precision():
    f = series([0] + [1] * 10, level=1)
    with pytest.raises(PrecisionError):
        f.eval_at(mpmath.mpc(0, 0.05), 100)
