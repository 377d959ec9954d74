from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from modec.elliptic import (
    O,
    EllipticCurveQ,
    PeriodLattice,
    add_points,
    ap,
    curve_periods,
    division_poly,
    mordell_weil_rank0,
    mul_point,
    point_from_z,
    torsion_identify_cyclotomic,
    wp_numeric,
    wp_series,
)

E11 = EllipticCurveQ(0, -1, 1, -10, -20)
E432 = EllipticCurveQ(0, 0, 0, -27, -918)


def wp_row_sums(z, w1, w2, rows=40):
    """p(z) summed row by row over the lattice; each row in closed form.

    sum_m (z - m w1 - n w2)^-2 = (pi/w1)^2 csc^2(pi (z - n w2)/w1), so the
    absolutely convergent lattice sum becomes a sum over n that decays
    like exp(-2 pi |n| Im(w2/w1)).
    """
    k = mpmath.pi / w1
    acc = mpmath.csc(k * z) ** 2 - mpmath.mpf(1) / 3
    for n in range(1, rows + 1):
        for s in (n, -n):
            acc += mpmath.csc(k * (z - s * w2)) ** 2 - mpmath.csc(k * s * w2) ** 2
    return k * k * acc


@pytest.mark.parametrize("E", [E11, E432, EllipticCurveQ(0, 0, 0, -1, 0)])
def test_wp_against_lattice_sum_128_bits(E):
    L = curve_periods(E, 128)
    with mpmath.workprec(128):
        for z in (mpmath.mpc(0.1, 0.07), L.omega1 / 3 + L.omega2 / 7, mpmath.mpc(0.31, 0.2)):
            want = wp_row_sums(z, L.omega1, L.omega2)
            got, _ = wp_numeric(z, L)
            assert abs(got - want) < mpmath.mpf(10) ** -20 * max(1, abs(want))


def test_wp_series_against_lattice_sum():
    L = curve_periods(E11, 128)
    g2, g3 = E11.g2, E11.g3
    wp, _ = wp_series(g2, g3, 60)
    with mpmath.workprec(128):
        z = mpmath.mpc(0.05, 0.03)
        got = sum(mpmath.mpf(c.numerator) / c.denominator * z ** (i + wp.start) for i, c in enumerate(wp.coeffs))
        assert abs(got - wp_row_sums(z, L.omega1, L.omega2)) < mpmath.mpf(10) ** -20


def test_lattice_invariants_match_curve():
    for E in (E11, E432):
        L = curve_periods(E, 128)
        with mpmath.workprec(128):
            g2, g3 = L.invariants()
            assert abs(g2 - E.g2) < 1e-25 * abs(E.g2)
            assert abs(g3 - E.g3) < 1e-25 * abs(E.g3)


def real_period_by_quadrature(E):
    """2 int_{e}^{oo} dx / sqrt(4x^3 + b2 x^2 + 2 b4 x + b6) for one real root e."""
    b2, b4, b6 = (mpmath.mpf(Fraction(x).numerator) / Fraction(x).denominator for x in (E.b2, E.b4, E.b6))
    f = lambda x: 4 * x**3 + b2 * x**2 + 2 * b4 * x + b6
    (e,) = [mpmath.re(r) for r in mpmath.polyroots([4, b2, 2 * b4, b6]) if abs(mpmath.im(r)) < 1e-20]
    # x = e + t^2 removes the endpoint singularity
    return 2 * mpmath.quad(lambda t: 2 * t / mpmath.sqrt(f(e + t * t)), [0, 1, mpmath.inf])


def test_agm_against_quadrature():
    with mpmath.workdps(40):
        for E in (E11, E432):
            L = curve_periods(E, 128)
            assert L.shape == "triangular"
            assert abs(L.omega1 - real_period_by_quadrature(E)) < 1e-20
            assert abs(mpmath.re(L.omega2) - L.omega1 / 2) < 1e-25


def test_known_real_period_11a2():
    # frozen from the quadrature oracle above
    assert abs(curve_periods(E11).omega1 - mpmath.mpf("1.26920930427955")) < 1e-13


@pytest.mark.parametrize("p", [2, 3, 5, 7, 13, 17, 19])
def test_ap_against_brute_force(p):
    a1, a2, a3, a4, a6 = (0, -1, 1, -10, -20)
    n = sum(1 for x in range(p) for y in range(p) if (y * y + a1 * x * y + a3 * y - x**3 - a2 * x * x - a4 * x - a6) % p == 0)
    assert ap(E11, p) == p - n


def test_torsion_11a2_is_cyclic_of_order_5():
    pts = mordell_weil_rank0(E11)
    assert len(pts) == 5
    P = next(p for p in pts if p is not O)
    assert mul_point(E11, 5, P) is O
    assert all(add_points(E11, P, Q) in pts for Q in pts)


def test_432f1_has_trivial_mordell_weil():
    assert mordell_weil_rank0(E432) == [O]
    with pytest.raises(ValueError):
        mordell_weil_rank0(E432, rank=1)


def test_division_poly_roots_are_torsion():
    psi5 = division_poly(E11, 5)
    assert psi5(16) == 0 and psi5(5) == 0


def test_torsion_identification():
    L = curve_periods(E11, 128)
    P, m = torsion_identify_cyclotomic(E11, L.omega1 / 5, L, 11)
    assert m == 5
    assert (P[0].to_rational(), P[1].to_rational()) in {(16, -61), (16, 60), (5, 5), (5, -6)}


@given(st.floats(0.05, 0.95), st.floats(0.05, 0.95))
@settings(max_examples=30)
def test_coordinates_round_trip(x, y):
    L = curve_periods(E432, 100)
    with mpmath.workprec(100):
        z = mpmath.mpf(x) * L.omega1 + mpmath.mpf(y) * L.omega2
        cx, cy = L.coordinates(z)
        assert abs(cx - x) < 1e-20 and abs(cy - y) < 1e-20


def test_point_from_z_lies_on_curve():
    L = curve_periods(E11, 128)
    with mpmath.workprec(128):
        X, Y = point_from_z(E11, mpmath.mpc(0.3, 0.2), L)
        assert abs(Y * Y + Y - (X**3 - X * X - 10 * X - 20)) < 1e-25
