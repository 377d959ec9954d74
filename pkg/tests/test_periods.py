from fractions import Fraction

import mpmath
import pytest

from modec.bundle import EllCurveRecord
from modec.elliptic import curve_periods
from modec.periods import (
    AntiderivativeTable,
    LatticeError,
    cusp_constants,
    cusp_table,
    match_optimal_curve,
    modular_degree,
    period_of,
    petersson_norm,
    recognize_lattice,
    sample_matrices,
    sample_periods,
)
from modec.qexp import PrecisionError

R11 = EllCurveRecord("11.a2", (0, -1, 1, -10, -20), 11, 0, "11.a")


@pytest.fixture(scope="module")
def x011_periods(x011):
    return sample_periods(x011.forms[0], x011, 20, 100)


def test_samples_lie_in_gamma(level36):
    from modec.periods import gamma_mod_n

    gamma = gamma_mod_n(level36)
    for g in sample_matrices(level36, 20, seed=5):
        r = g.reduce(36)
        assert r in gamma or tuple(-x % 36 for x in r) in gamma


def test_period_map_is_a_homomorphism(x011):
    table = AntiderivativeTable(x011.forms[0], 100)
    ct = cusp_table(x011)
    mats = sample_matrices(x011, 8, seed=2)
    with mpmath.workdps(table.dps):
        for g, h in zip(mats, mats[1:]):
            lhs = period_of(g * h, table, ct)
            rhs = period_of(g, table, ct) + period_of(h, table, ct)
            assert abs(lhs - rhs) < 1e-25


def test_x011_lattice_is_the_curve_lattice(x011_periods):
    lat = recognize_lattice([v for _, v in x011_periods])
    L = curve_periods(R11.curve(), 100)
    assert lat.shape == "triangular"
    with mpmath.workdps(30):
        assert abs(lat.omega1 - L.omega1) < 1e-20
        assert abs(lat.omega2 - L.omega2) < 1e-20


def test_x011_match_and_degree(x011, x011_periods):
    lat = recognize_lattice([v for _, v in x011_periods])
    m = match_optimal_curve(lat, [R11])
    assert m.c == 1
    assert modular_degree(x011.forms[0], x011.cusp_widths(), m.c, m.lattice) == 1


def test_x011_petersson_norm_against_degree_formula(x011):
    # deg = 4 pi^2 ||f||^2 / covol with deg = 1, c = 1
    L = curve_periods(R11.curve(), 100)
    want = float(L.covolume()) / (4 * float(mpmath.pi) ** 2)
    assert abs(petersson_norm(x011.forms[0], x011.cusp_widths()) - want) < 1e-9 * want


def test_x011_cusp_zero_is_five_torsion(x011):
    L = curve_periods(R11.curve(), 100)
    cc = cusp_constants(x011.forms[0], x011, Fraction(1), R11.curve(), L)
    assert cc[0].is_identity
    assert cc[1].order == 5 and cc[1].coords in {(Fraction(1, 5), 0), (Fraction(4, 5), 0)}
    assert tuple(x.to_rational() for x in cc[1].point) == (16, -61)


def test_recognize_rectangular_and_triangular():
    w1, w2 = mpmath.mpf(2), mpmath.mpc(0, 3)
    lat = recognize_lattice([w1, w2, 3 * w1 - w2, 2 * w2])
    assert lat.shape == "rectangular" and abs(lat.omega1 - 2) < 1e-20 and abs(lat.omega2 - w2) < 1e-20
    w2 = mpmath.mpc(1, 3)
    lat = recognize_lattice([w1, w2, w1 + 2 * w2])
    assert lat.shape == "triangular" and abs(lat.omega2 - w2) < 1e-20


def test_recognize_rejects_skew_lattice():
    with pytest.raises(LatticeError, match="neither"):
        recognize_lattice([mpmath.mpf(3), mpmath.mpc(1, 2)])


def test_recognize_degenerate():
    assert recognize_lattice([mpmath.mpf(2), mpmath.mpf(4)]).shape == "degenerate"


def test_recognize_rejects_irrational_ratio():
    with pytest.raises(LatticeError):
        recognize_lattice([mpmath.mpf(1), mpmath.sqrt(2), mpmath.mpc(0, 1)])


def test_match_requires_integer_reciprocal(x011_periods):
    lat = recognize_lattice([v for _, v in x011_periods])
    # 11.a3 is 5-isogenous: ratios differ in the two directions
    other = EllCurveRecord("11.a3", (0, -1, 1, 0, 0), 11, 0, "11.a")
    with pytest.raises(LatticeError):
        match_optimal_curve(lat, [other])


def test_short_expansion_raises_precision_error(x011):
    f = [s.truncate(10) for s in x011.forms[0]]
    with pytest.raises(PrecisionError):
        AntiderivativeTable(f, 100)
