"""Acceptance gate: one test per criterion.

Tolerances: exact for certified and exact quantities; 1e-6 relative for
numeric intermediates; period values to 3 decimal places.
"""

import time
from fractions import Fraction

import mpmath
import pytest

REL = 1e-6
J_NONCM = -(2**2) * 3**7 * 5**3 * 439**3
LEVEL36_POINTS = {(0, 1, -1, -2, 0, 1), (1, 2, -2, 7, 3, 4), (2, 1, -1, 2, 6, 5)}


def test_criterion_1_level36_end_to_end(level36_run):
    t0 = time.perf_counter()
    cmap, points, report = level36_run
    assert report.optimal_curve == "432.f1"
    assert Fraction(report.manin_constant) == Fraction(1, 216)
    assert report.degree == 6 and cmap.degree == 3  # map degree d in the graded ring; analytic degree 6
    cert = cmap.certificate
    assert cmap.status == "certified" and cert.passed
    assert cert.threshold == 162 and cert.weight == 18
    assert all(sum(per) > 162 for per in cert.per_triple)
    assert points.complete and set(points.points) == LEVEL36_POINTS
    js = sorted((j.tag, j.j) for j in points.j_values)
    assert js == [("CM", 0), ("CM", 0), ("non-CM", J_NONCM)]
    assert report.status == "success"
    assert sum(report.timings.values()) + (time.perf_counter() - t0) < 30 * 60


def test_criterion_2_level36_periods(level36):
    from modec.elliptic import curve_periods, EllipticCurveQ
    from modec.hecke import combine_forms, isolate_eigenform
    from modec.periods import recognize_lattice, sample_periods

    ef = isolate_eigenform(level36, EllipticCurveQ(0, 0, 0, -27, -918), prec=level36.prec)
    series = combine_forms(level36.forms, ef.coords)
    vals = [v for _, v in sample_periods(series, level36, 20, 100, seed=0)]

    def rounded(v):
        return (round(float(mpmath.re(v)), 3), round(float(mpmath.im(v)), 3))

    seen = {rounded(v) for v in vals} | {rounded(-v) for v in vals}
    assert (163.379, 0.0) in seen
    assert (81.69, 150.039) in seen
    lat = recognize_lattice(vals)
    assert lat.shape == "triangular"
    assert abs(mpmath.re(lat.omega2) - lat.omega1 / 2) < REL * lat.omega1


def _eta_product_oracle(n):
    """Coefficients of q prod (1 - q^k)^2 (1 - q^{11k})^2 by repeated multiplication."""
    c = [0] * n
    c[0] = 1
    for k in range(1, n):
        for step, times in ((k, 2), (11 * k, 2)):
            if step >= n:
                continue
            for _ in range(times):
                for i in range(n - 1, step - 1, -1):
                    c[i] -= c[i - step]
    return [0] + c[: n - 1]


def _point_count_ap(p):
    n = sum(1 for x in range(p) for y in range(p) if (y * y + y - x**3 + x * x + 10 * x + 20) % p == 0)
    return p - n


def test_criterion_3_x011(x011):
    from modec.bundle import EllCurveRecord
    from modec.elliptic import curve_periods
    from modec.hecke import hecke_matrix
    from modec.periods import match_optimal_curve, modular_degree, recognize_lattice, sample_periods

    f = x011.forms[0]
    oracle = _eta_product_oracle(200)
    assert [f[0][n] if n >= f[0].val else 0 for n in range(200)] == oracle
    rec = EllCurveRecord("11.a2", (0, -1, 1, -10, -20), 11, 0, "11.a")
    lat = recognize_lattice([v for _, v in sample_periods(f, x011, 20, 100)])
    m = match_optimal_curve(lat, [rec])
    L = curve_periods(rec.curve(), 100)
    with mpmath.workdps(30):
        assert abs(lat.omega1 - L.omega1) < REL * L.omega1
        assert abs(lat.omega2 - L.omega2) < REL * abs(L.omega2)
    assert m.c == 1
    assert modular_degree(f, x011.cusp_widths(), m.c, m.lattice) == 1
    for p in (2, 3, 5, 7, 13):
        assert hecke_matrix(x011.forms, p, 11).matrix[0][0] == _point_count_ap(p)


def test_criterion_4_property_suites(level36, level36_run):
    import test_exactmath as tex
    import test_elliptic as tel
    import test_mapbuild  # noqa: F401  (collected standalone as well)
    import test_qexp as tq
    import test_ratpoints as tr
    import test_sl2z as ts

    from modec.elliptic import EllipticCurveQ
    from modec.exactmath import HomogPoly
    from modec.mapbuild import CertifiedMap, MapError, certify_map

    ts.test_st_round_trip_1000_random()
    tex.test_rational_reconstruction_round_trip()
    for E in (tel.E11, tel.E432, EllipticCurveQ(0, 0, 0, -1, 0)):
        tel.test_wp_against_lattice_sum_128_bits(E)
    tq.test_antiderivative_derivative_round_trip()
    tex.test_nullspace_by_substitution()
    tr.test_solver_against_planted_brute_force_oracle()

    cmap = level36_run[0]
    A, B, C = cmap.triples[0]
    terms = dict(A.terms)
    e = next(iter(terms))
    terms[e] += 1
    bad = CertifiedMap(cmap.curve, cmap.degree, [(HomogPoly(A.nvars, terms), B, C)] + list(cmap.triples[1:]), cmap.nvars)
    with pytest.raises(MapError, match="valence"):
        certify_map(level36, bad)


def test_criterion_5_local_solvability():
    from modec.exactmath import parse_poly
    from modec.ratpoints import k_schedule, local_solvability

    q = [parse_poly("x^2 + y^2 + z^2", ["x", "y", "z"])]
    assert local_solvability(q, 2, k=3) == "empty"
    for p, kmax in ((2, 8), (3, 4), (5, 3), (7, 3)):
        assert k_schedule(p) == kmax
        local_solvability(q, p, k=kmax)
        with pytest.raises(ValueError):
            local_solvability(q, p, k=kmax + 1)
