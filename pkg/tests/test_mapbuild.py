from fractions import Fraction

import pytest

from modec.bundle import EllCurveRecord
from modec.elliptic import O, add_points, curve_periods
from modec.exactmath import HomogPoly
from modec.mapbuild import (
    CertifiedMap,
    MapError,
    certify_map,
    degree_window,
    expected_dimension,
    graded_piece,
    map_precision,
    piece_dimension_from_model,
    solve_map,
    weierstrass_residual,
    xy_expansions,
)
from modec.periods import cusp_constants

R11 = EllCurveRecord("11.a2", (0, -1, 1, -10, -20), 11, 0, "11.a")
E11 = R11.curve()


@pytest.fixture(scope="module")
def x011_constants(x011):
    return cusp_constants(x011.forms[0], x011, Fraction(1), E11, curve_periods(E11, 100))


@pytest.fixture(scope="module")
def x011_map(x011, x011_constants):
    cmap = solve_map(x011, x011.forms[0], Fraction(1), E11, x011_constants, 1, base_point=None)
    return certify_map(x011, cmap)


def test_xy_satisfy_weierstrass(x011, x011_constants):
    for x, y in xy_expansions(x011.forms[0], Fraction(1), E11, x011_constants, 40):
        assert weierstrass_residual(E11, x, y).is_zero()


def test_x_has_double_pole_at_infinity(x011):
    (x, y), _ = xy_expansions(x011.forms[0], Fraction(1), E11, None, 30)
    assert x.val == -2 and y.val == -3
    assert x[-2] == 1


def test_degree_window():
    assert list(degree_window(6, 6, 10)) == [2, 3]
    assert list(degree_window(1, 1, 4)) == [1]


@pytest.mark.parametrize("d", [1, 2, 3])
def test_piece_dimension_matches_model_and_riemann_roch(x011, d):
    rr = expected_dimension(x011, d)
    assert rr == 4 * d
    assert piece_dimension_from_model(x011, d) == rr
    assert len(graded_piece(x011, d, 60)) == rr


def test_x011_map_has_degree_one_and_certifies(x011_map):
    cert = x011_map.certificate
    assert x011_map.degree == 1
    assert cert.passed and cert.weight == 12 and cert.threshold == 12
    assert all(sum(p) > 12 for p in cert.per_triple)


def test_map_sends_rational_points_to_torsion(x011, x011_map):
    # the rational points of X0(11) map to E(Q), a group of order 5
    from modec.ratpoints import point_search

    for P in point_search(x011.model, 4, 3):
        try:
            X, Y, Z = x011_map.image(P)
        except MapError:
            continue  # base point of the single triple
        if Z == 0:
            assert X == 0
            continue
        pt = (Fraction(X, Z), Fraction(Y, Z))
        assert E11.equation(*pt) == 0
        Q = pt
        for _ in range(4):
            Q = add_points(E11, Q, pt)
        assert Q is O


def test_single_coefficient_corruption_is_rejected(x011, x011_map):
    bad = CertifiedMap(x011_map.curve, x011_map.degree, list(x011_map.triples), x011_map.nvars)
    A, B, C = bad.triples[0]
    e = next(iter(A.terms))
    terms = dict(A.terms)
    terms[e] += 1
    bad.triples[0] = (HomogPoly(A.nvars, terms), B, C)
    with pytest.raises(MapError, match="valence"):
        certify_map(x011, bad)
    assert bad.status == "uncertified"


def test_json_round_trip(x011, x011_map):
    again = CertifiedMap.from_json(x011_map.to_json())
    assert again.triples == x011_map.triples and again.degree == 1
    certify_map(x011, again)


def test_map_precision_shortfall(x011, x011_constants):
    from modec.qexp import PrecisionError

    with pytest.raises(PrecisionError, match="precmult"):
        solve_map(x011, x011.forms[0], Fraction(1), E11, x011_constants, 1, max_prec=map_precision(x011, 1) - 1)
