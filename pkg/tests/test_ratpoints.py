import itertools
import math
import random
from fractions import Fraction
from types import SimpleNamespace

import mpmath
import pytest

from modec.exactmath import HomogPoly, clear_denominators, monomials, parse_poly, rational_nullspace
from modec.ratpoints import (
    CM_J,
    JMapError,
    ZeroDimScheme,
    evaluate_j,
    hensel_lift,
    hensel_precision,
    k_schedule,
    local_solvability,
    normalize_point,
    point_search,
    solve_zerodim,
)

XYZ = ["x", "y", "z"]


def P(expr):
    return parse_poly(expr, XYZ)


def brute_points(polys, nvars, H):
    out = set()
    for v in itertools.product(range(-H, H + 1), repeat=nvars):
        if any(v) and math.gcd(*v) == 1 and normalize_point(v) == v:
            if all(p(v) == 0 for p in polys):
                out.add(v)
    return out


# -- local solvability -------------------------------------------------------

def test_sum_of_three_squares_empty_mod_8():
    q = [P("x^2 + y^2 + z^2")]
    assert local_solvability(q, 2, k=1) == "solvable"
    assert local_solvability(q, 2, k=3) == "empty"


@pytest.mark.parametrize("k", [2, 3, 4])
def test_emptiness_is_monotone_in_k(k):
    q = [P("x^2 + y^2 + z^2")]
    if local_solvability(q, 2, k=k) == "empty":
        assert local_solvability(q, 2, k=k + 1) == "empty"


@pytest.mark.parametrize("p,kmax", [(2, 8), (3, 4), (5, 3), (7, 3), (11, 3)])
def test_k_schedule_is_enforced(p, kmax):
    q = [P("x^2 + y^2 - z^2")]
    assert k_schedule(p) == kmax
    assert local_solvability(q, p, k=kmax) == "solvable"
    with pytest.raises(ValueError, match="schedule"):
        local_solvability(q, p, k=kmax + 1)
    with pytest.raises(ValueError):
        local_solvability(q, p, k=0)


def test_prime_must_divide_level():
    with pytest.raises(ValueError, match="divide"):
        local_solvability([P("x^2 + y^2 - z^2")], 5, level=36)


def test_local_solvability_of_level36_bundle(level36):
    assert local_solvability(level36, 3) == "solvable"


# -- point search ------------------------------------------------------------

def test_point_search_matches_brute_force():
    polys = [P("x^2 + y^2 - z^2")]
    assert set(point_search(polys, 3, 6)) == brute_points(polys, 3, 6)


def test_point_search_level36_small_height(level36):
    assert point_search(level36.model, 6, 2) == [(0, 1, -1, -2, 0, 1)]


# -- zero-dimensional schemes ------------------------------------------------

def test_hensel_precision_values():
    # smallest k with p^k >= 10^12, plus one
    assert hensel_precision(5) == 19
    assert hensel_precision(2) == 41
    assert hensel_precision(10) == 13


def test_scheme_without_rational_points():
    Z = ZeroDimScheme(3, [P("x^2 - 2*y^2"), P("z")])
    rep = solve_zerodim(Z, 100)
    assert rep.points == [] and rep.complete
    assert rep.upper_bound == 0


def test_singular_point_detection():
    Z = ZeroDimScheme(3, [P("x^2"), P("y")])
    assert not Z.is_nonsingular_mod((0, 0, 1), 7)
    Z = ZeroDimScheme(3, [P("x"), P("y")])
    assert Z.is_nonsingular_mod((0, 0, 1), 7)


def test_hensel_lift_of_rational_point():
    Z = ZeroDimScheme(3, [P("2*x - 3*z"), P("5*y + z")])
    x = hensel_lift(Z, (3 * pow(2, -1, 7) % 7, (-pow(5, -1, 7)) % 7, 1), 7, 10)
    m = 7**10
    assert all(q(x) % m == 0 for q in Z.polys)
    assert x[0] == 3 * pow(2, -1, 7) % 7  # chart coordinate is kept


def planted_scheme(rng: random.Random):
    """Quadrics through 1 to 3 random small points (non-collinear), cutting out exactly those points."""
    while True:
        n = rng.randint(1, 3)
        pts = {normalize_point([rng.randint(-4, 4) for _ in range(3)]) for _ in range(n)}
        pts = [p for p in pts if any(p)]
        if not pts:
            continue
        if len(pts) == 3:
            a, b, c = pts
            det = a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0]) + a[2] * (b[0] * c[1] - b[1] * c[0])
            if det == 0:
                continue
        break
    mons = monomials(3, 2)
    rows = [[math.prod(x**k for x, k in zip(p, e)) for e in mons] for p in pts]
    basis = rational_nullspace(rows, len(mons))
    polys = []
    for _ in range(len(basis)):
        w = [rng.randint(-3, 3) for _ in basis]
        coeffs = [sum(a * v[i] for a, v in zip(w, basis)) for i in range(len(mons))]
        if any(coeffs):
            polys.append(HomogPoly(3, {e: Fraction(c) for e, c in zip(mons, clear_denominators(coeffs)) if c}))
    polys += [HomogPoly(3, {e: Fraction(c) for e, c in zip(mons, clear_denominators(v)) if c}) for v in basis]
    return set(pts), polys


def test_solver_against_planted_brute_force_oracle():
    rng = random.Random(7)
    for trial in range(50):
        planted, polys = planted_scheme(rng)
        brute = brute_points(polys, 3, 5)
        assert brute == planted
        rep = solve_zerodim(ZeroDimScheme(3, polys), 200)
        assert set(rep.points) == planted, trial
        assert rep.complete, trial
        for p in rep.points:
            assert all(q(p) == 0 for q in polys)


# -- j-invariants ------------------------------------------------------------

def test_cm_table_against_klein_j():
    with mpmath.workdps(60):
        for D, j in CM_J.items():
            tau = mpmath.sqrt(D) / 2 if D % 4 == 0 else (1 + mpmath.sqrt(D)) / 2
            assert abs(1728 * mpmath.kleinj(tau) - j) < 1e-6 * max(1, abs(j))


def test_evaluate_j_tags():
    A, B = P("x^3"), P("y^3")
    fake = SimpleNamespace(jmap=(A, B))
    (cusp, cm, other) = evaluate_j(fake, [(1, 0, 0), (12, 1, 0), (2, -1, 0)])
    assert cusp.tag == "cusp" and cusp.j is None
    assert cm.tag == "CM" and cm.j == 1728 and cm.discriminant == -4
    assert other.tag == "non-CM" and other.j == Fraction(8, -1)
    with pytest.raises(JMapError):
        evaluate_j(fake, [(0, 0, 1)])
    with pytest.raises(JMapError):
        evaluate_j(SimpleNamespace(jmap=None), [])
