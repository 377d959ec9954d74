import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from modec.exactmath import (
    CyclotomicNumber,
    HomogPoly,
    clear_denominators,
    monomials,
    nullspace,
    parse_poly,
    rational_nullspace,
    rational_reconstruct,
)

fracs = st.fractions(min_value=-50, max_value=50, max_denominator=30)


# -- rational reconstruction -------------------------------------------------

@given(st.integers(-10**6, 10**6), st.integers(1, 10**6), st.integers(40, 80))
def test_rational_reconstruction_round_trip(a, b, bits):
    """a/b comes back whenever |a|, b <= sqrt(m/2) and gcd(b, m) = 1."""
    m = 2**bits + 1
    while math.gcd(b, m) != 1:
        m += 2
    if max(abs(a), b) > math.isqrt(m // 2):
        return
    r = a * pow(b, -1, m) % m
    assert rational_reconstruct(r, m) == Fraction(a, b)


def test_rational_reconstruction_matches_brute_force():
    m = 101
    bound = math.isqrt(m // 2)
    small = {(a * pow(b, -1, m)) % m: Fraction(a, b) for b in range(1, bound + 1) for a in range(-bound, bound + 1)}
    for r in range(m):
        assert rational_reconstruct(r, m) == small.get(r)


# -- cyclotomic arithmetic ---------------------------------------------------

@given(st.lists(fracs, min_size=1, max_size=6), st.lists(fracs, min_size=1, max_size=6))
def test_cyclotomic_field_axioms(u, v):
    a, b = CyclotomicNumber(12, u), CyclotomicNumber(12, v)
    assert a * b == b * a
    assert (a + b) - b == a
    if not b.is_zero():
        assert (a / b) * b == a


def test_zeta_has_order_n():
    z = CyclotomicNumber.zeta(36)
    assert z**36 == 1
    assert all(z**k != 1 for k in (12, 18))
    assert z.galois_twist(5) == z**5


def test_norm_of_root_of_unity():
    assert CyclotomicNumber.zeta(11).norm() == 1


# -- null spaces -------------------------------------------------------------

@given(st.integers(1, 5), st.integers(1, 7), st.data())
def test_nullspace_by_substitution(nrows, ncols, data):
    rows = [data.draw(st.lists(fracs, min_size=ncols, max_size=ncols)) for _ in range(nrows)]
    ns = nullspace(rows, ncols)
    for v in ns:
        assert all(sum(r[j] * v[j] for j in range(ncols)) == 0 for r in rows)
    # rank-nullity against sympy as an independent rank oracle
    import sympy

    assert len(ns) == ncols - sympy.Matrix(rows).rank()


def test_cyclotomic_nullspace_by_substitution():
    z = CyclotomicNumber.zeta(12)
    rows = [[z, 1, z * z], [1, z, 0]]
    ns = nullspace(rows, 3)
    assert len(ns) == 1
    v = ns[0]
    assert all((sum((r[j] * v[j] for j in range(3)), CyclotomicNumber(12)) ).is_zero() for r in rows)


def test_rational_nullspace_with_cyclotomic_rows():
    z = CyclotomicNumber.zeta(12)
    # x + z y = 0 has no nonzero rational solution; x - y = 0 alongside z x - z y
    assert rational_nullspace([[1, z]], 2) == []
    ns = rational_nullspace([[z, -z]], 2)
    assert len(ns) == 1 and ns[0][0] == ns[0][1]


# -- polynomials -------------------------------------------------------------

def test_monomial_count():
    assert len(monomials(6, 3)) == math.comb(8, 5)


def test_clear_denominators_is_primitive():
    assert clear_denominators([Fraction(1, 2), Fraction(-3, 4), 0]) == [2, -3, 0]


@given(st.lists(st.integers(-5, 5), min_size=3, max_size=3))
def test_parse_poly_evaluates_like_python(pt):
    p = parse_poly("x^2*y - 3*y*z^2 + 2*z^3", ["x", "y", "z"])
    x, y, z = pt
    assert p(pt) == x * x * y - 3 * y * z * z + 2 * z**3


def test_homogpoly_json_round_trip():
    p = HomogPoly(3, {(2, 0, 0): Fraction(1, 3), (0, 1, 1): -2})
    assert HomogPoly.from_json(3, p.to_json()) == p
    assert p.primitive().is_integral()
