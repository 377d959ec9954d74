import pytest

from modec.elliptic import EllipticCurveQ
from modec.hecke import HeckeError, hecke_matrix, isolate_eigenform, kernel

E11 = EllipticCurveQ(0, -1, 1, -10, -20)
E432 = EllipticCurveQ(0, 0, 0, -27, -918)


def brute_ap(a, p):
    """p + 1 - #E(F_p) by counting affine solutions of the long Weierstrass equation."""
    a1, a2, a3, a4, a6 = a
    n = sum(1 for x in range(p) for y in range(p) if (y * y + a1 * x * y + a3 * y - x**3 - a2 * x * x - a4 * x - a6) % p == 0)
    return p - n


@pytest.mark.parametrize("p", [2, 3, 5, 7, 13])
def test_x011_eigenvalues_match_point_counts(x011, p):
    M = hecke_matrix(x011.forms, p, 11)
    assert M.matrix[0][0] == brute_ap((0, -1, 1, -10, -20), p)


def test_level36_operators_commute(level36):
    forms = level36.forms_at(level36.prec)
    T5 = hecke_matrix(forms, 5, 36)
    T7 = hecke_matrix(forms, 7, 36)
    assert T5 * T7 == T7 * T5


def test_level36_eigenform_is_isolated(level36):
    ef = isolate_eigenform(level36, E432, prec=level36.prec)
    assert len(ef.coords) == 6
    assert ef.primes[0] == 5 and len(ef.primes) == 4
    # the eigen-relation holds for a prime not used in the isolation
    M = hecke_matrix(level36.forms_at(level36.prec), 17, 36)
    image = M.apply(ef.coords)
    a17 = brute_ap((0, 0, 0, -27, -918), 17)
    assert all((y - a17 * x).is_zero() for x, y in zip(ef.coords, image))


def test_absent_class_fails_isolation(level36):
    with pytest.raises(HeckeError, match="dimension 0"):
        isolate_eigenform(level36, E11, prec=level36.prec)


def test_kernel_without_eigenvalue_is_empty(x011):
    M = hecke_matrix(x011.forms, 2, 11)
    assert kernel(M, 5) == []
