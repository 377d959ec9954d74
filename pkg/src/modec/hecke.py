"""Hecke operators on the span of a bundle's cusp forms, and eigenform isolation.

At every cusp of width w, T(p)[p 0; 0 1]^* sends sum a(n) q^{n/w} to
sum sigma(a(pn)) q^{n/w} + sum b(n) q^{pn/w} with sigma: zeta_N -> zeta_N^{1/p}.
The b(n) are never computed: the operator is pinned down by the indices with
p not dividing n.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .exactmath import CyclotomicNumber, cyclo_echelon_basis, nullspace
from .qexp import FracQSeries

log = logging.getLogger(__name__)

PRIME_BOUND = 50


class HeckeError(ArithmeticError):
    """Rank deficiency or inconsistency in the Hecke system; usually too little precision."""


def primes_up_to(n: int) -> list[int]:
    return [p for p in range(2, n + 1) if all(p % q for q in range(2, math.isqrt(p) + 1))]


@dataclass
class HeckeMatrix:
    p: int
    matrix: list  # rows of CyclotomicNumber: T f_i = sum_j matrix[i][j] f_j
    level: int

    def apply(self, coeffs: Sequence) -> list:
        """Image of sum_i c_i f_i, as coordinates in the basis."""
        g = len(self.matrix)
        zero = CyclotomicNumber.from_rational(self.level, 0)
        out = [zero] * g
        for i, c in enumerate(coeffs):
            if c:
                for j in range(g):
                    out[j] = out[j] + self.matrix[i][j] * c
        return out

    def __mul__(self, other: "HeckeMatrix") -> list:
        g = len(self.matrix)
        zero = CyclotomicNumber.from_rational(self.level, 0)
        return [
            [sum((self.matrix[i][k] * other.matrix[k][j] for k in range(g)), zero) for j in range(g)]
            for i in range(g)
        ]

    def is_rational(self) -> bool:
        return all(x.is_rational() for row in self.matrix for x in row)


def _sigma_exponent(p: int, N: int) -> int:
    return pow(p, -1, N) if N > 1 else 1


def hecke_matrix(forms: Sequence[Sequence[FracQSeries]], p: int, level: int, prec: Optional[int] = None) -> HeckeMatrix:
    """Matrix of T(p)[p 0; 0 1]^* on the span of ``forms`` (forms[i][cusp])."""
    if level % p == 0:
        raise ValueError(f"p = {p} divides the level {level}")
    g = len(forms)
    if g == 0:
        return HeckeMatrix(p, [], level)
    ncusp = len(forms[0])
    if prec is None:
        prec = min(s.prec for f in forms for s in f)
    k = _sigma_exponent(p, level)
    zero = CyclotomicNumber.from_rational(level, 0)

    def coeff(s: FracQSeries, n: int):
        return s[n] if n >= s.val else zero

    rows, rhs = [], [[] for _ in range(g)]
    for c in range(ncusp):
        for n in range(1, (prec - 1) // p + 1):
            if n % p == 0:
                continue
            rows.append([coeff(forms[j][c], n) for j in range(g)])
            for i in range(g):
                rhs[i].append(coeff(forms[i][c], p * n).galois_twist(k))
    if _rank_cyclo(rows, level) < g:
        raise HeckeError(f"T({p}): p-free coefficients below prec {prec} do not determine the operator; raise precmult")
    matrix = []
    for i in range(g):
        aug = [r + [-b] for r, b in zip(rows, rhs[i])]
        ns = nullspace(aug, g + 1)
        sol = [v for v in ns if not _is_zero(v[-1])]
        if len(ns) != 1 or not sol:
            raise HeckeError(f"T({p}) image of form {i} is not in the span; bundle or precision inconsistent")
        v = sol[0]
        last = v[-1]
        matrix.append([_cyc(x, level) / last for x in v[:-1]])
    return HeckeMatrix(p, matrix, level)


def _is_zero(x) -> bool:
    return x.is_zero() if isinstance(x, CyclotomicNumber) else x == 0


def _cyc(x, level):
    return x if isinstance(x, CyclotomicNumber) else CyclotomicNumber.from_rational(level, x)


def _rank_cyclo(rows, level) -> int:
    return len(rows[0]) - len(nullspace(rows, len(rows[0]))) if rows else 0


def kernel(M: HeckeMatrix, ap: int, within: Optional[list] = None) -> list:
    """Basis (rows of coordinates) of {c : c M = ap c}, optionally inside span(within)."""
    g = len(M.matrix)
    level = M.level
    # c (M - ap I) = 0  <=>  (M - ap I)^T c^T = 0
    A = [[M.matrix[i][j] - (ap if i == j else 0) for i in range(g)] for j in range(g)]
    if within is None:
        ns = nullspace(A, g)
        return cyclo_echelon_basis([[_cyc(x, level) for x in v] for v in ns], level) if ns else []
    if not within:
        return []
    # c = sum t_k within[k]
    B = [[sum((A[r][i] * w[i] for i in range(g)), CyclotomicNumber.from_rational(level, 0)) for w in within] for r in range(g)]
    ns = nullspace(B, len(within))
    vecs = [[sum((w[i] * t[k] for k, w in enumerate(within)), CyclotomicNumber.from_rational(level, 0)) for i in range(g)] for t in ns]
    return cyclo_echelon_basis(vecs, level) if vecs else []


def hecke_kernel(bundle, targets: dict, prec: Optional[int] = None) -> list:
    """Intersection of ker(T(p) - a_p) over the given {p: a_p}."""
    forms = bundle.forms_at(prec) if prec else bundle.forms
    level = bundle.level
    g = len(forms)
    one = CyclotomicNumber.from_rational(level, 1)
    zero = CyclotomicNumber.from_rational(level, 0)
    space = [[one if i == j else zero for j in range(g)] for i in range(g)]
    for p in sorted(targets):
        M = hecke_matrix(forms, p, level)
        space = kernel(M, targets[p], space)
        if not space:
            break
    return space


def combine_forms(forms, coords) -> list:
    ncusp = len(forms[0])
    out = []
    for c in range(ncusp):
        acc = None
        for f, x in zip(forms, coords):
            if x:
                tm = f[c] * x
                acc = tm if acc is None else acc + tm
        out.append(acc if acc is not None else forms[0][c] * 0)
    return out


def normalize_content(series: list) -> tuple[list, Fraction]:
    """Scale so every Z-coordinate is integral with gcd 1; returns (series, scale).

    Sign: the first nonzero coefficient at the first cusp that has one gets a
    positive leading rational coordinate.
    """
    den, num = 1, 0
    for s in series:
        for c in s.coeffs:
            for x in c.coeffs:
                if x:
                    den = den * x.denominator // math.gcd(den, x.denominator)
    for s in series:
        for c in s.coeffs:
            for x in c.coeffs:
                if x:
                    num = math.gcd(num, (x * den).numerator)
    if num == 0:
        return series, Fraction(1)
    scale = Fraction(den, num)
    lead = None
    for s in series:
        for c in s.coeffs:
            if not c.is_zero():
                lead = next(x for x in c.coeffs if x)
                break
        if lead is not None:
            break
    if lead < 0:
        scale = -scale
    return [s * scale for s in series], scale


@dataclass
class Eigenform:
    coords: list  # coordinates in the bundle basis (after scaling)
    series: list  # one FracQSeries per cusp
    primes: list  # primes used
    eigenvalues: dict


def isolate_eigenform(bundle, curve, multiplicity: int = 1, prime_bound: int = PRIME_BOUND, prec: Optional[int] = None,
                      confirm: int = 3) -> Eigenform:
    """Form in the intersection of ker(T(p) - a_p(E)), integrally normalized.

    Once the kernel has the target dimension, ``confirm`` further primes are
    intersected so that an accidental match of a few eigenvalues is caught.
    """
    from .elliptic import BadReductionError, ap

    if multiplicity < 1:
        raise ValueError("multiplicity must be at least 1")
    forms = bundle.forms_at(prec) if prec else bundle.forms
    level = bundle.level
    g = len(forms)
    one = CyclotomicNumber.from_rational(level, 1)
    zero = CyclotomicNumber.from_rational(level, 0)
    space = [[one if i == j else zero for j in range(g)] for i in range(g)]
    used, eig = [], {}
    for p in primes_up_to(prime_bound):
        if level % p == 0:
            continue
        try:
            a = ap(curve, p)
        except BadReductionError:
            continue
        M = hecke_matrix(forms, p, level)
        space = kernel(M, a, space)
        used.append(p)
        eig[p] = a
        log.info("T(%d) - (%d): kernel dimension %d", p, a, len(space))
        if len(space) < multiplicity:
            break
        if len(space) == multiplicity:
            if confirm <= 0:
                break
            confirm -= 1
    if len(space) != multiplicity:
        raise HeckeError(
            f"kernel intersection has dimension {len(space)} after primes {used}; expected {multiplicity}"
        )
    v = space[0]
    series = combine_forms(forms, v)
    series, scale = normalize_content(series)
    coords = [x * scale for x in v]
    return Eigenform(coords, series, used, eig)
