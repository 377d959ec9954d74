"""Rational points: small-height search, local solvability, pullback schemes, Hensel lifting, j-values.

Polynomials are HomogPoly with integer coefficients; projective points are
primitive integer tuples whose first nonzero coordinate is positive.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .elliptic import O
from .exactmath import HomogPoly, clear_denominators, rational_reconstruct
from .hecke import primes_up_to

log = logging.getLogger(__name__)

# class-number-one discriminants and their j-invariants
CM_J = {
    -3: 0,
    -4: 1728,
    -7: -3375,
    -8: 8000,
    -11: -32768,
    -12: 54000,
    -16: 287496,
    -19: -884736,
    -27: -12288000,
    -28: 16581375,
    -43: -884736000,
    -67: -147197952000,
    -163: -262537412640768000,
}

# default work limit for naive enumeration of P^{n-1}(F_l)
ENUM_BUDGET = 3 * 10**7


class ZeroDimError(ArithmeticError):
    """No prime below the search bound gives a usable reduction."""


def integral(polys: Sequence[HomogPoly]) -> list[HomogPoly]:
    return [p.primitive() for p in polys if not p.is_zero()]


def normalize_point(v: Sequence) -> tuple:
    """Primitive integer representative with first nonzero coordinate positive."""
    ints = clear_denominators(v)
    for x in ints:
        if x:
            if x < 0:
                ints = [-y for y in ints]
            break
    return tuple(ints)


def _int_terms(p: HomogPoly) -> list:
    return [(e, int(c)) for e, c in p.terms.items()]


def eval_int(p: HomogPoly, x: Sequence[int]) -> int:
    acc = 0
    for e, c in p.terms.items():
        t = int(c)
        for xi, k in zip(x, e):
            if k:
                t *= xi**k
        acc += t
    return acc


# ---------------------------------------------------------------------------
# vectorized evaluation


def _eval_block(p: HomogPoly, cols: Sequence, mod: Optional[int] = None):
    """p at many points at once; cols[i] is an int64 array (or scalar) for coordinate i."""
    acc = 0
    for e, c in p.terms.items():
        t = int(c) % mod if mod else int(c)
        for xi, k in zip(cols, e):
            for _ in range(k):
                t = t * xi
                if mod:
                    t = t % mod
        acc = acc + t
        if mod:
            acc = acc % mod
    return acc


# ---------------------------------------------------------------------------
# point search and local solvability


def point_search(model: Sequence[HomogPoly], nvars: int, height_bound: int) -> list[tuple]:
    """All points with coprime integer coordinates of absolute value <= height_bound.

    The last min(nvars, 4) coordinates are enumerated as numpy blocks; the
    first equation prunes each block and the others are checked exactly on
    the survivors.
    """
    polys = integral(model)
    H = height_bound
    rng = np.arange(-H, H + 1, dtype=np.int64)
    nblock = min(nvars, 4)
    nloop = nvars - nblock
    grids = np.meshgrid(*([rng] * nblock), indexing="ij")
    block = [g.ravel() for g in grids]
    found = set()
    for head in itertools.product(range(-H, H + 1), repeat=nloop):
        if head and any(head):
            first = next(x for x in head if x)
            if first < 0:
                continue
        cols = [np.int64(h) for h in head] + block
        mask = np.ones(block[0].shape, dtype=bool)
        if polys:
            mask &= _eval_block(polys[0], cols) == 0
        idx = np.flatnonzero(mask)
        for i in idx:
            v = tuple(int(x) for x in head) + tuple(int(b[i]) for b in block)
            if not any(v):
                continue
            if math.gcd(*v) != 1:
                continue
            nv = normalize_point(v)
            if nv != v:
                continue
            if all(eval_int(p, v) == 0 for p in polys[1:]):
                found.add(v)
    return sorted(found)


def k_schedule(p: int) -> int:
    """Largest k tested for points mod p^k: 8 for p = 2, 4 for p = 3, 3 otherwise."""
    return 8 if p == 2 else 4 if p == 3 else 3


def points_mod_prime_power(model: Sequence[HomogPoly], nvars: int, p: int, k: int, cap: int = 2 * 10**6) -> list:
    """Primitive solutions mod p^k up to units: the first unit coordinate is scaled to 1.

    Built by lifting solutions mod p^(j) one digit at a time.
    """
    polys = integral(model)
    # level 1: points of P^{n-1}(F_p)
    sols = [tuple(v) for v in enumerate_projective_mod(polys, nvars, p)]
    m = p
    for _ in range(1, k):
        m2 = m * p
        nxt = set()
        for v in sols:
            piv = next(i for i, x in enumerate(v) if x % p)
            free = [i for i in range(nvars) if i != piv]
            for t in itertools.product(range(p), repeat=len(free)):
                w = list(v)
                for i, d in zip(free, t):
                    w[i] = (w[i] + d * m) % m2
                if all(eval_int(q, w) % m2 == 0 for q in polys):
                    nxt.add(tuple(w))
            if len(nxt) > cap:
                raise MemoryError(f"more than {cap} solutions mod {m2}")
        sols = sorted(nxt)
        m = m2
        if not sols:
            break
    return sols


def local_solvability(model, p: int, k: Optional[int] = None, nvars: Optional[int] = None, level: Optional[int] = None) -> str:
    """'empty' if there is no primitive solution mod p^j for some j <= k, else 'solvable'.

    ``model`` is a bundle or a list of HomogPoly.  k defaults to the
    schedule and may not exceed it.
    """
    if hasattr(model, "model"):
        level = model.level if level is None else level
        nvars = model.nvars
        model = model.model
    if nvars is None:
        nvars = model[0].nvars
    if level is not None and level % p:
        raise ValueError(f"p = {p} does not divide the level {level}")
    kmax = k_schedule(p)
    k = kmax if k is None else k
    if k > kmax or k < 1:
        raise ValueError(f"k = {k} outside the schedule 1..{kmax} for p = {p}")
    sols = points_mod_prime_power(model, nvars, p, k)
    return "solvable" if sols else "empty"


# ---------------------------------------------------------------------------
# F_p points of zero-dimensional schemes


def enumerate_projective_mod(polys: Sequence[HomogPoly], nvars: int, p: int, budget: int = ENUM_BUDGET) -> list[tuple]:
    """Points of P^{n-1}(F_p) on all polys, each with first nonzero coordinate 1."""
    total = (p**nvars - 1) // (p - 1)
    if total > budget:
        raise ZeroDimError(f"|P^{nvars - 1}(F_{p})| = {total} exceeds the enumeration budget {budget}")
    out = []
    vals = np.arange(p, dtype=np.int64)
    for piv in range(nvars):
        nfree = nvars - piv - 1
        nloop = max(0, nfree - 4)
        nblock = nfree - nloop
        if nblock:
            grids = np.meshgrid(*([vals] * nblock), indexing="ij")
            block = [g.ravel() for g in grids]
        else:
            block = []
        for head in itertools.product(range(p), repeat=nloop):
            cols = [np.int64(0)] * piv + [np.int64(1)] + [np.int64(h) for h in head] + block
            size = block[0].shape if block else (1,)
            mask = np.ones(size, dtype=bool)
            for q in polys:
                r = _eval_block(q, cols, p)
                mask &= np.broadcast_to(r == 0, size)
                if not mask.any():
                    break
            for i in np.flatnonzero(mask):
                v = [0] * piv + [1] + list(head) + [int(b[i]) for b in block]
                out.append(tuple(v))
    return out


def _rank_mod(rows: list[list[int]], p: int) -> int:
    A = [[x % p for x in r] for r in rows]
    rank = 0
    ncols = len(A[0]) if A else 0
    for c in range(ncols):
        piv = next((i for i in range(rank, len(A)) if A[i][c]), None)
        if piv is None:
            continue
        A[rank], A[piv] = A[piv], A[rank]
        inv = pow(A[rank][c], -1, p)
        A[rank] = [x * inv % p for x in A[rank]]
        for i in range(len(A)):
            if i != rank and A[i][c]:
                f = A[i][c]
                A[i] = [(x - f * y) % p for x, y in zip(A[i], A[rank])]
        rank += 1
    return rank


@dataclass
class ZeroDimScheme:
    nvars: int
    polys: list  # integer HomogPoly, content 1
    target: object = None  # point T on E, or a label

    def __post_init__(self):
        self.polys = integral(self.polys)
        self._jac = [[q.diff(i) for i in range(self.nvars)] for q in self.polys]

    def jacobian_mod(self, v: Sequence[int], m: int) -> list[list[int]]:
        return [[d.eval_mod(list(v), m) if not d.is_zero() else 0 for d in row] for row in self._jac]

    def is_nonsingular_mod(self, v: Sequence[int], p: int) -> bool:
        """Jacobian of the dehomogenized system has rank n - 1 (chart: first unit coordinate = 1)."""
        piv = next(i for i, x in enumerate(v) if x % p)
        J = self.jacobian_mod(v, p)
        J = [[x for i, x in enumerate(r) if i != piv] for r in J]
        return _rank_mod(J, p) == self.nvars - 1

    def points_mod(self, p: int, budget: int = ENUM_BUDGET) -> list[tuple]:
        return enumerate_projective_mod(self.polys, self.nvars, p, budget)

    def contains(self, v: Sequence[int]) -> bool:
        return all(eval_int(q, v) == 0 for q in self.polys)


def hensel_precision(p: int) -> int:
    """k = ceil(12 log_p 10) + 1."""
    k = math.ceil(12 * math.log(10) / math.log(p))
    # guard against floating error at exact powers
    while p ** (k - 1) >= 10**12:
        k -= 1
    while p**k < 10**12:
        k += 1
    return k + 1


def hensel_lift(Z: ZeroDimScheme, v: Sequence[int], p: int, k: int) -> Optional[list[int]]:
    """Lift a nonsingular F_p point to Z/p^k, keeping the chart coordinate equal to 1."""
    n = Z.nvars
    piv = next(i for i, x in enumerate(v) if x % p)
    free = [i for i in range(n) if i != piv]
    J0 = [[r[i] for i in free] for r in Z.jacobian_mod(v, p)]
    # choose n - 1 rows with an invertible minor mod p
    rows, basis = [], []
    for i, r in enumerate(J0):
        if _rank_mod(basis + [r], p) > len(basis):
            basis.append(r)
            rows.append(i)
        if len(rows) == n - 1:
            break
    if len(rows) < n - 1:
        return None
    Minv = _inverse_mod([J0[i] for i in rows], p)
    x = list(v)
    m = p
    for _ in range(1, k):
        vals = [eval_int(Z.polys[i], x) for i in rows]
        if any(val % m for val in vals):
            return None
        rhs = [(-(val // m)) % p for val in vals]
        delta = [sum(a * b for a, b in zip(row, rhs)) % p for row in Minv]
        for i, d in zip(free, delta):
            x[i] += d * m
        m *= p
    x = [xi % m for xi in x]
    if any(eval_int(q, x) % m for q in Z.polys):
        return None
    return x


def _inverse_mod(M: list[list[int]], p: int) -> list[list[int]]:
    n = len(M)
    A = [[x % p for x in r] + [int(i == j) for j in range(n)] for i, r in enumerate(M)]
    for c in range(n):
        piv = next(i for i in range(c, n) if A[i][c])
        A[c], A[piv] = A[piv], A[c]
        inv = pow(A[c][c], -1, p)
        A[c] = [x * inv % p for x in A[c]]
        for i in range(n):
            if i != c and A[i][c]:
                f = A[i][c]
                A[i] = [(x - f * y) % p for x, y in zip(A[i], A[c])]
    return [r[n:] for r in A]


@dataclass
class PointReport:
    points: list
    lower_prime: Optional[int] = None
    upper_prime: Optional[int] = None
    upper_bound: Optional[int] = None
    complete: bool = False
    fallback_needed: bool = False
    notes: list = field(default_factory=list)
    j_values: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "points": [list(p) for p in self.points],
            "lower_prime": self.lower_prime,
            "upper_prime": self.upper_prime,
            "upper_bound": self.upper_bound,
            "complete": self.complete,
            "fallback_needed": self.fallback_needed,
            "notes": self.notes,
            "j_values": [j.to_json() for j in self.j_values],
        }


def solve_zerodim(Z: ZeroDimScheme, prime_bound: int = 400, level: int = 1, p_max: int = 100,
                  budget: int = ENUM_BUDGET) -> PointReport:
    """Rational points of Z: Hensel lifts from a good p give the lower bound, |Z(F_l)| the upper bound."""
    report = PointReport([])
    p_used, lifted = None, []
    for p in primes_up_to(p_max):
        if level % p == 0:
            continue
        try:
            pts = Z.points_mod(p, budget)
        except ZeroDimError as exc:
            raise ZeroDimError(f"no usable prime: {exc}") from exc
        if all(Z.is_nonsingular_mod(v, p) for v in pts):
            p_used, lifted = p, pts
            break
        log.info("p = %d: singular F_p point, advancing", p)
    if p_used is None:
        raise ZeroDimError(f"every prime below {p_max} has a singular F_p point")
    k = hensel_precision(p_used)
    mod = p_used**k
    found = set()
    for v in lifted:
        x = hensel_lift(Z, v, p_used, k)
        if x is None:
            continue
        coords = [rational_reconstruct(xi, mod) for xi in x]
        if any(c is None for c in coords):
            continue
        P = normalize_point(coords)
        if Z.contains(P):
            found.add(P)
    report.points = sorted(found)
    report.lower_prime = p_used
    log.info("p = %d, k = %d: %d of %d F_p points lift to rational points", p_used, k, len(found), len(lifted))
    for ell in primes_up_to(prime_bound - 1):
        if ell <= p_used or level % ell == 0:
            continue
        try:
            pts = Z.points_mod(ell, budget)
        except ZeroDimError:
            report.notes.append(f"stopped at l = {ell}: enumeration budget")
            break
        if not all(Z.is_nonsingular_mod(v, ell) for v in pts):
            continue
        if report.upper_bound is None or len(pts) < report.upper_bound:
            report.upper_bound, report.upper_prime = len(pts), ell
        if len(pts) == len(found):
            report.complete = True
            break
    if not report.complete:
        report.fallback_needed = True
        report.notes.append("bounds did not meet; result indeterminate")
    return report


# ---------------------------------------------------------------------------
# pullback schemes


def projective_target(T) -> tuple:
    """Integer projective coordinates of a point of E (O is (0 : 1 : 0))."""
    if T is O:
        return (0, 1, 0)
    x, y = Fraction(T[0]), Fraction(T[1])
    return normalize_point([x, y, Fraction(1)])


def pullback_scheme(cmap, T, model: Sequence[HomogPoly]) -> ZeroDimScheme:
    """Model plus the 2x2 minors of ((-A, -B, C), T) for every stored triple."""
    xt, yt, zt = projective_target(T)
    polys = list(model)
    for A, B, C in cmap.triples:
        X, Y, Z = -A, -B, C
        for m in (X * yt - Y * xt, X * zt - Z * xt, Y * zt - Z * yt):
            if not m.is_zero():
                polys.append(m)
    return ZeroDimScheme(cmap.nvars, polys, T)


# ---------------------------------------------------------------------------
# j-invariants


@dataclass
class JValue:
    point: tuple
    j: Optional[Fraction]  # None at a cusp
    tag: str  # cusp, CM or non-CM
    discriminant: Optional[int] = None

    def to_json(self) -> dict:
        return {
            "point": list(self.point),
            "j": None if self.j is None else str(self.j),
            "tag": self.tag,
            "discriminant": self.discriminant,
        }


class JMapError(ArithmeticError):
    pass


def evaluate_j(bundle, points: Sequence[tuple]) -> list[JValue]:
    if bundle.jmap is None:
        raise JMapError("bundle has no j-map")
    A, B = bundle.jmap
    inv = {v: d for d, v in CM_J.items()}
    out = []
    for P in points:
        a, b = Fraction(A(P)), Fraction(B(P))
        if a == 0 and b == 0:
            raise JMapError(f"j-map numerator and denominator both vanish at {P}")
        if b == 0:
            out.append(JValue(tuple(P), None, "cusp"))
            continue
        j = a / b
        if j.denominator == 1 and int(j) in inv:
            out.append(JValue(tuple(P), j, "CM", inv[int(j)]))
        else:
            out.append(JValue(tuple(P), j, "non-CM"))
    return out


def check_j_counts(bundle, jvals: Sequence[JValue]) -> list[str]:
    """Mismatches against the bundle's cusp and CM counts (empty list when consistent)."""
    issues = []
    ncusp = sum(1 for v in jvals if v.tag == "cusp")
    if bundle.rational_cusp_count is not None and ncusp != bundle.rational_cusp_count:
        issues.append(f"{ncusp} rational cusps found, bundle says {bundle.rational_cusp_count}")
    if bundle.cm_point_counts:
        for d, cnt in bundle.cm_point_counts.items():
            got = sum(1 for v in jvals if v.tag == "CM" and v.discriminant == int(d))
            if got != cnt:
                issues.append(f"{got} CM points of discriminant {d} found, bundle says {cnt}")
    return issues
